"""
Django settings for the ANISOST project.

ANISOST is a numerical library with an experiment driver exposed as Django
management commands. There is no database, no URL configuration and no HTTP
surface; Django provides the app layout, the settings/configuration layer,
logging configuration and the command-line entry points.

Sections:
- Path and environment setup: base directory and `.env` loading.
- Application definition: installed apps (REST framework serializers plus the
  numerical apps).
- Database: intentionally empty.
- Logging: dictConfig with one logger per app.
- Experiment defaults: worker threads, output directory, sampling and greedy
  limits, read from environment variables.

For more information, see the Django documentation:
https://docs.djangoproject.com/en/5.1/topics/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv(os.path.join(BASE_DIR, '.env'))

SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'anisost-local-only-key')

DEBUG = os.getenv('DJANGO_DEBUG', 'False').lower() in ['true', '1']

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',

    #installed apps
    'rest_framework',

    'Mesh',
    'Polynomials',
    'Fields',
    'Smoothness',
    'Approximation',
    'Refinement',
    'Experiments',
]

# No persistence: every experiment writes CSV/JSON artifacts to disk.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

REST_FRAMEWORK = {
    # Exponents and undefined ratios are mapped to "inf"/null by the
    # serializers, so strict JSON rendering stays on.
    'STRICT_JSON': True,
    'COERCE_DECIMAL_TO_STRING': False,
}


# Logging

LOG_LEVEL = os.getenv('ANISOST_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(asctime)s %(levelname)s %(name)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in (
            'Mesh', 'Polynomials', 'Fields', 'Smoothness',
            'Approximation', 'Refinement', 'Experiments',
        )
    },
}


# Experiment defaults

ANISOST = {
    # Worker pool size used when --threads is not given
    'THREADS': int(os.getenv('ANISO_ST_THREADS', os.cpu_count() or 1)),
    'OUTPUT_DIR': os.getenv('ANISOST_OUTPUT_DIR', str(BASE_DIR / 'runs')),
    'N_MAG': int(os.getenv('ANISOST_N_MAG', '12')),
    'N_DIR': int(os.getenv('ANISOST_N_DIR', '0')) or None,
    'SEED': int(os.getenv('ANISOST_SEED', '0')),
    'MAX_ROUNDS': int(os.getenv('ANISOST_MAX_ROUNDS', '30')),
    'MAX_ELEMENTS': int(os.getenv('ANISOST_MAX_ELEMENTS', str(10**6))),
}
