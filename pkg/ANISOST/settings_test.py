"""
Test settings for the ANISOST project.
This file is used specifically for running tests: deterministic single-threaded
execution, small sampling and quiet logging.
"""

from .settings import *
import tempfile

# Disable logging during tests
LOGGING_CONFIG = None

# Test-specific settings
DEBUG = True
SECRET_KEY = 'test-secret-key-for-testing-only'

ANISOST = {
    **ANISOST,
    'THREADS': 1,
    'OUTPUT_DIR': tempfile.gettempdir(),
    'N_MAG': 8,
    'N_DIR': 4,
    'SEED': 0,
    'MAX_ROUNDS': 30,
    'MAX_ELEMENTS': 20000,
}
