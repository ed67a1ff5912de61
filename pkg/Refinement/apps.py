from django.apps import AppConfig


class RefinementAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'Refinement'
