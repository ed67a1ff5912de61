from django.apps import AppConfig


class ApproximationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'Approximation'
