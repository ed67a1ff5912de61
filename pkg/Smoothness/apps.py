from django.apps import AppConfig


class SmoothnessConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'Smoothness'
    verbose_name = 'Moduli of smoothness and Besov seminorms'
