from django.apps import AppConfig


class PolynomialsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'Polynomials'
