from django.apps import AppConfig


class DampingConfig(AppConfig):
    name = 'damping'
    verbose_name = "Space-time damping coefficients"
