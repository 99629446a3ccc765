from django.apps import AppConfig


class LifespanConfig(AppConfig):
    name = 'lifespan'
    verbose_name = "Blow-up detection and life-span sweeps"
