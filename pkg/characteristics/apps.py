from django.apps import AppConfig


class CharacteristicsConfig(AppConfig):
    name = 'characteristics'
    verbose_name = "Characteristic curves and Riccati dynamics"
