from django.apps import AppConfig


class GasConfig(AppConfig):
    name = 'gas'
    verbose_name = "Gamma-law p-system closure"
