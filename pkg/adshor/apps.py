from django.apps import AppConfig


class AdshorConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'adshor'
    verbose_name = 'AD Shor code workbench'
