from django.apps import AppConfig


class AccountantConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'accountant'
    verbose_name = 'Shuffle-model privacy accountant'
