from django.apps import AppConfig


class ColasConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'colas'
    verbose_name = 'Transformadas de colas pesadas'
