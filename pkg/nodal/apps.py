from django.apps import AppConfig


class NodalConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'nodal'
    verbose_name = 'Nodal solutions lab'
