from django.apps import AppConfig


class FunctionalShadowsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'functional_shadows'
    verbose_name = 'Functional classical shadows'
