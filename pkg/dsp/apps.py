from django.apps import AppConfig


class DspConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dsp'
    verbose_name = 'Librería DSP (DSCM coherente)'
