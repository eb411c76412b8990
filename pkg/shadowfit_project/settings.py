import os
from pathlib import Path
from decouple import config

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='django-insecure-shadowfit-local-only')
DEBUG = config('DEBUG', default=False, cast=bool)
ALLOWED_HOSTS = []

INSTALLED_APPS = [
    # Third party apps
    'rest_framework',

    # Local apps
    'functional_shadows',
]

# No models and no HTTP surface: the project is driven through manage.py commands
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Reconstruction settings
SHADOWFIT_THREADS = config('SHADOWFIT_THREADS', default=os.cpu_count() or 1, cast=int)
SHADOWFIT_TIE_THRESHOLD = config('SHADOWFIT_TIE_THRESHOLD', default=1e-9, cast=float)
SHADOWFIT_POLE_TOLERANCE = config('SHADOWFIT_POLE_TOLERANCE', default=1e-6, cast=float)
SHADOWFIT_GRID_SIZE = config('SHADOWFIT_GRID_SIZE', default=256, cast=int)
SHADOWFIT_EXACT_DENOMINATOR = config('SHADOWFIT_EXACT_DENOMINATOR', default=2 ** 40, cast=int)
SHADOWFIT_POISSON_RATE = config('SHADOWFIT_POISSON_RATE', default=0.1, cast=float)
SHADOWFIT_DEFAULT_SEED = config('SHADOWFIT_DEFAULT_SEED', default=20240611, cast=int)

# Nelder-Mead settings for the functional fit
SHADOWFIT_RESTARTS = config('SHADOWFIT_RESTARTS', default=8, cast=int)
SHADOWFIT_START_SPREAD = config('SHADOWFIT_START_SPREAD', default=0.5, cast=float)
SHADOWFIT_XATOL = config('SHADOWFIT_XATOL', default=1e-10, cast=float)
SHADOWFIT_FATOL = config('SHADOWFIT_FATOL', default=1e-15, cast=float)
SHADOWFIT_MAXITER = config('SHADOWFIT_MAXITER', default=20000, cast=int)

SHADOWFIT_LOG_LEVEL = config('SHADOWFIT_LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'functional_shadows': {
            'handlers': ['console'],
            'level': SHADOWFIT_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# REST Framework is used for its serializers only (config validation, JSON reports)
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
}

# Celery Configuration
CELERY_BROKER_URL = config('CELERY_BROKER_URL', default='redis://localhost:6379/0')
CELERY_RESULT_BACKEND = config('CELERY_RESULT_BACKEND', default='redis://localhost:6379/0')
CELERY_TASK_ALWAYS_EAGER = config('CELERY_TASK_ALWAYS_EAGER', default=True, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = False
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = TIME_ZONE
