"""
Configuración de Django para httool
Transformadas de distribuciones en [0,∞) y diagnósticos de variación regular
"""
from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-httool-solo-linea-de-comandos')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'colas',  # Nuestra aplicación principal
]

# Sin base de datos: los modelos son inmutables y viven en memoria
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'es-es'
TIME_ZONE = 'Europe/Madrid'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Salidas de los escenarios (CSV y summary.txt)
HTTOOL_OUTPUT_DIR = config('HTTOOL_OUTPUT_DIR', default=str(BASE_DIR / 'salidas'))

# Cuadratura adaptativa
HTTOOL_QUAD_REL_TOL = config('HTTOOL_QUAD_REL_TOL', default=1e-10, cast=float)
HTTOOL_QUAD_ABS_TOL = config('HTTOOL_QUAD_ABS_TOL', default=1e-14, cast=float)
HTTOOL_QUAD_MAX_SUBDIVISIONS = config('HTTOOL_QUAD_MAX_SUBDIVISIONS', default=2000, cast=int)

# Veredictos de convergencia de los diagnósticos
HTTOOL_RATIO_REL_TOL = config('HTTOOL_RATIO_REL_TOL', default=0.01, cast=float)
HTTOOL_ZERO_LIMIT_ABS_TOL = config('HTTOOL_ZERO_LIMIT_ABS_TOL', default=1e-3, cast=float)
HTTOOL_MONOTONE_WINDOW = config('HTTOOL_MONOTONE_WINDOW', default=3, cast=int)
HTTOOL_NOISE_FLOOR = config('HTTOOL_NOISE_FLOOR', default=1e-8, cast=float)
HTTOOL_DEHAAN_TOL = config('HTTOOL_DEHAAN_TOL', default=0.02, cast=float)
HTTOOL_RV_INDEX_TOL = config('HTTOOL_RV_INDEX_TOL', default=0.02, cast=float)
HTTOOL_DENSITY_RATIO_BOUND = config('HTTOOL_DENSITY_RATIO_BOUND', default=1e3, cast=float)
HTTOOL_UNDERFLOW = config('HTTOOL_UNDERFLOW', default=1e-300, cast=float)

# Logging
HTTOOL_LOG_LEVEL = config('HTTOOL_LOG_LEVEL', default='WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'colas': {
            'handlers': ['console'],
            'level': HTTOOL_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# REST Framework: solo se usan los serializadores
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
}
