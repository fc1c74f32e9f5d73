"""
Django settings for the AD Shor code workbench
"""

import json
import math
import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

# Security
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'change-me-in-production-use-env-var')
DEBUG = os.environ.get('DJANGO_DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = os.environ.get('DJANGO_ALLOWED_HOSTS', 'localhost,127.0.0.1,testserver').split(',')

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.staticfiles',

    # Third party
    'rest_framework',
    'corsheaders',
    'django_celery_beat',

    # Local apps
    'adshor',
]

MIDDLEWARE = [
    'corsheaders.middleware.CorsMiddleware',  # Must be first
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'config.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
            ],
        },
    },
]

# Database - SQLite for verification runs
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# REST Framework
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_AUTHENTICATION_CLASSES': [],  # Public API - no auth
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'UNAUTHENTICATED_USER': None,
}

# CORS - Allow all origins for public API
CORS_ALLOW_ALL_ORIGINS = True
CORS_ALLOW_METHODS = ['GET', 'OPTIONS']
CORS_ALLOW_HEADERS = ['Content-Type']

# Redis backs the cache and the Celery broker when configured; without it
# everything runs in-process.
REDIS_URL = os.environ.get('REDIS_URL')

if REDIS_URL:
    CACHES = {
        'default': {
            'BACKEND': 'django.core.cache.backends.redis.RedisCache',
            'LOCATION': f'{REDIS_URL}/1',
            'TIMEOUT': 3600,  # 1 hour default
        },
    }
else:
    CACHES = {
        'default': {
            'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
            'LOCATION': 'adshor',
            'TIMEOUT': 3600,
        },
    }

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Static files
STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Security settings for production
if not DEBUG:
    SECURE_CONTENT_TYPE_NOSNIFF = True
    SECURE_BROWSER_XSS_FILTER = True
    X_FRAME_OPTIONS = 'DENY'

# Celery Configuration
CELERY_BROKER_URL = f'{REDIS_URL}/0' if REDIS_URL else 'memory://'
CELERY_RESULT_BACKEND = f'{REDIS_URL}/0' if REDIS_URL else 'cache+memory://'
CELERY_TASK_ALWAYS_EAGER = not REDIS_URL
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'
CELERY_BEAT_SCHEDULER = 'django_celery_beat.schedulers:DatabaseScheduler'

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
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
        'adshor': {
            'handlers': ['console'],
            'level': os.environ.get('ADSHOR_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}


def _grid(name, default):
    value = os.environ.get(name)
    return [float(v) for v in json.loads(value)] if value else default


# Workbench configuration
ADSHOR_MAX_QUBITS = int(os.environ.get('ADSHOR_MAX_QUBITS', 20))
ADSHOR_DEFAULT_G = float(os.environ.get('ADSHOR_DEFAULT_G', -1.0))
ADSHOR_STRUCTURAL_TOL = 1e-12
ADSHOR_ORTHOGONALITY_TOL = float(os.environ.get('ADSHOR_ORTHOGONALITY_TOL', 1e-10))
ADSHOR_TRUNCATION_TOL = float(os.environ.get('ADSHOR_TRUNCATION_TOL', 1e-10))
ADSHOR_GAMMA_GRID = _grid('ADSHOR_GAMMA_GRID', [1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
ADSHOR_FIT_GAMMA_GRID = _grid('ADSHOR_FIT_GAMMA_GRID', [1e-2, 3e-3, 1e-3])
ADSHOR_CC_GDT_GRID = [0.1, 0.7, 1.3, 2.9, math.pi]
ADSHOR_HAAR_SAMPLES = int(os.environ.get('ADSHOR_HAAR_SAMPLES', 20))
ADSHOR_DEFAULT_SEED = int(os.environ.get('ADSHOR_DEFAULT_SEED', 20250101))
ADSHOR_DENSE_MAX_QUBITS = int(os.environ.get('ADSHOR_DENSE_MAX_QUBITS', 10))
ADSHOR_REPORT_CACHE_TTL = 3600  # 1 hour
ADSHOR_RUNS_CACHE_KEY = 'adshor:runs'
