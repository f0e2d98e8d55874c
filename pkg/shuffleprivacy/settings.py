import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

LOG_DIR = BASE_DIR / 'logs'
LOG_DIR.mkdir(exist_ok=True)

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SHUFFLEPRIVACY_SECRET_KEY', 'django-insecure-shuffle-privacy-accountant')

DEBUG = os.environ.get('SHUFFLEPRIVACY_DEBUG', '0') == '1'

ALLOWED_HOSTS = []


# Application definition
INSTALLED_APPS = [
    'accountant',
    'training',
]

# Nothing is persisted; the test runner still expects a database entry.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

CACHES = {
    'default': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'shuffle-privacy',
    }
}

# Accountant Configuration
ACCOUNTANT_CONFIG = {
    'DEFAULT_TAIL_TOL': 1e-15,
    'WORKERS': 4,
    'CONSISTENCY_TOL': 1e-9,
    'TIE_LOG_TOL': 1e-12,
    'GAUSSIAN_CURVE_TOL': 1e-6,
    'QUAD_EPSABS': 1e-12,
    'MC_CHUNKS': 8,
    'BOOTSTRAP_RESAMPLES': 200,
    'PLUGIN_MAX_N': 200,
    'PLUGIN_MIN_SAMPLES': 100_000,
    'BETA_MIN_SAMPLES': 10_000,
    'CACHE_TIMEOUT': 3600,  # 1 hour
}

# Shuffled SGD defaults (MNIST experiment table)
TRAINING_CONFIG = {
    'ETA': 0.05,
    'EPOCHS': 50,
    'BLOCKS': 100,
    'CLIP': 10.0,
    'SAMPLES': 6000,
    'FEATURES': 2,
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': LOG_DIR / 'shuffleprivacy.log',
            'formatter': 'verbose',
        },
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'accountant': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        'training': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        'django': {
            'handlers': ['file'],
            'level': 'INFO',
            'propagate': True,
        },
    },
}

# Internationalization
LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'
