"""
Django settings for the euler_lifespan project.

The project has no web surface and no database; settings carry the
environment-driven knobs (worker count, log level) and the LOGGING setup
shared by the simulation apps and the ``euler`` management command.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / ".env")

SECRET_KEY = os.environ.get("EULER_LIFESPAN_SECRET_KEY", "euler-lifespan-local-only")

DEBUG = os.environ.get("EULER_LIFESPAN_DEBUG", "False").lower() in ("1", "true", "yes")

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "rest_framework",
    'gas',
    'damping',
    'solver',
    'characteristics',
    'lifespan',
    'oracle',
    'runs',
]

# Simulations keep everything in memory and on disk as CSV/JSON.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

REST_FRAMEWORK = {
    # reports null out non-finite floats before rendering
    "STRICT_JSON": True,
    "UNICODE_JSON": False,
}

EULER_LIFESPAN = {
    "WORKERS": int(os.environ.get("EULER_LIFESPAN_WORKERS", os.cpu_count() or 1)),
}

LOG_LEVEL = os.environ.get("EULER_LIFESPAN_LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        app: {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False}
        for app in ("gas", "damping", "solver", "characteristics", "lifespan", "oracle", "runs")
    },
}
