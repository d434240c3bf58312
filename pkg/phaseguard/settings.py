"""
Django settings for the phaseguard project.

phaseguard simulates analog phase signals sent over noisy qubit and EPR
channels and decoded with pairwise-orthogonal postselected bases. There is
no web surface: the project is driven through management commands
(`run`, `sweep`, `channel_info`) and keeps a small ledger of runs in the
database.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Only used for signing, which the command-line project never does.
SECRET_KEY = os.environ.get("PHASEGUARD_SECRET_KEY", "phaseguard-local-only")

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "transmission",
]


# Database
# SQLite by default; PHASEGUARD_DB_ENGINE=postgresql switches the run ledger
# to PostgreSQL.

if os.environ.get("PHASEGUARD_DB_ENGINE") == "postgresql":
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.postgresql",
            "NAME": os.environ.get("PHASEGUARD_DB_NAME", "phaseguard"),
            "USER": os.environ.get("PHASEGUARD_DB_USER", "postgres"),
            "PASSWORD": os.environ.get("PHASEGUARD_DB_PASSWORD", ""),
            "HOST": os.environ.get("PHASEGUARD_DB_HOST", "localhost"),
            "PORT": os.environ.get("PHASEGUARD_DB_PORT", "5432"),
        }
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": BASE_DIR / "db.sqlite3",
        }
    }


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Default primary key field type

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {message}",
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
        "transmission": {
            "handlers": ["console"],
            "level": os.environ.get("PHASEGUARD_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}


# Simulation defaults used by the management commands

PHASEGUARD = {
    "OUTPUT_DIR": BASE_DIR / "results",
    "DEFAULT_SEED": 20240917,
    "FLOAT_FORMAT": ".17g",
    "RECORD_RUNS": True,
}
