"""Run the Django test suite under plain pytest.

Points Django at the project settings and creates the test databases for
the session, as `manage.py test` would.
"""

import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "phaseguard.settings")
django.setup()

from django.test.utils import (  # noqa: E402
    setup_databases,
    setup_test_environment,
    teardown_databases,
    teardown_test_environment,
)

_old_config = None


def pytest_sessionstart(session):
    global _old_config
    setup_test_environment()
    _old_config = setup_databases(verbosity=0, interactive=False)


def pytest_sessionfinish(session, exitstatus):
    if _old_config is not None:
        teardown_databases(_old_config, verbosity=0)
    teardown_test_environment()
