"""
Utility functions for reproducible output.
"""
import hashlib
import json
import math

from django.conf import settings


def config_hash(data):
    """
    SHA-256 of a RunConfig in canonical JSON form.

    Args:
        data: the parsed (unvalidated) config document

    Returns:
        Hex digest string; key order and whitespace do not affect it
    """
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def format_number(value):
    """
    Render a number for CSV output with FLOAT_FORMAT significant digits.

    Integers stay integers; NaN is written as an empty field.
    """
    if value is None:
        return ""
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, settings.PHASEGUARD["FLOAT_FORMAT"])


def json_ready(value):
    """Replace NaN and infinities by None so the summary stays strict JSON."""
    if isinstance(value, dict):
        return {key: json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
