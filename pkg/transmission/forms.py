"""
Run configuration validation.

A RunConfig is a JSON document. Each section is checked by its own Django
form; the first failing field is reported as a ConfigError with a dotted
path such as ``sampling.total_photons``. Keys a form does not declare are
rejected.
"""
import json
import math
from pathlib import Path

from django import forms
from django.conf import settings

from .channels import CATALOG
from .codec import MAX_EPSILON, FlipKind
from .exceptions import ConfigError

MODES = ["single", "epr", "channel-info", "sweep"]
CORRECTIONS = ["none", FlipKind.BIT_FLIP.value, FlipKind.BIT_PHASE_FLIP.value, "auto"]
CHANNEL_NAMES = sorted(CATALOG) + ["custom"]


def _number_list(value, label, *, minimum=None, integer=False, allow_null=False):
    if not isinstance(value, list) or not value:
        raise forms.ValidationError(f"{label} must be a nonempty list")
    cleaned = []
    for item in value:
        if item is None and allow_null:
            cleaned.append(None)
            continue
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise forms.ValidationError(f"{label} entries must be numbers, got {item!r}")
        if integer and int(item) != item:
            raise forms.ValidationError(f"{label} entries must be integers, got {item!r}")
        if minimum is not None and item < minimum:
            raise forms.ValidationError(f"{label} entries must be >= {minimum}, got {item!r}")
        cleaned.append(int(item) if integer else float(item))
    return cleaned


class SectionForm(forms.Form):
    """A form over one RunConfig section that refuses undeclared keys."""

    def __init__(self, data, path):
        self.path = path
        if not isinstance(data, dict):
            raise ConfigError(path, "must be an object")
        unknown = sorted(set(data) - set(self.base_fields))
        if unknown:
            raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
        super().__init__(data)

    def validated(self):
        if self.is_valid():
            return self.cleaned_data
        name, errors = next(iter(self.errors.items()))
        field_path = self.path if name == "__all__" else (f"{self.path}.{name}" if self.path else name)
        raise ConfigError(field_path, errors[0])


class EnsembleForm(SectionForm):
    components = forms.JSONField()

    def clean_components(self):
        value = self.cleaned_data["components"]
        if not isinstance(value, list) or not value:
            raise forms.ValidationError("must be a nonempty list of [p, theta] pairs")
        pairs = []
        for pair in value:
            if not isinstance(pair, list) or len(pair) != 2:
                raise forms.ValidationError(f"expected [p, theta], got {pair!r}")
            pairs.append(tuple(_number_list(pair, "component")))
        return pairs


class ChannelForm(SectionForm):
    name = forms.ChoiceField(choices=[(name, name) for name in CHANNEL_NAMES])
    param = forms.FloatField(required=False, min_value=0.0, max_value=1.0)
    schedule = forms.JSONField(required=False)
    nu = forms.FloatField(required=False, min_value=0.0)
    coupling = forms.FloatField(required=False, min_value=0.0)
    t = forms.FloatField(required=False, min_value=0.0)
    path = forms.CharField(required=False)

    def clean_schedule(self):
        value = self.cleaned_data["schedule"]
        if value in (None, []):
            return None
        if not isinstance(value, list):
            raise forms.ValidationError("must be a list of [t, param] pairs")
        points = [tuple(_number_list(point, "schedule point")) for point in value]
        if any(len(point) != 2 for point in points):
            raise forms.ValidationError("schedule points must be [t, param] pairs")
        times = [point[0] for point in points]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise forms.ValidationError("schedule times must be strictly increasing")
        if any(not 0.0 <= point[1] <= 1.0 for point in points):
            raise forms.ValidationError("schedule parameters must lie in [0, 1]")
        return points

    def clean(self):
        cleaned = super().clean()
        name = cleaned.get("name")
        if name == "custom":
            if not cleaned.get("path"):
                self.add_error("path", "custom channels need a path")
        elif name == "rtn":
            for key in ("nu", "coupling", "t"):
                if cleaned.get(key) is None:
                    self.add_error(key, "required for rtn")
        elif name and name != "identity":
            if cleaned.get("param") is None and not cleaned.get("schedule"):
                self.add_error("param", "required unless a schedule is given")
        if cleaned.get("schedule") and name in ("custom", "rtn", "identity"):
            self.add_error("schedule", f"channel {name!r} takes no parameter schedule")
        return cleaned


class BasesForm(SectionForm):
    epsilon = forms.FloatField()
    axis = forms.FloatField(required=False)
    extended = forms.BooleanField(required=False)

    def clean_epsilon(self):
        epsilon = self.cleaned_data["epsilon"]
        if not 0.0 < epsilon <= MAX_EPSILON:
            raise forms.ValidationError(f"must lie in (0, {MAX_EPSILON}]")
        return epsilon

    def clean_axis(self):
        axis = self.cleaned_data["axis"]
        return math.pi / 2 if axis is None else axis


class SamplingForm(SectionForm):
    total_photons = forms.IntegerField(required=False, min_value=1)
    trials = forms.IntegerField(required=False, min_value=1)
    seed = forms.IntegerField(required=False, min_value=0, max_value=2 ** 64 - 1)
    allocation = forms.JSONField(required=False)
    exact = forms.BooleanField(required=False)

    def clean_allocation(self):
        value = self.cleaned_data["allocation"]
        if value is None:
            return None
        fractions = _number_list(value, "allocation")
        if any(f <= 0 for f in fractions):
            raise forms.ValidationError("fractions must be positive")
        if abs(sum(fractions) - 1.0) > 1e-12:
            raise forms.ValidationError(f"fractions sum to {sum(fractions)!r}, not 1")
        return tuple(fractions)

    def clean(self):
        cleaned = super().clean()
        if cleaned.get("trials") is None:
            cleaned["trials"] = 1
        return cleaned


class SignalForm(SectionForm):
    phi = forms.FloatField(required=False)
    waveform = forms.CharField(required=False)

    def clean(self):
        cleaned = super().clean()
        has_phi = cleaned.get("phi") is not None
        has_waveform = bool(cleaned.get("waveform"))
        if has_phi == has_waveform:
            raise forms.ValidationError("give exactly one of phi or waveform")
        return cleaned


class SweepForm(SectionForm):
    total_photons = forms.JSONField()
    epsilon = forms.JSONField()
    param = forms.JSONField()
    gamma = forms.JSONField(required=False)

    def clean_total_photons(self):
        return _number_list(self.cleaned_data["total_photons"], "total_photons", minimum=1, integer=True)

    def clean_epsilon(self):
        values = _number_list(self.cleaned_data["epsilon"], "epsilon")
        if any(not 0.0 < value <= MAX_EPSILON for value in values):
            raise forms.ValidationError(f"entries must lie in (0, {MAX_EPSILON}]")
        return values

    def clean_param(self):
        return _number_list(self.cleaned_data["param"], "param", minimum=0.0)

    def clean_gamma(self):
        value = self.cleaned_data["gamma"]
        if value is None:
            return [None]
        values = _number_list(value, "gamma", allow_null=True)
        if any(v is not None and v <= 0 for v in values):
            raise forms.ValidationError("entries must be positive (or null for the standard-error rule)")
        return values


class RunConfigForm(SectionForm):
    mode = forms.ChoiceField(choices=[(mode, mode) for mode in MODES])
    ensemble = forms.JSONField(required=False)
    channel = forms.JSONField(required=False)
    channel_r = forms.JSONField(required=False)
    channel_s = forms.JSONField(required=False)
    bases = forms.JSONField(required=False)
    sampling = forms.JSONField(required=False)
    gamma = forms.FloatField(required=False)
    gamma_multiple = forms.FloatField(required=False)
    correction = forms.ChoiceField(required=False, choices=[(c, c) for c in CORRECTIONS])
    signal = forms.JSONField(required=False)
    sweep = forms.JSONField(required=False)
    output_dir = forms.CharField(required=False)

    def clean_gamma(self):
        gamma = self.cleaned_data["gamma"]
        if gamma is not None and gamma <= 0:
            raise forms.ValidationError("must be positive")
        return gamma

    def clean_gamma_multiple(self):
        multiple = self.cleaned_data["gamma_multiple"]
        if multiple is None:
            return 3.0
        if multiple <= 0:
            raise forms.ValidationError("must be positive")
        return multiple


# sections each mode needs
REQUIRED_SECTIONS = {
    "single": ("ensemble", "channel", "bases", "sampling", "signal"),
    "epr": ("ensemble", "bases", "sampling", "signal"),
    "channel-info": (),
    "sweep": ("ensemble", "channel", "bases", "sampling", "signal", "sweep"),
}

SECTION_FORMS = {
    "ensemble": EnsembleForm,
    "channel": ChannelForm,
    "channel_r": ChannelForm,
    "channel_s": ChannelForm,
    "bases": BasesForm,
    "sampling": SamplingForm,
    "signal": SignalForm,
    "sweep": SweepForm,
}


def validate_config(data):
    """Validate a parsed RunConfig and return it with every section cleaned."""
    top = RunConfigForm(data, "").validated()
    mode = top["mode"]
    if mode == "channel-info" and data.get("channel") is None:
        if data.get("channel_r") is None or data.get("channel_s") is None:
            raise ConfigError("channel", "required in channel-info mode unless channel_r and channel_s are given")
    for section in ("channel_r", "channel_s"):
        if data.get(section) is not None and mode not in ("epr", "channel-info"):
            raise ConfigError(section, f"only used in epr and channel-info modes, not {mode}")
    for section in REQUIRED_SECTIONS[mode]:
        if data.get(section) is None:
            raise ConfigError(section, f"required in {mode} mode")
    if mode == "epr" and data.get("channel") is None:
        for section in ("channel_r", "channel_s"):
            if data.get(section) is None:
                raise ConfigError(section, "required in epr mode unless channel is given for both arms")
    config = dict(top)
    for section, form_class in SECTION_FORMS.items():
        if data.get(section) is not None:
            config[section] = form_class(data[section], section).validated()
    if mode == "sweep" and config["signal"].get("waveform"):
        raise ConfigError("signal.waveform", "sweep mode takes a single phi")
    if config.get("correction") in (None, ""):
        config["correction"] = "none"
    if config["correction"] != "none" and mode in ("single", "epr", "sweep"):
        if not config["bases"]["extended"]:
            raise ConfigError("bases.extended", "flip correction needs the extended bases")
    if mode == "epr" and config["correction"] == "auto":
        raise ConfigError("correction", "EPR runs need an explicit flip kind")
    sampling = config.get("sampling")
    if mode in ("single", "epr") and not sampling["exact"] and sampling["total_photons"] is None:
        raise ConfigError("sampling.total_photons", "required unless exact is true")
    if sampling is not None and sampling.get("seed") is None:
        sampling["seed"] = settings.PHASEGUARD["DEFAULT_SEED"]
    return config


def load_config(path):
    """Read and validate a RunConfig file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path} is not valid JSON: {exc}")
    return data, validate_config(data)
