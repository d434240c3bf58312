"""
Batch execution behind the management commands.

`execute(raw, config, output_dir)` runs one validated RunConfig and writes
its artifacts:

    retrieved.csv   retrieved waveform, header "t,phi" (single / epr)
    samples.csv     per-sample detail (single / epr)
    noise_params.csv  parameter table (channel-info)
    sweep.csv       one row per grid point (sweep)
    summary.json    summary document, always

The three tables end with config_hash and seed columns.

Numeric output is a pure function of the config and the seed. Nothing
time-dependent is written to the files.
"""
import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import classify, make_channel, noise_params
from .codec import REGIME_LIMIT, REGIME_WARN, Ensemble, make_bases
from .epr import EprEnsemble, make_coincidence_bases
from .exceptions import (
    ConfigError,
    DegenerateChannelError,
    NoDataError,
    OutOfRegimeError,
    TransmissionError,
    UsageError,
)
from .metrics import (
    SamplingPlan,
    SweepGrid,
    SweepSpec,
    make_link,
    mse_waveform,
    run_link,
    summarize,
    sweep,
)
from .utils import config_hash, format_number, json_ready

logger = logging.getLogger(__name__)

WAVEFORM_HEADER = "t,phi"
SAMPLE_COLUMNS = ["t", "phi", "phi_tilde", "delta_phi", "total_error", "param", "decodable"]
NOISE_COLUMNS = ["channel", "A1", "A2", "A3", "A4", "B1", "B2", "C1", "C2", "chi1", "chi2", "chi", "class"]
SWEEP_COLUMNS = [
    "total_photons", "epsilon", "param", "gamma", "d_mse", "f_t", "mean_phi_tilde",
    "var_phi_tilde", "trials", "undecodable", "chi", "predicted_variance", "error",
]
# appended to every table so each file identifies its run
RUN_COLUMNS = ["config_hash", "seed"]


@dataclass(frozen=True, eq=False)
class Waveform:
    """Time samples (t, phi) with strictly increasing t and |phi| <= REGIME_LIMIT."""

    t: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        phi = np.array(self.phi, dtype=float)
        if t.ndim != 1 or t.shape != phi.shape:
            raise UsageError("waveform t and phi must be 1-d and of equal length")
        if t.size == 0:
            raise UsageError("waveform has no samples")
        if np.any(np.diff(t) <= 0):
            index = int(np.argmax(np.diff(t) <= 0)) + 1
            raise UsageError(f"waveform t is not strictly increasing at sample {index}")
        too_large = np.abs(phi) > REGIME_LIMIT
        if np.any(too_large):
            index = int(np.argmax(too_large))
            raise OutOfRegimeError(
                f"waveform sample {index} has |phi| = {abs(phi[index]):.4g} rad, above {REGIME_LIMIT} rad"
            )
        weak = int(np.count_nonzero(np.abs(phi) > REGIME_WARN))
        if weak:
            logger.warning("%d waveform samples lie above the weak-signal band of %s rad", weak, REGIME_WARN)
        t.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "phi", phi)

    def __len__(self):
        return self.t.size


def ingest_waveform(path):
    """Read a "t,phi" delimited file into a validated Waveform."""
    path = Path(path)
    data = None
    try:
        with path.open() as handle:
            header = handle.readline().strip().replace(" ", "")
            if header == WAVEFORM_HEADER:
                data = np.loadtxt(handle, delimiter=",", ndmin=2)
    except OSError as exc:
        raise UsageError(f"cannot read waveform {path}: {exc.strerror}")
    except ValueError as exc:
        raise UsageError(f"{path}: cannot parse waveform: {exc}")
    if data is None:
        raise UsageError(f"{path}: expected header {WAVEFORM_HEADER!r}, got {header!r}")
    if data.size == 0:
        raise UsageError(f"{path}: waveform has no samples")
    if data.shape[1] != 2:
        raise UsageError(f"{path}: expected 2 columns, got {data.shape[1]}")
    return Waveform(data[:, 0], data[:, 1])


def _save_columns(path, t, phi):
    np.savetxt(
        path,
        np.column_stack([t, phi]),
        delimiter=",",
        header=WAVEFORM_HEADER,
        comments="",
        fmt="%.17g",
    )


def emit_waveform(waveform, path):
    _save_columns(path, waveform.t, waveform.phi)


def build_channel(spec, param=None):
    """Channel from a cleaned channel section, optionally at a different parameter.

    For rtn the overriding parameter is the evolution time t.
    """
    name = spec["name"]
    if name == "custom":
        return make_channel("custom", path=spec["path"])
    if name == "identity":
        return make_channel("identity")
    if name == "rtn":
        t = spec["t"] if param is None else param
        return make_channel("rtn", nu=spec["nu"], coupling=spec["coupling"], t=t)
    return make_channel(name, param=spec["param"] if param is None else param)


def scheduled_param(spec, t):
    """Channel parameter at time t; the schedule is piecewise linear and held flat outside its span."""
    schedule = spec.get("schedule")
    if not schedule:
        return None
    times, values = zip(*schedule)
    return float(np.interp(t, times, values))


@dataclass
class RunOutcome:
    mode: str
    config_hash: str
    seed: int
    exact: bool
    output_dir: Path
    summary: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    files: list = field(default_factory=list)


def _write_csv(path, columns, rows):
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(value if isinstance(value, str) else format_number(value) for value in row)


def _write_table(outcome, name, columns, rows):
    path = outcome.output_dir / name
    identity = [outcome.config_hash, outcome.seed]
    _write_csv(path, columns + RUN_COLUMNS, [list(row) + identity for row in rows])
    outcome.files.append(path)


def _write_summary(path, document):
    path.write_text(json.dumps(json_ready(document), indent=2, sort_keys=True) + "\n")


def _plan(config):
    sampling = config["sampling"]
    return SamplingPlan(
        total_photons=sampling["total_photons"] or 1,
        trials=1 if sampling["exact"] else sampling["trials"],
        seed=sampling["seed"],
        allocation=sampling["allocation"],
    )


def _signal(config):
    signal = config["signal"]
    if signal.get("waveform"):
        return ingest_waveform(signal["waveform"])
    return Waveform([0.0], [signal["phi"]])


def _arm_specs(config):
    if config["mode"] == "epr" or config.get("channel_r") or config.get("channel_s"):
        return (config.get("channel_r") or config["channel"], config.get("channel_s") or config["channel"])
    return (config["channel"],)


def _link_at(config, ensemble, bases, t):
    channels = tuple(build_channel(spec, scheduled_param(spec, t)) for spec in _arm_specs(config))
    channel = channels if len(channels) == 2 else channels[0]
    return make_link(channel, ensemble, bases)


def _transmit(config, outcome):
    """Single-qubit or EPR transmission of every waveform sample."""
    epr = config["mode"] == "epr"
    ensemble = (EprEnsemble if epr else Ensemble)(config["ensemble"]["components"])
    bases_cfg = config["bases"]
    make = make_coincidence_bases if epr else make_bases
    bases = make(bases_cfg["epsilon"], axis=bases_cfg["axis"], extended=bases_cfg["extended"])
    plan = _plan(config)
    waveform = _signal(config)
    scheduled = any(spec.get("schedule") for spec in _arm_specs(config))
    correction = config["correction"]
    link = None if scheduled else _link_at(config, ensemble, bases, 0.0)

    records, retrieved, sample_rows = [], [], []
    for index, (t, phi) in enumerate(zip(waveform.t, waveform.phi)):
        try:
            sample_link = _link_at(config, ensemble, bases, t) if scheduled else link
            sample_records = run_link(
                sample_link, phi, plan, exact=config["sampling"]["exact"],
                correction=correction, stream=index,
            )
        except TransmissionError as exc:
            exc.sample_index = index
            raise
        decoded = [record for record in sample_records if record.decodable]
        if not decoded:
            exc = NoDataError(f"no decodable trial at sample {index} (t = {t:g})")
            exc.sample_index = index
            raise exc
        phi_tilde = float(np.mean([record.result.phi_tilde for record in decoded]))
        retrieved.append(phi_tilde)
        records.extend(sample_records)
        param = scheduled_param(_arm_specs(config)[-1], t)
        sample_rows.append([
            float(t), float(phi), phi_tilde,
            float(np.mean([record.delta_phi for record in decoded])),
            phi_tilde - float(phi),
            math.nan if param is None else param,
            len(decoded),
        ])

    summary = summarize(
        records, config.get("gamma"), gamma_multiple=config["gamma_multiple"],
        chi=(link or _link_at(config, ensemble, bases, waveform.t[0])).chi,
    )
    document = summary.as_dict()
    document["d_mse_waveform"] = mse_waveform(retrieved, waveform.phi)
    document["samples"] = len(waveform)
    document["upsilon"] = ensemble.upsilon

    output_dir = outcome.output_dir
    _save_columns(output_dir / "retrieved.csv", waveform.t, retrieved)
    outcome.files.append(output_dir / "retrieved.csv")
    _write_table(outcome, "samples.csv", SAMPLE_COLUMNS, sample_rows)
    return document


def noise_table(channel):
    """One NOISE_COLUMNS row for a channel."""
    try:
        params = noise_params(channel)
    except DegenerateChannelError:
        logger.warning("channel %s is degenerate; chi is undefined", channel.name)
        return [channel.name] + [math.nan] * 11 + ["degenerate"]
    values = params.as_dict()
    return [channel.name] + [values[column] for column in NOISE_COLUMNS[1:-1]] + [classify(params).value]


def _info_param(spec):
    """A scheduled channel without a fixed param is reported at the start of its schedule."""
    if spec.get("param") is None and spec.get("schedule"):
        return spec["schedule"][0][1]
    return None


def _channel_info(config, outcome):
    rows = [noise_table(build_channel(spec, _info_param(spec))) for spec in _arm_specs(config)]
    _write_table(outcome, "noise_params.csv", NOISE_COLUMNS, rows)
    outcome.rows = rows
    return {"channels": [dict(zip(NOISE_COLUMNS, row)) for row in rows]}


def _sweep(config, outcome):
    grid_cfg = config["sweep"]
    channel_spec = config["channel"]
    bases_cfg = config["bases"]
    spec = SweepSpec(
        grid=SweepGrid(
            total_photons=grid_cfg["total_photons"],
            epsilon=grid_cfg["epsilon"],
            param=grid_cfg["param"],
            gamma=grid_cfg["gamma"],
        ),
        channel_for=lambda param: build_channel(channel_spec, param),
        ensemble=Ensemble(config["ensemble"]["components"]),
        phi=config["signal"]["phi"],
        plan=_plan(config),
        axis=bases_cfg["axis"],
        extended=bases_cfg["extended"],
        correction=config["correction"],
        exact=config["sampling"]["exact"],
        gamma_multiple=config["gamma_multiple"],
    )
    rows = sweep(spec)
    table = []
    for row in rows:
        numbers = row.summary.as_dict() if row.summary else {}
        table.append(
            [row.total_photons, row.epsilon, row.param, math.nan if row.gamma is None else row.gamma]
            + [numbers.get(column, math.nan) for column in SWEEP_COLUMNS[4:-1]]
            + [row.error]
        )
    _write_table(outcome, "sweep.csv", SWEEP_COLUMNS, table)
    outcome.rows = rows
    return {"points": len(rows), "failed_points": sum(1 for row in rows if row.error)}


HANDLERS = {
    "single": _transmit,
    "epr": _transmit,
    "channel-info": _channel_info,
    "sweep": _sweep,
}


def execute(raw, config, output_dir):
    """Run a validated config and write its artifacts to output_dir."""
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError("output_dir", f"cannot create {output_dir}: {exc.strerror}")
    sampling = config.get("sampling") or {}
    outcome = RunOutcome(
        mode=config["mode"],
        config_hash=config_hash(raw),
        seed=sampling.get("seed"),
        exact=bool(sampling.get("exact")),
        output_dir=output_dir,
    )
    logger.info("running %s config %s (seed %s)", outcome.mode, outcome.config_hash[:12], outcome.seed)
    document = HANDLERS[outcome.mode](config, outcome)
    document.update(mode=outcome.mode, config_hash=outcome.config_hash, seed=outcome.seed, exact=outcome.exact)
    outcome.summary = document
    _write_summary(output_dir / "summary.json", document)
    outcome.files.append(output_dir / "summary.json")
    return outcome
