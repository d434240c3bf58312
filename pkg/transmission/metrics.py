"""
Finite-photon Monte Carlo, distortion and fault-tolerance figures, sweeps.

Counts are drawn per basis from a Philox generator whose key is
(seed, stream) and whose counter starts at (0, 0, basis, trial). Every
(trial, basis) pair therefore owns its own stream, and the records of a run
do not depend on the order trials are evaluated in.
"""
import itertools
import logging
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .channels import DegenerateChannelError, KrausChannel, apply, noise_params
from .codec import (
    BasisSet,
    CountVector,
    FlipKind,
    decode,
    encode,
    estimate_chi_from_extended,
    flip_chi,
    infer_flip_kind,
    make_bases,
    probabilities,
)
from .epr import (
    CoincidenceBasisSet,
    EprEnsemble,
    coincidence_probabilities,
    decode_epr,
    effective_chi,
    encode_epr,
    epr_channel,
    estimate_chi_from_extended_epr,
    make_coincidence_bases,
)
from .exceptions import (
    IllConditionedEstimationError,
    NoDataError,
    TransmissionError,
    UndecodableSampleError,
    UsageError,
)

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64
ALLOCATION_TOLERANCE = 1e-12
# Threshold floor when the deviations have no spread (exact mode).
MIN_GAMMA = 1e-24


@dataclass(frozen=True)
class SamplingPlan:
    total_photons: int
    trials: int = 1
    seed: int = 0
    allocation: tuple = None

    def __post_init__(self):
        if self.total_photons < 1:
            raise UsageError(f"total_photons must be positive, got {self.total_photons!r}")
        if self.trials < 1:
            raise UsageError(f"trials must be positive, got {self.trials!r}")
        if not 0 <= self.seed < SEED_LIMIT:
            raise UsageError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")
        if self.allocation is not None:
            allocation = tuple(float(f) for f in self.allocation)
            if any(f <= 0 for f in allocation):
                raise UsageError("allocation fractions must be positive")
            if abs(sum(allocation) - 1.0) > ALLOCATION_TOLERANCE:
                raise UsageError(f"allocation fractions sum to {sum(allocation)!r}, not 1")
            object.__setattr__(self, "allocation", allocation)

    def allocations(self, n_bases):
        """Photons per basis, n_l = round(fraction * N)."""
        if self.allocation is None:
            fractions = np.full(n_bases, 1.0 / n_bases)
        elif len(self.allocation) != n_bases:
            raise UsageError(f"allocation has {len(self.allocation)} entries for {n_bases} bases")
        else:
            fractions = np.array(self.allocation)
        allocations = np.rint(fractions * self.total_photons).astype(np.int64)
        if np.any(allocations < 1):
            raise UsageError(f"N = {self.total_photons} leaves a basis without photons")
        return allocations


def basis_generator(seed, trial, basis, stream=0):
    key = np.array([seed, stream], dtype=np.uint64)
    counter = np.array([0, 0, basis, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def sample_counts(probs, plan, trial, stream=0):
    """Binomial detections N_l ~ Bin(n_l, P_l) for one trial."""
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
    allocations = plan.allocations(len(probs))
    counts = [
        basis_generator(plan.seed, trial, basis, stream).binomial(int(n), p)
        for basis, (n, p) in enumerate(zip(allocations, probs))
    ]
    return CountVector(counts, allocations)


@dataclass(frozen=True, eq=False)
class QubitLink:
    """Encoder, channel and decoder for a single qubit."""

    channel: KrausChannel
    ensemble: object
    bases: BasisSet

    def probabilities(self, phi):
        return probabilities(apply(self.channel, encode(self.ensemble, phi)), self.bases)

    @property
    def chi(self):
        try:
            return noise_params(self.channel).chi
        except DegenerateChannelError:
            return math.nan

    def decode(self, counts, chi_hat=None):
        return decode(counts, self.bases, chi_hat)

    def flip_contrast(self, counts):
        return estimate_chi_from_extended(counts, self.ensemble)

    def infer_kind(self, counts, contrast):
        return infer_flip_kind(counts, self.bases, self.ensemble, contrast)


@dataclass(frozen=True, eq=False)
class EprLink:
    """Encoder, per-arm channels and coincidence decoder for an EPR pair."""

    channel_r: KrausChannel
    channel_s: KrausChannel
    ensemble: EprEnsemble
    bases: CoincidenceBasisSet

    def __post_init__(self):
        object.__setattr__(self, "joint", epr_channel(self.channel_r, self.channel_s))

    def probabilities(self, phi):
        return coincidence_probabilities(apply(self.joint, encode_epr(self.ensemble, phi)), self.bases)

    @property
    def chi(self):
        try:
            return effective_chi(self.channel_r, self.channel_s)
        except DegenerateChannelError:
            return math.nan

    def decode(self, counts, chi_hat=None):
        return decode_epr(counts, self.bases, chi_hat)

    def flip_contrast(self, counts):
        return estimate_chi_from_extended_epr(counts, self.ensemble)

    def infer_kind(self, counts, contrast):
        raise UsageError("EPR links need an explicit flip kind ('bit_flip' or 'bit_phase_flip')")


def make_link(channel, ensemble, bases):
    """QubitLink, or EprLink for an EprEnsemble (channel may be one channel or an (r, s) pair)."""
    if isinstance(ensemble, EprEnsemble):
        channel_r, channel_s = channel if isinstance(channel, tuple) else (channel, channel)
        return EprLink(channel_r, channel_s, ensemble, bases)
    return QubitLink(channel, ensemble, bases)


def correction_factor(link, counts, correction):
    """chi_hat to divide by, or None when no correction is requested."""
    if correction in (None, "none"):
        return None
    contrast = link.flip_contrast(counts)
    kind = link.infer_kind(counts, contrast) if correction == "auto" else FlipKind(correction)
    return flip_chi(contrast, kind)


@dataclass(frozen=True, eq=False)
class TrialRecord:
    trial: int
    phi: float
    counts: CountVector
    result: object = None
    delta_phi: float = math.nan
    total_error: float = math.nan

    @property
    def decodable(self):
        return self.result is not None


def _decode_trial(link, trial, counts, phi, chi, correction):
    try:
        chi_hat = correction_factor(link, counts, correction)
        result = link.decode(counts, chi_hat).with_truth(phi, chi)
    except (UndecodableSampleError, IllConditionedEstimationError) as exc:
        logger.debug("trial %d undecodable: %s", trial, exc)
        return TrialRecord(trial=trial, phi=phi, counts=counts)
    return TrialRecord(
        trial=trial,
        phi=phi,
        counts=counts,
        result=result,
        delta_phi=result.delta_phi,
        total_error=result.phi_tilde - phi,
    )


def run_trials(channel, ensemble, phi, bases, plan, *, exact=False, correction=None, stream=0):
    """Encode phi, send it through the channel and decode `plan.trials` sampled count sets.

    Exact mode decodes the analytic probabilities once and returns a single record.
    """
    link = make_link(channel, ensemble, bases)
    return run_link(link, phi, plan, exact=exact, correction=correction, stream=stream)


def run_link(link, phi, plan, *, exact=False, correction=None, stream=0):
    """run_trials() for an already assembled link."""
    probs = link.probabilities(phi)
    chi = link.chi
    if exact:
        batches = [(0, CountVector.from_probabilities(probs))]
    else:
        batches = ((trial, sample_counts(probs, plan, trial, stream)) for trial in range(plan.trials))
    return [_decode_trial(link, trial, counts, phi, chi, correction) for trial, counts in batches]


def _decodable(records):
    return [record for record in records if record.decodable]


def mse(records):
    """Mean squared error between retrieved and transmitted phase over decodable records."""
    valid = _decodable(records)
    if not valid:
        raise NoDataError("no decodable records")
    return float(np.mean([record.total_error ** 2 for record in valid]))


def mse_waveform(retrieved, truth):
    retrieved = np.asarray(retrieved, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if retrieved.shape != truth.shape:
        raise UsageError(f"waveform lengths differ: {retrieved.shape} vs {truth.shape}")
    if retrieved.size == 0:
        raise NoDataError("empty waveform")
    return float(np.mean((retrieved - truth) ** 2))


def fault_tolerance(records, gamma):
    """Share of all trials with delta_phi^2 < gamma; undecodable trials count as failures."""
    if gamma <= 0:
        raise UsageError(f"gamma must be positive, got {gamma!r}")
    if not records:
        return 0.0
    hits = sum(1 for record in records if record.decodable and record.delta_phi ** 2 < gamma)
    return hits / len(records)


def gamma_from_standard_error(records, multiple=3.0):
    """Threshold (multiple * empirical standard deviation of delta_phi)^2."""
    deltas = [record.delta_phi for record in _decodable(records)]
    if not deltas:
        raise NoDataError("no decodable records")
    spread = float(np.std(deltas, ddof=1)) if len(deltas) > 1 else 0.0
    return max((multiple * spread) ** 2, MIN_GAMMA)


def predicted_variance(probs, allocations, epsilon, chi_used=1.0):
    """First-order (delta-method) variance of phi_tilde under binomial counts.

    Implementation-derived cross-check for the empirical variance; it ignores
    the extra noise of an estimated correction factor.
    """
    p = np.asarray(probs, dtype=float)[:4]
    n = np.asarray(allocations, dtype=float)[:4]
    variances = p * (1 - p) / n
    d_a, d_b = p[3] - p[0], p[1] - p[2]
    total = d_a + d_b
    if abs(total) < 1e-12:
        return math.inf
    ratio = (d_b - d_a) / total
    grad_b = 2 * d_a / total ** 2
    grad_a = -2 * d_b / total ** 2
    var_ratio = grad_b ** 2 * (variances[1] + variances[2]) + grad_a ** 2 * (variances[0] + variances[3])
    k = math.tan(epsilon) / chi_used
    slope = k / (1 + (k * ratio) ** 2)
    return float(slope ** 2 * var_ratio)


@dataclass(frozen=True)
class RunSummary:
    d_mse: float
    f_t: float
    gamma: float
    mean_phi_tilde: float
    var_phi_tilde: float
    trials: int
    undecodable: int
    chi: float = math.nan
    predicted_variance: float = math.nan

    def as_dict(self):
        return asdict(self)


def summarize(records, gamma=None, *, gamma_multiple=3.0, chi=math.nan, predicted=math.nan):
    """RunSummary of a record set; gamma defaults to gamma_from_standard_error()."""
    d_mse = mse(records)
    if gamma is None:
        gamma = gamma_from_standard_error(records, gamma_multiple)
    retrieved = np.array([record.result.phi_tilde for record in _decodable(records)])
    return RunSummary(
        d_mse=d_mse,
        f_t=fault_tolerance(records, gamma),
        gamma=float(gamma),
        mean_phi_tilde=float(retrieved.mean()),
        var_phi_tilde=float(retrieved.var(ddof=1)) if len(retrieved) > 1 else 0.0,
        trials=len(records),
        undecodable=len(records) - len(retrieved),
        chi=float(chi),
        predicted_variance=float(predicted),
    )


def _summarize_link(link, records, phi, plan, gamma, gamma_multiple, exact):
    if exact:
        predicted = 0.0
    else:
        chi_used = [record.result.chi_used for record in _decodable(records)] or [1.0]
        predicted = predicted_variance(
            link.probabilities(phi),
            plan.allocations(link.bases.size),
            link.bases.epsilon,
            float(np.mean(chi_used)),
        )
    return summarize(records, gamma, gamma_multiple=gamma_multiple, chi=link.chi, predicted=predicted)


@dataclass(frozen=True)
class SweepGrid:
    total_photons: tuple
    epsilon: tuple
    param: tuple
    # None entries take gamma from the empirical standard error
    gamma: tuple = (None,)

    def __post_init__(self):
        for name in ("total_photons", "epsilon", "param", "gamma"):
            values = tuple(getattr(self, name))
            if not values:
                raise UsageError(f"sweep grid axis {name!r} is empty")
            object.__setattr__(self, name, values)

    def __len__(self):
        return len(self.total_photons) * len(self.epsilon) * len(self.param) * len(self.gamma)


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """A base configuration plus the grid to vary it over.

    `channel_for(param)` returns the channel (or (r, s) pair for EPR) at one
    channel-parameter value.
    """

    grid: SweepGrid
    channel_for: object
    ensemble: object
    phi: float
    plan: SamplingPlan
    axis: float = math.pi / 2
    extended: bool = False
    correction: str = None
    exact: bool = False
    gamma_multiple: float = 3.0


@dataclass(frozen=True)
class SweepRow:
    total_photons: int
    epsilon: float
    param: float
    gamma: float
    summary: RunSummary = None
    error: str = ""


def _bases_for(spec, epsilon):
    if isinstance(spec.ensemble, EprEnsemble):
        return make_coincidence_bases(epsilon, axis=spec.axis, extended=spec.extended)
    return make_bases(epsilon, axis=spec.axis, extended=spec.extended)


def sweep(spec):
    """One SweepRow per grid point, N outermost and gamma innermost.

    Points sharing (N, epsilon, param) reuse one record set; each such
    combination draws from its own stream. A failing point is recorded and
    the sweep moves on.
    """
    grid = spec.grid
    rows = []
    combos = itertools.product(grid.total_photons, grid.epsilon, grid.param)
    for stream, (total_photons, epsilon, param) in enumerate(combos):
        logger.debug("sweep point N=%s epsilon=%s param=%s", total_photons, epsilon, param)
        try:
            plan = replace(spec.plan, total_photons=int(total_photons))
            link = make_link(spec.channel_for(param), spec.ensemble, _bases_for(spec, epsilon))
            records = run_link(
                link, spec.phi, plan, exact=spec.exact, correction=spec.correction, stream=stream
            )
        except TransmissionError as exc:
            logger.warning("sweep point N=%s epsilon=%s param=%s failed: %s", total_photons, epsilon, param, exc)
            rows.extend(
                SweepRow(total_photons, epsilon, param, gamma, error=str(exc)) for gamma in grid.gamma
            )
            continue
        for gamma in grid.gamma:
            try:
                summary = _summarize_link(
                    link, records, spec.phi, plan, gamma, spec.gamma_multiple, spec.exact
                )
            except TransmissionError as exc:
                rows.append(SweepRow(total_photons, epsilon, param, gamma, error=str(exc)))
                continue
            rows.append(SweepRow(total_photons, epsilon, param, summary.gamma, summary=summary))
    return rows
