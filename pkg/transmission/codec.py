"""
Relative-phase encoding and postselected decoding for a single qubit.

Phase convention: the encoded component is cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>,
so rho_01 = (Upsilon/2) e^{-i phi}. A basis ket (|0> + e^{i alpha}|1>)/sqrt(2) then
detects with probability (1 + Upsilon cos(alpha - phi))/2 on a noiseless link.

The four kets of a BasisSet sit at alpha = axis + eps, axis - eps, axis - eps + pi
and axis + eps + pi. Pairs (1, 4) and (2, 3) are orthogonal. With the contrasts

    D_a = P4 - P1,    D_b = P2 - P3

the composed ratio xi = (D_b - D_a) / (D_b + D_a) equals chi tan(phi) cot(eps) for
any channel whose only nonzero parameters are B1 and B2, so xi / cot(eps) recovers
chi tan(phi) with the ensemble weight and any pure attenuation divided out.
Decoded phases are measured from the offset axis - pi/2.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from django.db import models

from .exceptions import (
    IllConditionedEstimationError,
    OutOfRegimeError,
    UndecodableSampleError,
    UnsupportedEnsembleError,
    UsageError,
)
from .qmath import KET_0, KET_1, DensityState, Ket, Operator, expectation

logger = logging.getLogger(__name__)

REGIME_WARN = 0.05
REGIME_LIMIT = 0.3
MAX_EPSILON = 0.2
WEIGHT_TOLERANCE = 1e-12
UNDECODABLE_TOLERANCE = 1e-12
MIN_EXTENDED_COS = 0.1
MIN_FLIP_CONTRAST = 1e-12

# orthogonal partner of each basis, numbered from 1
PARTNERS = {1: 4, 4: 1, 2: 3, 3: 2}


class FlipKind(models.TextChoices):
    BIT_FLIP = "bit_flip", "Bit flip"
    BIT_PHASE_FLIP = "bit_phase_flip", "Bit-phase flip"


@dataclass(frozen=True)
class Ensemble:
    """Weighted components (p_j, theta_j) of the initial state."""

    components: tuple
    upsilon: float = field(init=False)

    def __post_init__(self):
        components = tuple((float(p), float(theta)) for p, theta in self.components)
        if not components:
            raise UsageError("ensemble needs at least one component")
        for p, theta in components:
            if not 0.0 < p <= 1.0:
                raise UsageError(f"component weight {p!r} outside (0, 1]")
            if not 0.0 < theta < math.pi:
                raise UsageError(f"component angle {theta!r} outside (0, pi)")
        total = sum(p for p, _ in components)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise UsageError(f"component weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "upsilon", sum(p * math.sin(theta) for p, theta in components))

    @classmethod
    def pure(cls, theta):
        return cls(((1.0, theta),))

    @property
    def is_pure(self):
        return len(self.components) == 1


@dataclass(frozen=True, eq=False)
class BasisSet:
    epsilon: float
    axis: float
    kets: tuple
    extended: tuple = ()

    @property
    def all_kets(self):
        return self.kets + self.extended

    @property
    def size(self):
        return len(self.all_kets)


@dataclass(frozen=True, eq=False)
class CountVector:
    """Detections N_l out of n_l attempts per basis.

    Exact-probability mode stores the probabilities themselves as counts
    with unit allocations, which stands in for an infinite photon number.
    """

    counts: np.ndarray
    allocations: np.ndarray
    exact: bool = False

    def __post_init__(self):
        counts = np.array(self.counts, dtype=float)
        allocations = np.array(self.allocations, dtype=float)
        if counts.shape != allocations.shape or counts.ndim != 1:
            raise UsageError("counts and allocations must be 1-d arrays of equal length")
        if np.any(allocations <= 0):
            raise UsageError("every basis needs a positive allocation")
        if np.any(counts < 0) or np.any(counts > allocations):
            raise UsageError("counts must satisfy 0 <= N_l <= n_l")
        if not self.exact and np.any(counts != np.round(counts)):
            raise UsageError("sampled counts must be integers")
        counts.setflags(write=False)
        allocations.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "allocations", allocations)

    @classmethod
    def from_probabilities(cls, probs):
        probs = np.asarray(probs, dtype=float)
        return cls(probs, np.ones_like(probs), exact=True)

    @property
    def total(self):
        return float(self.allocations.sum())

    def frequencies(self):
        return self.counts / self.allocations


@dataclass(frozen=True)
class DecodeResult:
    xi: float
    phi_tilde: float
    chi_used: float = 1.0
    delta_phi: float = None
    # set when the correction factor amplifies the raw estimate (chi_used > 1) or flips its sign
    chi_flag: bool = False

    def with_truth(self, phi, chi):
        """Fill delta_phi around the signal expected after the channel and any correction."""
        return replace(self, delta_phi=self.phi_tilde - chi / self.chi_used * phi)


def check_regime(phi):
    if abs(phi) > REGIME_LIMIT:
        raise OutOfRegimeError(
            f"|phi| = {abs(phi):.4g} rad exceeds {REGIME_LIMIT} rad; small-angle decoding breaks down"
        )
    if abs(phi) > REGIME_WARN:
        logger.warning("|phi| = %.4g rad is above the weak-signal band of %s rad", abs(phi), REGIME_WARN)


def component_ket(theta, phi):
    return Ket([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def encode(ens, phi):
    """Imprint phi as the relative phase of every ensemble component."""
    check_regime(phi)
    matrix = sum(p * component_ket(theta, phi).projector().entries for p, theta in ens.components)
    return DensityState(Operator(matrix))


def _basis_ket(delta, phase):
    return Ket(np.array([np.exp(-0.5j * delta), np.exp(1j * phase) * np.exp(0.5j * delta)]) / math.sqrt(2))


def make_bases(epsilon, axis=math.pi / 2, extended=False):
    """Four pairwise-orthogonal kets symmetric about `axis`, 2*epsilon apart on the Bloch sphere.

    axis = pi/2 gives the canonical set whose |1> amplitudes carry the factor +-i.
    `extended` adds the computational kets |0>, |1> used for flip-noise estimation.
    """
    if not 0.0 < epsilon <= MAX_EPSILON:
        raise UsageError(f"epsilon must lie in (0, {MAX_EPSILON}], got {epsilon!r}")
    kets = (
        _basis_ket(epsilon, axis),
        _basis_ket(-epsilon, axis),
        _basis_ket(-epsilon, axis + math.pi),
        _basis_ket(epsilon, axis + math.pi),
    )
    return BasisSet(
        epsilon=float(epsilon),
        axis=float(axis),
        kets=kets,
        extended=(KET_0, KET_1) if extended else (),
    )


def probabilities(rho, bases):
    return np.array([expectation(rho, ket) for ket in bases.all_kets])


def contrasts(freqs):
    """(D_a, D_b) = (P4 - P1, P2 - P3)."""
    return freqs[3] - freqs[0], freqs[1] - freqs[2]


def _xi_from_frequencies(freqs):
    d_a, d_b = contrasts(freqs)
    denominator = d_b + d_a
    if abs(denominator) < UNDECODABLE_TOLERANCE:
        raise UndecodableSampleError(
            f"decoding contrast vanished ({denominator:.3e}); no coherence left or phi near +-pi/2"
        )
    return float((d_b - d_a) / denominator)


def compose_xi(counts):
    """xi = [(P2 - P3) - (P4 - P1)] / [(P2 - P3) + (P4 - P1)] from the measured frequencies."""
    return _xi_from_frequencies(counts.frequencies())


def _finish(xi, epsilon, chi_hat):
    chi_used = 1.0 if chi_hat is None else float(chi_hat)
    if chi_used == 0:
        raise UsageError("correction factor chi_hat must be nonzero")
    flag = chi_used > 1 or chi_used < 0
    if flag:
        logger.warning("dividing by chi_hat = %.6g amplifies the raw estimate", chi_used)
    phi_tilde = math.atan(xi * math.tan(epsilon) / chi_used)
    return DecodeResult(xi=xi, phi_tilde=phi_tilde, chi_used=chi_used, chi_flag=flag)


def decode(counts, bases, chi_hat=None):
    """phi_tilde = arctan(xi / (cot eps * chi_used)).

    Dividing before the arctan keeps corrected exact-mode decoding exact; for
    chi_used = 1 this is arctan(xi / cot eps), which removes the tan bias.
    """
    return _finish(compose_xi(counts), bases.epsilon, chi_hat)


def decode_with_failed_basis(counts, bases, failed, chi_hat=None):
    """Decode with basis `failed` (1-4) lost, rebuilding it from its orthogonal partner."""
    if failed not in PARTNERS:
        raise UsageError(f"failed basis must be one of 1-4, got {failed!r}")
    freqs = counts.frequencies().copy()
    freqs[failed - 1] = 1.0 - freqs[PARTNERS[failed] - 1]
    return _finish(_xi_from_frequencies(freqs), bases.epsilon, chi_hat)


def calibrate_visibility(counts, bases):
    """Effective coherence weight Upsilon * (B1 + B2) from a zero-signal measurement."""
    d_a, d_b = contrasts(counts.frequencies())
    return float((d_a + d_b) / (2 * math.sin(bases.epsilon)))


def decode_single_pair(counts, bases, pair, visibility):
    """Fallback when one orthogonal pair is unavailable.

    Uses D_a = V sin(eps - phi) for pair (1, 4) or D_b = V sin(eps + phi) for
    pair (2, 3), with V the known effective visibility. Exact only for
    channels with chi = 1.
    """
    if visibility <= 0:
        raise UsageError(f"visibility must be positive, got {visibility!r}")
    d_a, d_b = contrasts(counts.frequencies())
    eps = bases.epsilon
    if tuple(pair) == (1, 4):
        ratio = d_a / visibility
        sign, offset = -1.0, eps
    elif tuple(pair) == (2, 3):
        ratio = d_b / visibility
        sign, offset = 1.0, -eps
    else:
        raise UsageError(f"pair must be (1, 4) or (2, 3), got {pair!r}")
    if abs(ratio) > 1:
        raise UndecodableSampleError(f"single-pair contrast {ratio:.4g} exceeds the visibility")
    phi_tilde = offset + sign * math.asin(ratio)
    return DecodeResult(xi=phi_tilde / math.tan(eps), phi_tilde=phi_tilde)


def pure_cos_theta(ens):
    if not ens.is_pure:
        raise UnsupportedEnsembleError("extended-basis estimation needs a single-component ensemble")
    theta = ens.components[0][1]
    cos_theta = math.cos(theta)
    if abs(cos_theta) < MIN_EXTENDED_COS:
        raise IllConditionedEstimationError(
            f"|cos theta| = {abs(cos_theta):.3g} is below {MIN_EXTENDED_COS}; populations carry no flip signal"
        )
    return cos_theta


def estimate_chi_from_extended(counts, ens):
    """Population contrast (P5 - P6) / cos(theta) from the computational-basis kets.

    For bit flip this is chi itself (1 - 2p); for bit-phase flip it is 1/chi.
    flip_chi() turns it into the factor to divide by.
    """
    if len(counts.counts) < 6:
        raise UsageError("extended-basis counts (bases 5 and 6) are missing")
    cos_theta = pure_cos_theta(ens)
    freqs = counts.frequencies()
    return float((freqs[4] - freqs[5]) / cos_theta)


def flip_chi(contrast, kind):
    """Correction factor for a flip-class channel from its population contrast."""
    kind = FlipKind(kind)
    # a sampled trial can draw equal |0> and |1> counts
    if abs(contrast) < MIN_FLIP_CONTRAST:
        raise IllConditionedEstimationError(f"population contrast vanished; {kind.value} chi cannot be estimated")
    if kind == FlipKind.BIT_FLIP:
        return float(contrast)
    return float(1.0 / contrast)


def infer_flip_kind(counts, bases, ens, contrast):
    """Tell bit flip from bit-phase flip with the summed four-basis contrast.

    D_a + D_b = 2 Upsilon (B1 + B2) cos(phi) sin(eps). B1 + B2 is 1 for bit flip
    and 1 - 2p (the population contrast) for bit-phase flip.
    """
    d_a, d_b = contrasts(counts.frequencies())
    phi_hat = decode(counts, bases).phi_tilde
    chi2_hat = (d_a + d_b) / (2 * ens.upsilon * math.cos(phi_hat) * math.sin(bases.epsilon))
    if abs(chi2_hat - 1.0) <= abs(chi2_hat - contrast):
        return FlipKind.BIT_FLIP
    return FlipKind.BIT_PHASE_FLIP
