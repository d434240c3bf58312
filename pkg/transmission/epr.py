"""
EPR-pair extension of the codec.

Two-qubit objects put the reference path r on the first tensor factor and
the signal path s on the second, matching the coincidence kets
|phi_0> (x) |phi_l>. H/V are the computational 0/1 labels.

The reference projection onto |phi_0> = (|0> + |1>)/sqrt(2) scales every
coincidence contrast by (B1 + B2) of the r-path channel, which cancels in
the composed ratio. The decoder slope is therefore chi of the signal path;
with equal channels on both arms this is (B1^2 - B2^2) / (B1 + B2)^2.
"""
import math
from dataclasses import dataclass

import numpy as np

from .channels import noise_params, tensor_channel
from .codec import (
    Ensemble,
    check_regime,
    decode,
    make_bases,
    pure_cos_theta,
)
from .exceptions import IllConditionedEstimationError, UsageError
from .qmath import KET_PLUS, DensityState, Ket, Operator, expectation, tensor


class EprEnsemble(Ensemble):
    """Components over cos(theta/2)|HH> + sin(theta/2)|VV>."""


@dataclass(frozen=True, eq=False)
class CoincidenceBasisSet:
    phi0: Ket
    signal: object
    kets: tuple

    @property
    def epsilon(self):
        return self.signal.epsilon

    @property
    def size(self):
        return len(self.kets)


def make_coincidence_bases(epsilon, axis=math.pi / 2, extended=False):
    signal = make_bases(epsilon, axis=axis, extended=extended)
    return CoincidenceBasisSet(
        phi0=KET_PLUS,
        signal=signal,
        kets=tuple(tensor(KET_PLUS, ket) for ket in signal.all_kets),
    )


def epr_component_ket(theta, phi):
    return Ket([math.cos(theta / 2), 0, 0, np.exp(1j * phi) * math.sin(theta / 2)])


def encode_epr(ens, phi):
    """Imprint phi between the |HH> and |VV> amplitudes of every component."""
    check_regime(phi)
    matrix = sum(p * epr_component_ket(theta, phi).projector().entries for p, theta in ens.components)
    return DensityState(Operator(matrix))


def epr_channel(channel_r, channel_s):
    return tensor_channel(channel_r, channel_s)


def coincidence_probabilities(rho, cbs):
    if rho.dim != 4:
        raise UsageError(f"coincidence measurement needs a dim-4 state, got dim {rho.dim}")
    return np.array([expectation(rho, ket) for ket in cbs.kets])


def decode_epr(counts, cbs, chi_hat=None):
    """Same composition as the single-qubit decoder; the ratio ignores the coincidence acceptance."""
    return decode(counts, cbs.signal, chi_hat)


def effective_chi(channel_r, channel_s):
    """Decoder slope for a pair of arm channels: chi of the signal path."""
    return noise_params(channel_s).chi


def estimate_chi_from_extended_epr(counts, ens):
    """Signal-path population contrast from |phi_0>(x)|0> and |phi_0>(x)|1>.

    The two coincidence rates share the reference acceptance, so the
    contrast is normalized by their sum before dividing by cos(theta).
    """
    if len(counts.counts) < 6:
        raise UsageError("extended coincidence counts (bases 5 and 6) are missing")
    cos_theta = pure_cos_theta(ens)
    freqs = counts.frequencies()
    accepted = freqs[4] + freqs[5]
    if accepted <= 0:
        raise IllConditionedEstimationError("no coincidences in the extended bases")
    return float((freqs[4] - freqs[5]) / accepted / cos_theta)
