"""
Noise channels as Kraus sets.

Kraus elements use the fixed single-qubit layout

    E_k = [[a_k, b_k],
           [c_k, d_k]]

and every parameter sum in noise_params() reads the entries in that order.
The catalog matrices are listed in README.md.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.db import models

from .exceptions import (
    DegenerateChannelError,
    InvalidChannelError,
    NumericalIntegrityError,
    UsageError,
)
from .qmath import (
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityState,
    Operator,
    tensor,
)

logger = logging.getLogger(__name__)

COMPLETENESS_TOLERANCE = 1e-10
CLASS_TOLERANCE = 1e-10
DEGENERATE_TOLERANCE = 1e-12
# Choi eigenvalues below this fraction of the largest are dropped when compressing.
CHOI_CUTOFF = 1e-14


class ChannelClass(models.TextChoices):
    DEPHASING = "dephasing", "Dephasing"
    FLIP = "flip", "Flip"
    GENERAL = "general", "General"


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """An ordered Kraus set satisfying sum_k E_k^dagger E_k = I.

    Exactly-zero operators are dropped on construction. Sets that fail the
    completeness check cannot be built.
    """

    name: str
    operators: tuple

    def __post_init__(self):
        operators = tuple(
            op if isinstance(op, Operator) else Operator(op) for op in self.operators
        )
        operators = tuple(op for op in operators if np.any(op.entries != 0)) or operators[:1]
        if not operators:
            raise UsageError(f"channel {self.name!r} has no Kraus operators")
        dims = {op.dim for op in operators}
        if len(dims) != 1:
            raise UsageError(f"channel {self.name!r} mixes operator dimensions {sorted(dims)}")
        object.__setattr__(self, "operators", operators)
        if len(operators) > self.dim ** 2:
            raise UsageError(
                f"channel {self.name!r} has {len(operators)} operators; at most {self.dim ** 2} allowed"
            )
        residual = self.completeness_residual()
        if residual > COMPLETENESS_TOLERANCE:
            raise InvalidChannelError(
                f"channel {self.name!r} violates completeness (residual {residual:.3e})"
            )

    @property
    def dim(self):
        return self.operators[0].dim

    def stack(self):
        """Operators as a (k, dim, dim) array."""
        return np.stack([op.entries for op in self.operators])

    def completeness_residual(self):
        ops = self.stack()
        total = np.einsum("kji,kjl->il", ops.conj(), ops)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class NoiseParams:
    """The eight Kraus-sum parameters of a single-qubit channel plus chi."""

    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    b2: float
    c1: float
    c2: float
    chi1: float
    chi2: float
    chi: float

    def as_dict(self):
        return {
            "A1": self.a1, "A2": self.a2, "A3": self.a3, "A4": self.a4,
            "B1": self.b1, "B2": self.b2, "C1": self.c1, "C2": self.c2,
            "chi1": self.chi1, "chi2": self.chi2, "chi": self.chi,
        }


def _check_probability(value, label):
    if not 0.0 <= value <= 1.0:
        raise UsageError(f"{label} must lie in [0, 1], got {value!r}")


def make_identity():
    return KrausChannel("identity", (IDENTITY_2,))


def make_phase_damping(lam):
    _check_probability(lam, "lambda")
    return KrausChannel(
        f"phase_damping({lam:g})",
        (
            Operator([[1, 0], [0, math.sqrt(1 - lam)]]),
            Operator([[0, 0], [0, math.sqrt(lam)]]),
        ),
    )


def _pauli_mixture(name, p, pauli):
    _check_probability(p, "p")
    return KrausChannel(
        f"{name}({p:g})",
        (
            Operator(math.sqrt(1 - p) * IDENTITY_2.entries),
            Operator(math.sqrt(p) * pauli.entries),
        ),
    )


def make_phase_flip(p):
    return _pauli_mixture("phase_flip", p, PAULI_Z)


def make_bit_flip(p):
    return _pauli_mixture("bit_flip", p, PAULI_X)


def make_bit_phase_flip(p):
    return _pauli_mixture("bit_phase_flip", p, PAULI_Y)


def make_amplitude_damping(gamma):
    _check_probability(gamma, "gamma")
    return KrausChannel(
        f"amplitude_damping({gamma:g})",
        (
            Operator([[1, 0], [0, math.sqrt(1 - gamma)]]),
            Operator([[0, math.sqrt(gamma)], [0, 0]]),
        ),
    )


def make_depolarizing(p):
    """rho -> (1 - p) rho + p I/2."""
    _check_probability(p, "p")
    weight = math.sqrt(p / 4)
    return KrausChannel(
        f"depolarizing({p:g})",
        (
            Operator(math.sqrt(1 - 3 * p / 4) * IDENTITY_2.entries),
            Operator(weight * PAULI_X.entries),
            Operator(weight * PAULI_Y.entries),
            Operator(weight * PAULI_Z.entries),
        ),
    )


def rtn_decoherence(nu, coupling, t):
    """Coherence factor of a qubit dephased by random telegraph noise.

    The noise switches between +coupling and -coupling as a Poisson process
    with rate nu, starting from its stationary distribution. Returns

        exp(-nu t) [cosh(eta t) + (nu/eta) sinh(eta t)],  eta = sqrt(nu^2 - coupling^2)

    continued to cos/sin when coupling > nu. Written in decaying exponentials
    so that large nu*t does not overflow.
    """
    for value, label in ((nu, "nu"), (coupling, "coupling"), (t, "t")):
        if value < 0:
            raise UsageError(f"{label} must be nonnegative, got {value!r}")
    if t == 0:
        return 1.0
    disc = nu * nu - coupling * coupling
    if disc > 0:
        eta = math.sqrt(disc)
        value = 0.5 * (
            (1 + nu / eta) * math.exp(-(nu - eta) * t)
            + (1 - nu / eta) * math.exp(-(nu + eta) * t)
        )
    elif disc < 0:
        delta = math.sqrt(-disc)
        value = math.exp(-nu * t) * (math.cos(delta * t) + nu / delta * math.sin(delta * t))
    else:
        value = math.exp(-nu * t) * (1 + nu * t)
    if not math.isfinite(value) or abs(value) > 1 + 1e-12:
        raise NumericalIntegrityError(
            f"telegraph decoherence factor {value!r} outside [-1, 1] "
            f"(nu={nu}, coupling={coupling}, t={t})"
        )
    return max(-1.0, min(1.0, value))


def make_rtn(nu, coupling, t):
    """Pure dephasing from random telegraph noise.

    For a nonnegative coherence factor g this is phase damping with
    lambda = 1 - g^2. In the oscillatory regime g can go negative, which
    phase damping cannot express; the channel is then the random-Z mixture
    that multiplies coherences by g.
    """
    g = rtn_decoherence(nu, coupling, t)
    name = f"rtn(nu={nu:g}, coupling={coupling:g}, t={t:g})"
    if g >= 0:
        damping = make_phase_damping(1.0 - g * g)
        return KrausChannel(name, damping.operators)
    logger.warning("%s has negative coherence factor %.6g; using signed Z mixture", name, g)
    p = (1 - g) / 2
    return KrausChannel(
        name,
        (
            Operator(math.sqrt(1 - p) * IDENTITY_2.entries),
            Operator(math.sqrt(p) * PAULI_Z.entries),
        ),
    )


def make_unitary(matrix, name="unitary"):
    return KrausChannel(name, (Operator(matrix),))


def _compress(name, ops):
    """Minimal Kraus set for the same channel, from the Choi matrix."""
    dim = ops.shape[1]
    vectors = ops.reshape(len(ops), dim * dim)
    choi = vectors.T @ vectors.conj()
    eigenvalues, eigenvectors = np.linalg.eigh(choi)
    keep = eigenvalues > CHOI_CUTOFF * max(eigenvalues.max(), 1.0)
    compressed = [
        math.sqrt(value) * eigenvectors[:, index].reshape(dim, dim)
        for index, value in zip(np.flatnonzero(keep), eigenvalues[keep])
    ]
    logger.debug("compressed %s from %d to %d operators", name, len(ops), len(compressed))
    return KrausChannel(name, tuple(compressed))


def compose(first, second):
    """Channel applying `first`, then `second`."""
    if first.dim != second.dim:
        raise UsageError(f"cannot compose dim {first.dim} with dim {second.dim}")
    name = f"{second.name}*{first.name}"
    ops = np.einsum("jab,ibc->jiac", second.stack(), first.stack())
    ops = ops.reshape(-1, first.dim, first.dim)
    if len(ops) > first.dim ** 2:
        return _compress(name, ops)
    return KrausChannel(name, tuple(ops))


def remix(channel, isometry):
    """Same channel, different Kraus decomposition: F_i = sum_k U[i, k] E_k.

    `isometry` is m x k with orthonormal columns (U^dagger U = I).
    """
    matrix = np.asarray(isometry, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[1] != len(channel.operators):
        raise UsageError(
            f"isometry must have {len(channel.operators)} columns, got shape {matrix.shape}"
        )
    if np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[1]))) > 1e-12:
        raise UsageError("remixing matrix is not an isometry")
    ops = np.einsum("ik,kab->iab", matrix, channel.stack())
    return KrausChannel(channel.name, tuple(ops))


def tensor_channel(c1, c2):
    """Product channel, c1 on the first tensor factor."""
    if c1.dim != 2 or c2.dim != 2:
        raise UsageError(f"tensor_channel needs two dim-2 channels, got {c1.dim} and {c2.dim}")
    operators = tuple(tensor(e1, e2) for e1 in c1.operators for e2 in c2.operators)
    # Two valid single-qubit sets have at most 4 operators each.
    assert len(operators) <= 16
    return KrausChannel(f"{c1.name}(x){c2.name}", operators)


def apply(channel, rho):
    """sum_k E_k rho E_k^dagger."""
    if channel.dim != rho.dim:
        raise UsageError(f"channel dim {channel.dim} does not match state dim {rho.dim}")
    ops = channel.stack()
    evolved = np.einsum("kij,jl,kml->im", ops, rho.entries, ops.conj())
    return DensityState(Operator(evolved))


def noise_params(channel):
    """Eight parameter sums and the suppression factor chi = (B1 - B2)/(B1 + B2)."""
    if channel.dim != 2:
        raise UsageError(f"noise_params needs a dim-2 channel, got dim {channel.dim}")
    ops = channel.stack()
    a, b, c, d = ops[:, 0, 0], ops[:, 0, 1], ops[:, 1, 0], ops[:, 1, 1]
    ac = np.sum(a.conj() * c)
    bd = np.sum(b.conj() * d)
    ad = np.sum(a.conj() * d)
    bc = np.sum(b.conj() * c)
    b1, b2 = float(ad.real), float(bc.real)
    chi1, chi2 = b1 - b2, b1 + b2
    if abs(chi2) < DEGENERATE_TOLERANCE:
        raise DegenerateChannelError(
            f"channel {channel.name!r} has B1 + B2 = {chi2:.3e}; chi is undefined"
        )
    return NoiseParams(
        a1=float(ac.real), a2=float(bd.real), a3=float(ac.imag), a4=float(bd.imag),
        b1=b1, b2=b2, c1=float(ad.imag), c2=float(bc.imag),
        chi1=chi1, chi2=chi2, chi=chi1 / chi2,
    )


def classify(params):
    rest = (params.a1, params.a2, params.a3, params.a4, params.c1, params.c2)
    if any(abs(value) > CLASS_TOLERANCE for value in rest):
        return ChannelClass.GENERAL
    if abs(params.b2) > CLASS_TOLERANCE:
        return ChannelClass.FLIP
    return ChannelClass.DEPHASING


CATALOG = {
    "identity": (make_identity, ()),
    "phase_damping": (make_phase_damping, ("param",)),
    "phase_flip": (make_phase_flip, ("param",)),
    "bit_flip": (make_bit_flip, ("param",)),
    "bit_phase_flip": (make_bit_phase_flip, ("param",)),
    "amplitude_damping": (make_amplitude_damping, ("param",)),
    "depolarizing": (make_depolarizing, ("param",)),
    "rtn": (make_rtn, ("nu", "coupling", "t")),
}


def make_channel(name, **params):
    """Build a catalog channel by name, or load a custom one with name='custom', path=..."""
    if name == "custom":
        return load_channel(params["path"])
    try:
        factory, arg_names = CATALOG[name]
    except KeyError:
        raise UsageError(f"unknown channel {name!r}; choose from {sorted(CATALOG)} or 'custom'")
    missing = [arg for arg in arg_names if params.get(arg) is None]
    if missing:
        raise UsageError(f"channel {name!r} needs {', '.join(missing)}")
    return factory(*(params[arg] for arg in arg_names))


def load_channel(path):
    """Read a custom channel from a text file.

    One Kraus operator per block, one matrix row per line, entries written
    as Python complex literals ("0.5", "-1j", "0.3+0.1j"). Blocks are
    separated by blank lines; '#' starts a comment.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read channel file {path}: {exc.strerror}")
    blocks, rows = [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if rows:
                blocks.append(rows)
                rows = []
            continue
        try:
            rows.append([complex(token) for token in line.split()])
        except ValueError:
            raise UsageError(f"{path}:{line_no}: cannot parse complex entries in {raw!r}")
    if rows:
        blocks.append(rows)
    if not blocks:
        raise UsageError(f"{path}: no Kraus operators found")
    return KrausChannel(path.stem, tuple(Operator(block) for block in blocks))
