"""
Dense complex linear algebra for one- and two-qubit objects.

Everything here works on 2x2 or 4x4 complex matrices held in numpy arrays.
Values are immutable once built: arrays are copied on construction and
flagged read-only, so operators can be shared freely between trials.
"""
from dataclasses import InitVar, dataclass

import numpy as np

from .exceptions import NumericalIntegrityError, UsageError


SUPPORTED_DIMS = (2, 4)
NORM_TOLERANCE = 1e-12
DENSITY_TOLERANCE = 1e-12
# Kraus sums leave eigenvalues around -1e-16; anything below this is a bug.
PSD_TOLERANCE = -1e-10
EXPECTATION_IMAG_TOLERANCE = 1e-9


def _frozen_array(values, ndim):
    array = np.array(values, dtype=np.complex128)
    if array.ndim != ndim:
        raise UsageError(f"expected a {ndim}-d array, got shape {array.shape}")
    if array.shape[0] not in SUPPORTED_DIMS:
        raise UsageError(f"unsupported dimension {array.shape[0]}; only 2 and 4 are supported")
    if not np.all(np.isfinite(array)):
        raise NumericalIntegrityError("non-finite entry in matrix")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Operator:
    """A dim x dim complex matrix, dim in {2, 4}, stored row-major."""

    entries: np.ndarray

    def __post_init__(self):
        array = _frozen_array(self.entries, 2)
        if array.shape[0] != array.shape[1]:
            raise UsageError(f"operator must be square, got shape {array.shape}")
        object.__setattr__(self, "entries", array)

    @property
    def dim(self):
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim))

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __repr__(self):
        return f"Operator(dim={self.dim}, entries={self.entries.tolist()})"


@dataclass(frozen=True, eq=False)
class Ket:
    """A normalized state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        array = _frozen_array(self.amplitudes, 1)
        norm = float(np.vdot(array, array).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise UsageError(f"ket is not normalized (squared norm {norm!r})")
        object.__setattr__(self, "amplitudes", array)

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    @classmethod
    def normalized(cls, amplitudes):
        array = np.asarray(amplitudes, dtype=np.complex128)
        return cls(array / np.linalg.norm(array))

    def inner(self, other):
        """<self|other>."""
        if self.dim != other.dim:
            raise UsageError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self):
        return Operator(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f"Ket({self.amplitudes.tolist()})"


@dataclass(frozen=True, eq=False)
class DensityState:
    """A density matrix. Pass check=False to hold an unvalidated matrix for diagnostics."""

    matrix: Operator
    check: InitVar[bool] = True

    def __post_init__(self, check):
        if not isinstance(self.matrix, Operator):
            object.__setattr__(self, "matrix", Operator(self.matrix))
        if check:
            report = validate_density(self)
            if not report.is_valid(DENSITY_TOLERANCE):
                raise NumericalIntegrityError(f"invalid density matrix: {report}")

    @property
    def dim(self):
        return self.matrix.dim

    @property
    def entries(self):
        return self.matrix.entries

    @classmethod
    def from_ket(cls, ket):
        return cls(ket.projector())

    @classmethod
    def maximally_mixed(cls, dim):
        return cls(Operator(np.eye(dim) / dim))


@dataclass(frozen=True)
class DensityReport:
    """Residuals of the density-matrix conditions."""

    hermiticity_residual: float
    trace_residual: float
    min_eigenvalue: float

    def is_valid(self, tolerance=1e-10):
        return (
            self.hermiticity_residual <= tolerance
            and self.trace_residual <= tolerance
            and self.min_eigenvalue >= PSD_TOLERANCE
        )


IDENTITY_2 = Operator.identity(2)
IDENTITY_4 = Operator.identity(4)
PAULI_X = Operator([[0, 1], [1, 0]])
PAULI_Y = Operator([[0, -1j], [1j, 0]])
PAULI_Z = Operator([[1, 0], [0, -1]])
KET_0 = Ket([1, 0])
KET_1 = Ket([0, 1])
KET_PLUS = Ket.normalized([1, 1])


def _require_same_dim(a, b):
    if a.dim != b.dim:
        raise UsageError(f"dimension mismatch: {a.dim} vs {b.dim}")


def mat_mul(a, b):
    """Matrix product a . b."""
    _require_same_dim(a, b)
    return Operator(a.entries @ b.entries)


def dagger(a):
    """Conjugate transpose."""
    return Operator(a.entries.conj().T)


def tensor(a, b):
    """Kronecker product of two single-qubit objects, a on the first factor.

    Accepts two Operators or two Kets.
    """
    if a.dim != 2 or b.dim != 2:
        raise UsageError(f"tensor needs two dim-2 factors, got {a.dim} and {b.dim}")
    if isinstance(a, Ket) and isinstance(b, Ket):
        return Ket(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(np.kron(a.entries, b.entries))
    raise UsageError("tensor factors must both be Operators or both be Kets")


def trace(a):
    return complex(np.trace(a.entries))


def expectation(rho, phi):
    """Tr[rho |phi><phi|], clamped to [0, 1]."""
    _require_same_dim(rho, phi)
    value = complex(np.vdot(phi.amplitudes, rho.entries @ phi.amplitudes))
    if abs(value.imag) > EXPECTATION_IMAG_TOLERANCE:
        raise NumericalIntegrityError(
            f"expectation value {value!r} is not real; rho is not Hermitian"
        )
    return min(1.0, max(0.0, value.real))


def validate_density(rho):
    """Diagnostic residuals for a (possibly invalid) density matrix.

    The minimum eigenvalue comes from numpy's Hermitian eigensolver applied to
    the Hermitian part, for both dim 2 and dim 4.
    """
    matrix = rho.entries
    hermitian_part = (matrix + matrix.conj().T) / 2
    return DensityReport(
        hermiticity_residual=float(np.max(np.abs(matrix - matrix.conj().T))),
        trace_residual=float(abs(np.trace(matrix) - 1.0)),
        min_eigenvalue=float(np.linalg.eigvalsh(hermitian_part)[0]),
    )
