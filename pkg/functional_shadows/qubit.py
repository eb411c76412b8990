"""Exact single-qubit linear algebra for polarization states.

States, projectors and distances are computed in closed form: every operator
is a 2x2 Hermitian matrix, written as (t*I + v.sigma)/2 with trace t and
Bloch vector v.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.db import models
from django.utils.translation import gettext_lazy as _

from .exceptions import DomainError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
PHYSICAL_TOL = 1e-12
ANGLE_TOL = 1e-12
TWO_PI = 2.0 * math.pi

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


class Projector(models.TextChoices):
    H = 'H', _('Horizontal')
    V = 'V', _('Vertical')
    D = 'D', _('Diagonal')
    A = 'A', _('Anti-diagonal')
    R = 'R', _('Right circular')
    L = 'L', _('Left circular')

    @property
    def position(self):
        """Column of this projector in count and fidelity arrays."""
        return PROJECTOR_ORDER.index(self)

    @property
    def partner(self):
        """The orthogonal projector measured in the same basis."""
        return _PARTNERS[self]

    @property
    def bloch_vector(self):
        return PROJECTOR_BLOCH[self.position]

    @property
    def ket(self):
        return _KETS[self]


PROJECTOR_ORDER = list(Projector)

# Rows follow PROJECTOR_ORDER: H, V, D, A, R, L
PROJECTOR_BLOCH = np.array([
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
])
PROJECTOR_BLOCH.setflags(write=False)

# The three Stokes bases, each an orthonormal pair
BASES = (
    (Projector.H, Projector.V),
    (Projector.D, Projector.A),
    (Projector.R, Projector.L),
)

_PARTNERS = {}
for _first, _second in BASES:
    _PARTNERS[_first] = _second
    _PARTNERS[_second] = _first

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_KETS = {
    Projector.H: np.array([1.0, 0.0], dtype=complex),
    Projector.V: np.array([0.0, 1.0], dtype=complex),
    Projector.D: np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex),
    Projector.A: np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex),
    Projector.R: np.array([_SQRT_HALF, 1j * _SQRT_HALF], dtype=complex),
    Projector.L: np.array([_SQRT_HALF, -1j * _SQRT_HALF], dtype=complex),
}
for _ket in _KETS.values():
    _ket.setflags(write=False)


def parse_projector(label):
    """Projector for a label, case-insensitively ('h' is H)."""
    try:
        return Projector(str(label).strip().upper())
    except ValueError:
        raise DomainError(f'unknown projector label {label!r}') from None


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A 2x2 Hermitian operator: a state, a snapshot or a difference of them."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (2, 2):
            raise DomainError(f'expected a 2x2 matrix, got shape {entries.shape}')
        if not np.allclose(entries, entries.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
            raise DomainError('operator is not Hermitian')
        entries = (entries + entries.conj().T) / 2.0
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def from_bloch(cls, vector, trace=1.0):
        x, y, z = (float(v) for v in vector)
        return cls((trace * IDENTITY + x * PAULI_X + y * PAULI_Y + z * PAULI_Z) / 2.0)

    @classmethod
    def from_ket(cls, ket):
        ket = np.asarray(ket, dtype=complex)
        return cls(np.outer(ket, ket.conj()))

    @classmethod
    def identity(cls):
        return cls(IDENTITY)

    @classmethod
    def zero(cls):
        return cls(np.zeros((2, 2), dtype=complex))

    @property
    def trace(self):
        return float(self.entries[0, 0].real + self.entries[1, 1].real)

    @property
    def bloch_vector(self):
        off = self.entries[0, 1]
        return np.array([
            2.0 * off.real,
            -2.0 * off.imag,
            self.entries[0, 0].real - self.entries[1, 1].real,
        ])

    @property
    def eigenvalues(self):
        """Ascending eigenvalues from the closed-form 2x2 Hermitian formula."""
        mean = self.trace / 2.0
        radius = float(np.linalg.norm(self.bloch_vector)) / 2.0
        return np.array([mean - radius, mean + radius])

    def is_physical(self, tol=PHYSICAL_TOL):
        return abs(self.trace - 1.0) <= tol and self.eigenvalues[0] >= -tol

    def expectation(self, ket):
        ket = np.asarray(ket, dtype=complex)
        return float(np.real(ket.conj() @ self.entries @ ket))

    def allclose(self, other, atol=1e-12):
        return np.allclose(self.entries, other.entries, rtol=0.0, atol=atol)

    def __add__(self, other):
        return DensityOperator(self.entries + other.entries)

    def __sub__(self, other):
        return DensityOperator(self.entries - other.entries)

    def __mul__(self, scalar):
        return DensityOperator(self.entries * float(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return self.entries @ other.entries

    def __repr__(self):
        return f'DensityOperator({self.entries.tolist()!r})'


def canonicalize_angles(theta, phi):
    """Map theta into [0, pi] by reflection, shifting phi by pi where reflected.

    The reflection (theta, phi) -> (2pi - theta, phi + pi) changes the state
    vector by a global phase only. Works elementwise on arrays.
    """
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    phi = np.asarray(phi, dtype=float)
    reflect = theta > math.pi
    return np.where(reflect, TWO_PI - theta, theta), np.where(reflect, phi + math.pi, phi)


def bloch_vectors(theta, phi):
    """Bloch vectors (..., 3) of the pure states cos(t/2)|H> + e^{i p} sin(t/2)|V>."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    sin_theta = np.sin(theta)
    return np.stack([sin_theta * np.cos(phi), sin_theta * np.sin(phi), np.cos(theta)], axis=-1)


@dataclass(frozen=True)
class PureHypothesis:
    """Bloch angles of a pure polarization state at one x; phi is kept unwrapped."""

    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, 'theta', float(self.theta))
        object.__setattr__(self, 'phi', float(self.phi))

    @classmethod
    def from_bloch_vector(cls, vector):
        x, y, z = (float(v) for v in vector)
        norm = math.sqrt(x * x + y * y + z * z)
        if norm == 0.0:
            raise DomainError('zero Bloch vector has no direction')
        theta = math.acos(max(-1.0, min(1.0, z / norm)))
        return cls(theta, math.atan2(y, x) % TWO_PI)

    def canonical(self):
        theta, phi = canonicalize_angles(self.theta, self.phi)
        return PureHypothesis(float(theta), float(phi))

    def state_vector(self):
        return np.array([
            math.cos(self.theta / 2.0),
            np.exp(1j * math.fmod(self.phi, TWO_PI)) * math.sin(self.theta / 2.0),
        ], dtype=complex)

    def bloch_vector(self):
        return bloch_vectors(self.theta, self.phi)

    def same_state(self, other, atol=1e-12):
        return density_from_hypothesis(self.canonical()).allclose(
            density_from_hypothesis(other.canonical()), atol=atol)


def density_from_hypothesis(h):
    """Rank-one projector |eta><eta| for a hypothesis with theta in [0, pi]."""
    if not -ANGLE_TOL <= h.theta <= math.pi + ANGLE_TOL:
        raise DomainError(f'theta={h.theta!r} outside [0, pi]; canonicalize first')
    return DensityOperator.from_ket(h.state_vector())


def pure_fidelity(h1, h2):
    overlap = np.vdot(h1.state_vector(), h2.state_vector())
    return float(min(1.0, max(0.0, abs(overlap) ** 2)))


def pure_trace_distance(h1, h2):
    return math.sqrt(max(0.0, 1.0 - pure_fidelity(h1, h2)))


def trace_distance(a, b):
    """Half the trace norm of a - b."""
    return float(0.5 * np.abs((a - b).eigenvalues).sum())


def helstrom_is_degenerate(a, b, tol=HERMITIAN_TOL):
    """True when a and b coincide, so every projector is Helstrom-optimal."""
    return bool(np.abs((a - b).eigenvalues).max() <= tol)


def helstrom_projector(a, b):
    """Projector onto the nonnegative eigenspace of a - b.

    Coinciding operators give the zero projector.
    """
    if helstrom_is_degenerate(a, b):
        logger.debug('Helstrom projector requested for identical operators; returning zero')
        return DensityOperator.zero()
    difference = a - b
    low, high = difference.eigenvalues
    if low >= 0.0:
        return DensityOperator.identity()
    if high < 0.0:
        return DensityOperator.zero()
    direction = difference.bloch_vector / np.linalg.norm(difference.bloch_vector)
    return DensityOperator.from_bloch(direction)


def trace_product(a, b):
    """tr[a b] for Hermitian a, b (always real)."""
    return float(np.real(np.trace(a @ b)))
