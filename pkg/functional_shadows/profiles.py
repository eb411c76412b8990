"""Parametrized angle profiles theta(x), phi(x) and their pure-state hypotheses.

Coefficients act on x rescaled affinely from the model's x_domain onto
[-1, 1], lowest order first. theta and phi may use different families.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from django.db import models
from django.utils.translation import gettext_lazy as _
from numpy.polynomial import polynomial

from .exceptions import DomainError
from .qubit import PureHypothesis, bloch_vectors, canonicalize_angles

DOMAIN_TOL = 1e-9


class Family(models.TextChoices):
    CONSTANT = 'constant', _('Constant')
    AFFINE = 'affine', _('Affine')
    POLYNOMIAL = 'polynomial', _('Polynomial')


_FIXED_DEGREES = {Family.CONSTANT: 0, Family.AFFINE: 1}


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    degree: int

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise DomainError(f'unknown family {self.family!r}') from None
        degree = int(self.degree)
        if family in _FIXED_DEGREES and degree != _FIXED_DEGREES[family]:
            raise DomainError(f'{family.value} family has degree {_FIXED_DEGREES[family]}, not {degree}')
        if degree < 0:
            raise DomainError('polynomial degree must be nonnegative')
        object.__setattr__(self, 'family', family)
        object.__setattr__(self, 'degree', degree)

    @classmethod
    def of(cls, family, degree=None):
        family = Family(family)
        if degree is None:
            if family not in _FIXED_DEGREES:
                raise DomainError('polynomial family needs a degree')
            degree = _FIXED_DEGREES[family]
        return cls(family, degree)

    @classmethod
    def parse(cls, text):
        """Parse 'constant', 'affine' or 'poly:K'."""
        text = str(text).strip().lower()
        if text in ('constant', 'affine'):
            return cls.of(text)
        name, _sep, degree = text.partition(':')
        if name in ('poly', 'polynomial') and degree.isdigit():
            return cls(Family.POLYNOMIAL, int(degree))
        raise DomainError(f'unknown family {text!r}; expected constant, affine or poly:K')

    @property
    def n_params(self):
        return self.degree + 1

    def __str__(self):
        if self.family == Family.POLYNOMIAL:
            return f'poly:{self.degree}'
        return self.family.value


@dataclass(frozen=True)
class ProfileModel:
    theta_params: tuple
    phi_params: tuple
    x_domain: tuple
    theta_family: FamilySpec = field(default_factory=lambda: FamilySpec.of(Family.AFFINE))
    phi_family: FamilySpec = None

    def __post_init__(self):
        if self.phi_family is None:
            object.__setattr__(self, 'phi_family', self.theta_family)
        theta_params = tuple(float(c) for c in self.theta_params)
        phi_params = tuple(float(c) for c in self.phi_params)
        if len(theta_params) != self.theta_family.n_params:
            raise DomainError(
                f'theta needs {self.theta_family.n_params} coefficients for {self.theta_family}, '
                f'got {len(theta_params)}')
        if len(phi_params) != self.phi_family.n_params:
            raise DomainError(
                f'phi needs {self.phi_family.n_params} coefficients for {self.phi_family}, '
                f'got {len(phi_params)}')
        lo, hi = (float(v) for v in self.x_domain)
        if not lo <= hi:
            raise DomainError(f'x_domain lower bound {lo} exceeds upper bound {hi}')
        object.__setattr__(self, 'theta_params', theta_params)
        object.__setattr__(self, 'phi_params', phi_params)
        object.__setattr__(self, 'x_domain', (lo, hi))

    @classmethod
    def constant(cls, theta, phi, x_domain):
        spec = FamilySpec.of(Family.CONSTANT)
        return cls((theta,), (phi,), x_domain, spec, spec)

    @classmethod
    def from_affine(cls, theta_intercept, theta_slope, phi_intercept, phi_slope, x_domain):
        """Affine model from intercepts and slopes in the units of x."""
        lo, hi = (float(v) for v in x_domain)
        mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
        spec = FamilySpec.of(Family.AFFINE)
        return cls(
            (theta_intercept + theta_slope * mid, theta_slope * half),
            (phi_intercept + phi_slope * mid, phi_slope * half),
            (lo, hi), spec, spec,
        )

    @property
    def parameter_count(self):
        return self.theta_family.n_params + self.phi_family.n_params

    def rescale(self, xs):
        """x mapped onto [-1, 1]; raises DomainError outside x_domain."""
        xs = np.asarray(xs, dtype=float)
        lo, hi = self.x_domain
        slack = DOMAIN_TOL * max(1.0, abs(lo), abs(hi))
        outside = (xs < lo - slack) | (xs > hi + slack)
        if np.any(outside):
            raise DomainError(f'x={xs[outside].flat[0]!r} outside domain [{lo}, {hi}]')
        if hi == lo:
            return np.zeros_like(xs)
        return (2.0 * xs - lo - hi) / (hi - lo)

    def raw_angles(self, xs):
        u = self.rescale(xs)
        return polynomial.polyval(u, self.theta_params), polynomial.polyval(u, self.phi_params)

    def angles(self, xs):
        """Canonical theta in [0, pi] and unwrapped phi at each x."""
        return canonicalize_angles(*self.raw_angles(xs))

    def bloch_vectors(self, xs):
        return bloch_vectors(*self.raw_angles(xs))


class TrueProfile(ProfileModel):
    """A ProfileModel designated as the simulation ground truth."""

    @classmethod
    def from_model(cls, model):
        return cls(model.theta_params, model.phi_params, model.x_domain,
                   model.theta_family, model.phi_family)


def evaluate(model, x):
    theta, phi = model.angles(float(x))
    return PureHypothesis(float(theta), float(phi))


def parameter_count(model):
    return model.parameter_count


def pack(model):
    return np.array(model.theta_params + model.phi_params, dtype=float)


def unpack(template, vector):
    """A model shaped like template carrying the coefficients in vector."""
    vector = np.asarray(vector, dtype=float).ravel()
    if vector.size != template.parameter_count:
        raise DomainError(f'expected {template.parameter_count} parameters, got {vector.size}')
    split = template.theta_family.n_params
    return type(template)(
        tuple(vector[:split]), tuple(vector[split:]), template.x_domain,
        template.theta_family, template.phi_family,
    )


def random_profile(rng, theta_family, phi_family=None, x_domain=(-1.0, 1.0)):
    """Random model with theta kept away from the poles at the domain center."""
    phi_family = phi_family or theta_family
    theta_params = [rng.uniform(0.4, math.pi - 0.4)]
    theta_params += list(rng.normal(0.0, 0.2, size=theta_family.degree))
    phi_params = [rng.uniform(0.0, 2.0 * math.pi)]
    phi_params += list(rng.normal(0.0, 1.0, size=phi_family.degree))
    return ProfileModel(tuple(theta_params), tuple(phi_params), x_domain, theta_family, phi_family)


def state_distance(first, second, xs):
    """Largest trace distance between the two models' states over xs."""
    overlap = np.einsum('...i,...i->...', first.bloch_vectors(xs), second.bloch_vectors(xs))
    return float(np.sqrt(np.clip((1.0 - overlap) / 2.0, 0.0, None)).max())


def dense_grid(model, size):
    lo, hi = model.x_domain
    return np.linspace(lo, hi, int(size))
