import math

import numpy as np

from functional_shadows.profiles import ProfileModel, TrueProfile
from functional_shadows.qubit import DensityOperator, PureHypothesis
from functional_shadows.simulator import SimConfig, simulate
from functional_shadows.tables import CountTable

DOMAIN = (800.0, 820.0)


def random_hypotheses(rng, size):
    theta = np.arccos(rng.uniform(-1.0, 1.0, size))
    phi = rng.uniform(0.0, 2.0 * math.pi, size)
    return [PureHypothesis(t, p) for t, p in zip(theta, phi)]


def random_state(rng, mixed=True):
    """Random physical state; uniform in the Bloch ball when mixed."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    radius = rng.uniform() ** (1.0 / 3.0) if mixed else 1.0
    return DensityOperator.from_bloch(radius * direction)


def random_hermitian(rng):
    diagonal = rng.normal(size=2)
    off = complex(rng.normal(), rng.normal())
    return DensityOperator(np.array([[diagonal[0], off], [off.conjugate(), diagonal[1]]]))


def affine_truth(theta=(1.3, 0.2), phi=(math.pi, 1.5), x_domain=DOMAIN):
    return TrueProfile(theta, phi, x_domain)


def constant_model(theta, phi, x_domain=DOMAIN):
    return ProfileModel.constant(theta, phi, x_domain)


def orthogonal_model(model):
    """Profile whose state is orthogonal to model's at every x."""
    theta = (math.pi - model.theta_params[0],) + tuple(-c for c in model.theta_params[1:])
    phi = (model.phi_params[0] + math.pi,) + tuple(model.phi_params[1:])
    return ProfileModel(theta, phi, model.x_domain, model.theta_family, model.phi_family)


def exact_table(profile, xs):
    return simulate(SimConfig(profile, xs, exact=True))


def table_at(x, counts):
    """Single-x table from counts in H, V, D, A, R, L order."""
    return CountTable([x], [counts])


def wrapped_difference(a, b):
    return np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b))))
