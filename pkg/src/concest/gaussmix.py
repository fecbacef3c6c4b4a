"""Closed-form oracle and sampler for the symmetric 2-Gaussian mixture.

The mixture is x ~ 1/2 N(-theta, sigma^2 I) + 1/2 N(theta, sigma^2 I) with
concept c(x) = sign(theta.x). For this model the unconstrained concentration
minimizer is a halfspace orthogonal to theta, and its expansion measure has
a closed form through the Gaussian isoperimetric equality
Phi(Phi^-1(measure) + epsilon/sigma), evaluated per mixture component.
Normal CDF/quantile come from scipy.special (ndtr/ndtri, Cephes rational
approximations, ~1e-15 absolute accuracy).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit, ndtr, ndtri

from .dataset import Dataset, make_dataset
from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class GaussMixModel:
    theta: np.ndarray
    sigma: float

    def __post_init__(self):
        if np.linalg.norm(self.theta) == 0:
            raise DomainError("theta must be nonzero")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    @property
    def dim(self):
        return self.theta.shape[0]

    @property
    def theta_norm(self):
        return float(np.linalg.norm(self.theta))


class HalfspaceSign(Enum):
    MINUS = "minus"  # {x : theta.x + b * |theta| <= 0}
    PLUS = "plus"  # {x : theta.x - b * |theta| >= 0}


@dataclass(frozen=True)
class HalfspaceSpec:
    sign: HalfspaceSign
    offset: float  # the parameter b


def sample(model: GaussMixModel, m: int, seed: int, soft_mode: str = "onehot") -> Dataset:
    """Draw m labeled points; deterministic for a given seed (Philox stream).

    soft_mode 'onehot' emits noise-free soft labels matching the concept;
    'posterior' emits the component posterior sigmoid(2 theta.x / sigma^2) as
    a principled synthetic label distribution, for exercising gamma > 0.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    rng = np.random.Generator(np.random.Philox(seed))
    signs = rng.integers(0, 2, size=m) * 2 - 1
    x = signs[:, None] * model.theta[None, :] + model.sigma * rng.standard_normal((m, model.dim))
    proj = x @ model.theta
    labels = (proj > 0).astype(np.int64)
    if soft_mode == "onehot":
        soft = np.zeros((m, 2))
        soft[np.arange(m), labels] = 1.0
    elif soft_mode == "posterior":
        p_plus = expit(2.0 * proj / model.sigma ** 2)
        soft = np.column_stack([1.0 - p_plus, p_plus])
    else:
        raise DomainError(f"unknown soft_mode {soft_mode!r}")
    return make_dataset(x, labels, soft=soft, k=2)


def gaussian_expansion(alpha_component: float, epsilon_std: float) -> float:
    """Phi(Phi^-1(alpha) + epsilon), the isoperimetric expansion of a
    halfspace of the given standard-Gaussian measure."""
    if not 0.0 < alpha_component < 1.0:
        raise DomainError(f"component measure must lie in (0,1), got {alpha_component}")
    if epsilon_std < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon_std}")
    return float(ndtr(ndtri(alpha_component) + epsilon_std))


def halfspace_measure(model: GaussMixModel, spec: HalfspaceSpec) -> dict:
    """Mixture and per-component measures of the halfspace.

    Projecting on theta/|theta| turns each component into a 1-D Gaussian
    with mean -|theta| (minus component) or +|theta| and std sigma, so the
    measures are plain 1-D CDF evaluations.
    """
    tn = model.theta_norm
    b = spec.offset
    if spec.sign is HalfspaceSign.MINUS:
        # {proj <= -b} with proj = theta.x / |theta|
        mu_minus = float(ndtr((tn - b) / model.sigma))
        mu_plus = float(ndtr((-b - tn) / model.sigma))
    else:
        # {proj >= b}; mirror image of the minus case
        mu_minus = float(ndtr((-b - tn) / model.sigma))
        mu_plus = float(ndtr((tn - b) / model.sigma))
    return {"mu": 0.5 * (mu_minus + mu_plus), "mu_minus": mu_minus, "mu_plus": mu_plus}


_OFFSET_TOL = 1e-10
_MAX_BISECT = 200


def offset_for_alpha(model: GaussMixModel, alpha: float,
                     sign: HalfspaceSign = HalfspaceSign.MINUS) -> float:
    """Offset b with halfspace mixture measure alpha, by bisection.

    The measure is strictly decreasing in b, so a bracket always exists.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")

    def measure(b):
        return halfspace_measure(model, HalfspaceSpec(sign, b))["mu"]

    lo, hi = -1.0, 1.0
    scale = max(model.theta_norm, model.sigma)
    while measure(lo) < alpha:
        lo -= scale
        scale *= 2
    scale = max(model.theta_norm, model.sigma)
    while measure(hi) > alpha:
        hi += scale
        scale *= 2
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        mu = measure(mid)
        if abs(mu - alpha) <= _OFFSET_TOL:
            return mid
        if mu > alpha:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"bisection for alpha={alpha} did not converge")


def analytic_concentration(model: GaussMixModel, alpha: float, epsilon: float) -> float:
    """Minimum expansion measure over subsets of mixture measure alpha.

    Evaluates the optimal halfspace for both orientations (equal by
    symmetry; the min is taken anyway) with the perturbation budget
    rescaled to standard-deviation units.
    """
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    eps_std = epsilon / model.sigma
    values = []
    for sign in HalfspaceSign:
        b = offset_for_alpha(model, alpha, sign)
        meas = halfspace_measure(model, HalfspaceSpec(sign, b))
        values.append(0.5 * gaussian_expansion(meas["mu_minus"], eps_std)
                      + 0.5 * gaussian_expansion(meas["mu_plus"], eps_std))
    return min(values)


def halfspace_expansion_mask(model: GaussMixModel, spec: HalfspaceSpec,
                             points: np.ndarray, epsilon: float) -> np.ndarray:
    """Membership of points in the l2 epsilon-expansion of the halfspace."""
    proj = points @ model.theta / model.theta_norm
    if spec.sign is HalfspaceSign.MINUS:
        return proj <= -spec.offset + epsilon
    return proj >= spec.offset - epsilon
