"""Spectrally accurate quadrature on circles and the weighted unit disk.

Rules
-----
CircleRule
    Periodic trapezoid on [-pi, pi), normalized to compute circle *means*.
    Geometric convergence for integrands analytic in an angular strip.
RadialJacobiRule
    Gauss-Jacobi in the radial variable t = r^2 for the boundary weight
    (1 - t)^alpha, so the weight is folded exactly into the nodes.
DiskRule
    Tensor product of the two.  With dA = pi^-1 dx dy the rule computes
    integral g(z) (1-|z|^2)^alpha dA(z) and integrates 1 (alpha = 0) to 1.
SingularRule
    Polar grid centred at an interior point z0, rays running to the unit
    circle.  Written in (rho, psi) the Cauchy kernel 1/(w - z0) becomes
    exp(-i psi)/rho, which cancels against the polar Jacobian, so
    h(w)/(w - z0) integrates like a smooth function.  The boundary weight
    factors exactly as (1-|w|^2) = (Rmax(psi) - rho)(rho + R2(psi)) along
    each ray, and (Rmax - rho)^alpha is folded into a scaled Jacobi rule.

Refinement is by node doubling everywhere; the reported error estimate is
the difference between the last two refinement levels (no asymptotic
model).  Node batches are summed with numpy's pairwise summation, which is
deterministic for a fixed node layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi


@dataclass(frozen=True)
class QuadratureResult:
    """Value of a refined quadrature together with its refinement history."""

    value: complex
    error_estimate: float
    refinements: int
    converged: bool

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            max(self.refinements, other.refinements),
            self.converged and other.converged,
        )


class UnconvergedWarning(UserWarning):
    pass


# ----------------------------------------------------------------------
# circle
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CircleRule:
    """n-point periodic trapezoid computing the 1/(2 pi) normalized mean."""

    n: int

    def __post_init__(self):
        if self.n < 1 or self.n & (self.n - 1):
            raise ValueError("circle rule size must be a power of two")

    @property
    def nodes(self) -> np.ndarray:
        return -np.pi + 2.0 * np.pi * np.arange(self.n) / self.n

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def mean(self, values: np.ndarray) -> complex:
        return complex(np.sum(values) / self.n)


def integrate_circle(f: Callable[[np.ndarray], np.ndarray], tol: float = 1e-12,
                     start: int = 256, cap: int = 2 ** 20) -> QuadratureResult:
    """Circle mean of f by periodic trapezoid with node doubling.

    f is called with an array of angles and must return the sampled values.
    Doubling reuses previous samples (new samples are the midpoints), so the
    total cost is that of the finest level.  If the cap is reached without
    the relative change dropping below tol the result is returned flagged.
    """
    if tol < 1e-13:
        raise ValueError("tolerance below 1e-13 is not resolvable")
    n = start
    theta = -np.pi + 2.0 * np.pi * np.arange(n) / n
    total = np.sum(f(theta))
    value = total / n
    err = np.inf
    refinements = 0
    while n < cap:
        mid = -np.pi + 2.0 * np.pi * (np.arange(n) + 0.5) / n
        total = total + np.sum(f(mid))
        n *= 2
        refinements += 1
        new = total / n
        err = abs(new - value)
        value = new
        if err <= tol * max(1.0, abs(value)):
            return QuadratureResult(complex(value), float(err), refinements, True)
    return QuadratureResult(complex(value), float(err), refinements, False)


# ----------------------------------------------------------------------
# radial Jacobi and tensor disk rule
# ----------------------------------------------------------------------

@lru_cache(maxsize=128)
def _jacobi01(order: int, alpha: float):
    """Nodes/weights for integral_0^1 g(t) (1-t)^alpha dt, exact to degree 2*order-1."""
    x, w = roots_jacobi(order, alpha, 0.0)
    t = 0.5 * (x + 1.0)
    w = w * 0.5 ** (alpha + 1.0)
    return t, w


@dataclass(frozen=True)
class RadialJacobiRule:
    """Gauss-Jacobi rule in t = r^2 against the weight (1 - t)^alpha."""

    order: int
    alpha: float

    def __post_init__(self):
        if self.alpha <= -1:
            raise ValueError("weight exponent must exceed -1")
        if self.order < 1:
            raise ValueError("order must be positive")

    @property
    def nodes(self) -> np.ndarray:
        return _jacobi01(self.order, self.alpha)[0]

    @property
    def weights(self) -> np.ndarray:
        return _jacobi01(self.order, self.alpha)[1]


@dataclass(frozen=True)
class DiskRule:
    """Tensor rule for integral g(z) (1-|z|^2)^alpha dA(z), dA = pi^-1 dx dy.

    In polar coordinates the normalized integral is
    integral_0^1 (1-t)^alpha [circle mean of g at radius sqrt(t)] dt,
    so the total weight at exponent alpha equals 1/(1+alpha).
    """

    radial: RadialJacobiRule
    angular: CircleRule

    @property
    def alpha(self) -> float:
        return self.radial.alpha

    def nodes(self) -> np.ndarray:
        r = np.sqrt(self.radial.nodes)
        return r[:, None] * np.exp(1j * self.angular.nodes)[None, :]

    def weights(self) -> np.ndarray:
        return np.broadcast_to(
            (self.radial.weights / self.angular.n)[:, None],
            (self.radial.order, self.angular.n),
        )

    def total_weight(self) -> float:
        return float(np.sum(self.radial.weights))

    def apply(self, g: Callable[[np.ndarray], np.ndarray]) -> complex:
        z = self.nodes()
        return complex(np.sum(g(z) * self.weights()))


def disk_rule(alpha: float, radial_order: int = 200, n_angles: int = 512) -> DiskRule:
    return DiskRule(RadialJacobiRule(radial_order, alpha), CircleRule(n_angles))


def integrate_disk(g: Callable[[np.ndarray], np.ndarray], alpha: float,
                   rule: DiskRule | None = None, tol: float = 1e-11,
                   max_refine: int = 5) -> QuadratureResult:
    """Weighted disk integral of a smooth integrand by tensor quadrature.

    Refinement doubles the angular count at each step and the radial order
    at every second step.  Integrands with an interior singularity must go
    through integrate_disk_singular instead.
    """
    if alpha <= -1:
        raise ValueError("weight exponent must exceed -1 (non-integrable weight)")
    if rule is None:
        rule = disk_rule(alpha)
    if abs(rule.alpha - alpha) > 1e-15:
        rule = DiskRule(RadialJacobiRule(rule.radial.order, alpha), rule.angular)
    value = rule.apply(g)
    err = np.inf
    for k in range(max_refine):
        radial = rule.radial.order * (2 if k % 2 == 1 else 1)
        angular = rule.angular.n * 2
        rule = DiskRule(RadialJacobiRule(radial, alpha), CircleRule(angular))
        new = rule.apply(g)
        err = abs(new - value)
        value = new
        if err <= tol * max(1.0, abs(value)):
            return QuadratureResult(value, float(err), k + 1, True)
    return QuadratureResult(value, float(err), max_refine, False)


# ----------------------------------------------------------------------
# polar rule centred at an interior singularity
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SingularRule:
    """Polar nodes centred at z0 with the boundary weight folded per ray.

    For smooth F,
        integral F(w) (1-|w|^2)^alpha dA(w)  ~=  sum(base_weights * rho * F(w)).
    For kernels the exact polar factors should be used instead of forming
    w - z0 by subtraction:
        integral h(w)/(w - z0) (1-..)^alpha dA  ~=  sum(base_weights * conj(eipsi) * h(w)),
    and (conj(z0) - conj(w)) equals -rho * conj(eipsi) exactly on the grid.
    """

    z0: complex
    alpha: float
    n_psi: int
    order: int

    def grids(self):
        z0 = self.z0
        psi = -np.pi + 2.0 * np.pi * np.arange(self.n_psi) / self.n_psi
        eipsi = np.exp(1j * psi)
        b = (np.conj(z0) * eipsi).real
        c = 1.0 - abs(z0) ** 2
        disc = np.sqrt(b * b + c)
        rmax = disc - b            # distance from z0 to the unit circle along the ray
        r2 = disc + b              # (1-|w|^2) = (rmax - rho)(rho + r2) exactly
        s, ws = _jacobi01(self.order, self.alpha)
        rho = rmax[:, None] * s[None, :]
        w = z0 + rho * eipsi[:, None]
        base = (2.0 / self.n_psi) * (rmax ** (1.0 + self.alpha))[:, None] \
            * ws[None, :] * (rho + r2[:, None]) ** self.alpha
        return w, rho, eipsi, base


def _check_interior(z0: complex) -> None:
    if abs(z0) >= 1.0 - 1e-6:
        raise ValueError("singularity too close to the boundary for the polar rule")


def integrate_polar_smooth(F: Callable[[np.ndarray], np.ndarray], z0: complex,
                           alpha: float = 0.0, tol: float = 1e-10,
                           n_psi: int = 128, order: int = 96,
                           max_refine: int = 4) -> QuadratureResult:
    """integral F(w) (1-|w|^2)^alpha dA on the polar-at-z0 grid (F bounded)."""
    _check_interior(z0)

    def level(npsi, m):
        rule = SingularRule(complex(z0), float(alpha), npsi, m)
        w, rho, _, base = rule.grids()
        return complex(np.sum(base * rho * F(w)))

    return _refine_polar(level, n_psi, order, tol, max_refine)


def _refine_polar(level, n_psi, order, tol, max_refine) -> QuadratureResult:
    value = level(n_psi, order)
    err = np.inf
    for k in range(max_refine):
        n_psi *= 2
        if k % 2 == 1:
            order *= 2
        new = level(n_psi, order)
        err = abs(new - value)
        value = new
        if err <= tol * max(1.0, abs(value)):
            return QuadratureResult(value, float(err), k + 1, True)
    return QuadratureResult(value, float(err), max_refine, False)


def integrate_disk_singular(h: Callable[[np.ndarray], np.ndarray], z0: complex,
                            alpha: float = 0.0,
                            smooth: Callable[[np.ndarray], np.ndarray] | None = None,
                            tol: float = 1e-10, n_psi: int = 128, order: int = 96,
                            max_refine: int = 4,
                            disk_kwargs: dict | None = None) -> QuadratureResult:
    """integral [h(w)/(w - z0) + smooth(w)] (1-|w|^2)^alpha dA(w).

    The caller supplies the decomposition: h smooth (the simple-pole
    numerator) and an optional smooth remainder.  The pole factor is
    cancelled analytically on the polar grid, never formed by subtraction,
    so the rule converges spectrally for smooth h.
    """
    _check_interior(z0)

    def level(npsi, m):
        rule = SingularRule(complex(z0), float(alpha), npsi, m)
        w, _, eipsi, base = rule.grids()
        return complex(np.sum(base * np.conj(eipsi)[:, None] * h(w)))

    result = _refine_polar(level, n_psi, order, tol, max_refine)
    if smooth is not None:
        result = result + integrate_disk(smooth, alpha, **(disk_kwargs or {}))
    return result
