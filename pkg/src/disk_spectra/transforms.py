"""Kernels and integral transforms pulled back to the unit disk.

The area kernels all derive from the transferred Cauchy kernel
phi'(w)/(phi(w) - phi(z)).  Near the diagonal that kernel is written as
A(w, z)/(w - z) with A = phi'(w)/D and D the difference quotient
(phi(w) - phi(z))/(w - z); D is evaluated through a fourth-order Taylor
model inside |w - z| < eta (1 - |z|), which removes the catastrophic
cancellation of the raw difference (about 2 |log10|w-z|| digits).

Integrals with a genuine 1/(w - z) pole run on the polar-at-z rule from
the quadrature module, where the pole cancels analytically against the
polar Jacobian; kernels whose pole is suppressed by a vanishing factor
(the tilde and hat variants) fold that factor exactly as exp(-2 i psi).

The principal-value Beurling transform is provided only for the identity
map acting on polynomials in z and conj(z); every general-map use in this
package goes through the removable-singularity kernel difference instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .catalog import UnivalentMap
from .quadrature import (QuadratureResult, SingularRule, _refine_polar,
                         integrate_disk_singular)

DIAGONAL_ETA = 1e-3


# ----------------------------------------------------------------------
# near-diagonal models
# ----------------------------------------------------------------------

def _broadcast_flat(*arrays):
    """Broadcast to a common shape and return flat views plus the shape."""
    arrays = [np.asarray(a, dtype=complex) for a in arrays]
    shape = np.broadcast_shapes(*(a.shape for a in arrays))
    return [np.broadcast_to(a, shape).ravel() for a in arrays], shape


def _reshape(flat: np.ndarray, shape):
    return flat.reshape(shape) if shape else complex(flat[0])


def difference_quotient(map_: UnivalentMap, w, z, eta: float = DIAGONAL_ETA):
    """(phi(w) - phi(z))/(w - z), Taylor model inside the diagonal band.

    The model D = phi' + phi'' h/2 + phi''' h^2/6 + phi'''' h^3/24 (at z,
    h = w - z) keeps full accuracy where the raw difference would cancel.
    """
    (w, z), shape = _broadcast_flat(w, z)
    h = w - z
    near = np.abs(h) < eta * (1.0 - np.abs(z))
    out = np.empty(w.shape, dtype=complex)
    far = ~near
    if np.any(far):
        wf, zf = w[far], z[far]
        out[far] = (map_(wf) - map_(zf)) / (wf - zf)
    if np.any(near):
        zn, hn = z[near], h[near]
        out[near] = (map_.deriv(zn)
                     + hn * (map_.deriv2(zn) / 2.0
                             + hn * (map_.deriv3(zn) / 6.0
                                     + hn * map_.deriv4(zn) / 24.0)))
    return _reshape(out, shape)


def transferred_ratio(map_: UnivalentMap, w, z, eta: float = DIAGONAL_ETA):
    """A(w, z) = phi'(w) (w - z)/(phi(w) - phi(z)), analytic across the diagonal."""
    return map_.deriv(np.asarray(w, dtype=complex)) / difference_quotient(map_, w, z, eta)


@dataclass(frozen=True)
class TransferredKernel:
    """phi'(w)/(phi(w) - phi(z)) with the Taylor model engaged near w = z."""

    map: UnivalentMap
    eta: float = DIAGONAL_ETA

    def ratio(self, w, z):
        return transferred_ratio(self.map, w, z, self.eta)

    def __call__(self, w, z):
        w = np.asarray(w, dtype=complex)
        z = np.asarray(z, dtype=complex)
        return self.ratio(w, z) / (w - z)


def lemma33_bracket(map_: UnivalentMap, zeta, z, eta: float = DIAGONAL_ETA):
    """phi'(zeta)/(phi(zeta) - phi(z)) - 1/(zeta - z), finite across zeta = z.

    Near the diagonal the series c2 + (2 c3 - c2^2) h + (3 c4 - 3 c2 c3 + c2^3) h^2
    (cj the normalized Taylor coefficients of phi at z, h = zeta - z) is used.
    """
    (zeta, z), shape = _broadcast_flat(zeta, z)
    h = zeta - z
    near = np.abs(h) < eta * (1.0 - np.abs(z))
    out = np.empty(zeta.shape, dtype=complex)
    far = ~near
    if np.any(far):
        zf, z0 = zeta[far], z[far]
        out[far] = map_.deriv(zf) / (map_(zf) - map_(z0)) - 1.0 / (zf - z0)
    if np.any(near):
        z0, hn = z[near], h[near]
        d1 = map_.deriv(z0)
        c2 = map_.deriv2(z0) / (2.0 * d1)
        c3 = map_.deriv3(z0) / (6.0 * d1)
        c4 = map_.deriv4(z0) / (24.0 * d1)
        out[near] = c2 + hn * ((2.0 * c3 - c2 ** 2)
                               + hn * (3.0 * c4 - 3.0 * c2 * c3 + c2 ** 3))
    return _reshape(out, shape)


def schwarzian(map_: UnivalentMap, z):
    """S_phi = phi'''/phi' - (3/2)(phi''/phi')^2."""
    z = np.asarray(z, dtype=complex)
    q = map_.deriv2(z) / map_.deriv(z)
    return map_.deriv3(z) / map_.deriv(z) - 1.5 * q * q


@dataclass(frozen=True)
class GrunskyKernel:
    """K(z,w) = phi'(z) phi'(w)/(phi(z)-phi(w))^2 - 1/(z-w)^2.

    The singularity at z = w is removable; on the diagonal K equals
    S_phi(z)/6.  Inside the diagonal band the kernel is evaluated as
    S_phi((z+w)/2)/6, which is exact to O(|z-w|^2) and manifestly
    symmetric, matching the symmetry of the direct formula.
    """

    map: UnivalentMap
    eta: float = DIAGONAL_ETA

    def __call__(self, z, w):
        return grunsky_kernel_eval(self.map, z, w, self.eta)


def grunsky_kernel_eval(map_: UnivalentMap, z, w, eta: float = DIAGONAL_ETA):
    (z, w), shape = _broadcast_flat(z, w)
    h = z - w
    near = np.abs(h) < eta * np.minimum(1.0 - np.abs(z), 1.0 - np.abs(w))
    out = np.empty(z.shape, dtype=complex)
    far = ~near
    if np.any(far):
        zf, wf = z[far], w[far]
        diff = map_(zf) - map_(wf)
        out[far] = map_.deriv(zf) * map_.deriv(wf) / (diff * diff) \
            - 1.0 / ((zf - wf) * (zf - wf))
    if np.any(near):
        out[near] = schwarzian(map_, 0.5 * (z[near] + w[near])) / 6.0
    return _reshape(out, shape)


# ----------------------------------------------------------------------
# area transforms
# ----------------------------------------------------------------------

def cauchy_transform(f: Callable, z: complex, tol: float = 1e-10,
                     n_psi: int = 128, order: int = 96,
                     max_refine: int = 4) -> complex:
    """Cauchy transform integral f(w)/(w - z) dA(w) over the disk."""
    res = integrate_disk_singular(f, complex(z), alpha=0.0, tol=tol,
                                  n_psi=n_psi, order=order, max_refine=max_refine)
    return res.value


def transferred_cauchy(map_: UnivalentMap, g: Callable, z: complex,
                       tol: float = 1e-10, n_psi: int = 128, order: int = 96,
                       max_refine: int = 4, full_result: bool = False):
    """integral phi'(w)/(phi(w) - phi(z)) g(w) dA(w).

    Reduces to the plain Cauchy transform for the identity map.
    """
    z = complex(z)
    res = integrate_disk_singular(
        lambda w: transferred_ratio(map_, w, z) * g(w), z, alpha=0.0,
        tol=tol, n_psi=n_psi, order=order, max_refine=max_refine)
    return res if full_result else res.value


def tilde_transferred(map_: UnivalentMap, f: Callable, z: complex,
                      tol: float = 1e-10, n_psi: int = 128, order: int = 96,
                      max_refine: int = 4, full_result: bool = False):
    """integral kernel(w,z) (conj z - conj w)/(1 - conj(w) z) f(w) dA(w).

    The vanishing factor makes the integrand bounded; on the polar grid
    (conj z - conj w)/(w - z) is exactly -exp(-2 i psi).
    """
    z = complex(z)

    def level(npsi, m):
        rule = SingularRule(z, 0.0, npsi, m)
        w, rho, eipsi, base = rule.grids()
        em = np.conj(eipsi)[:, None]
        A = transferred_ratio(map_, w, z)
        vals = -A * f(w) * em * em * rho / (1.0 - np.conj(w) * z)
        return complex(np.sum(base * vals))

    res = _refine_polar(level, n_psi, order, tol, max_refine)
    return res if full_result else res.value


def hat_transferred(map_: UnivalentMap, f: Callable, z: complex,
                    tol: float = 1e-10, n_psi: int = 128, order: int = 96,
                    max_refine: int = 4, full_result: bool = False):
    """Absolute-kernel variant: integral |kernel (conj z - conj w)/(1 - conj(w) z)| |f| dA.

    Dominates |tilde_transferred| for the same inputs.
    """
    z = complex(z)

    def level(npsi, m):
        rule = SingularRule(z, 0.0, npsi, m)
        w, rho, _, base = rule.grids()
        vals = np.abs(transferred_ratio(map_, w, z)) * np.abs(f(w)) * rho \
            / np.abs(1.0 - np.conj(w) * z)
        return complex(np.sum(base * vals))

    res = _refine_polar(level, n_psi, order, tol, max_refine)
    if full_result:
        return res
    return float(res.value.real)


# ----------------------------------------------------------------------
# skewed Beurling transform, identity map, polynomial symbols
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SkewParameter:
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 2.0:
            raise ValueError("skew parameter must lie in [0, 2]")


class UnsupportedTransform(ValueError):
    pass


def _beurling_monomial(a: int, b: int, z: complex) -> complex:
    """pv integral w^a conj(w)^b/(w - z)^2 dA(w) on the disk (disc exclusion).

    Obtained as d/dz of the Cauchy transform of the monomial, which is a
    polynomial in z and conj(z):
        C[w^a conj(w)^b] = (z^(a-b-1) - z^a conj(z)^(b+1))/(b+1)  for a >= b+1,
                           -z^a conj(z)^(b+1)/(b+1)               for a <= b.
    """
    zb = np.conj(z)
    if a >= b + 1:
        lead = 0.0 if a - b - 1 == 0 else (a - b - 1) * z ** (a - b - 2)
        return (lead - a * z ** (a - 1) * zb ** (b + 1)) / (b + 1)
    if a == 0:
        return 0.0 + 0.0j
    return -a * z ** (a - 1) * zb ** (b + 1) / (b + 1)


def skewed_beurling_apply(map_: UnivalentMap, theta, poly: Mapping, z: complex) -> complex:
    """Skewed Beurling transform at skew theta of a polynomial in z and conj z.

    Only the identity map is supported: for phi(z) = z every skew collapses
    to pv integral f(w)/(w - z)^2 dA(w), which reduces monomial-by-monomial
    to closed forms.  General maps are rejected; the package reaches their
    Beurling difference through the removable-singularity Grunsky kernel.
    """
    theta = theta if isinstance(theta, SkewParameter) else SkewParameter(float(theta))
    if map_.name != "identity":
        raise UnsupportedTransform(
            "principal-value Beurling transform is only supported for the identity map")
    if not isinstance(poly, Mapping):
        raise UnsupportedTransform(
            "symbol must be a mapping {(a, b): coefficient} of monomials z^a conj(z)^b")
    z = complex(z)
    total = 0.0 + 0.0j
    for (a, b), coeff in poly.items():
        if a < 0 or b < 0 or a != int(a) or b != int(b):
            raise UnsupportedTransform("monomial exponents must be nonnegative integers")
        total += coeff * _beurling_monomial(int(a), int(b), z)
    return total


# ----------------------------------------------------------------------
# contraction probe
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionProbe:
    map_name: str
    zeta: complex
    dirichlet_estimate: float
    input_norm_sq: float

    @property
    def ratio(self) -> float:
        return self.dirichlet_estimate / self.input_norm_sq


def contraction_probe(map_: UnivalentMap, zeta: complex, n_r: int = 5,
                      n_theta: int = 8, radius: float = 0.85,
                      fd_step: float = 1e-3) -> ContractionProbe:
    """Sampled Dirichlet integral of the transferred Cauchy image of f_zeta.

    f_zeta(w) = zeta/(1 - conj(w) zeta) normalized in L^2; the Dirichlet
    integral over |z| <= radius is estimated from central finite
    differences.  For the identity map the full integral is provably at
    most the input norm; for other maps the number is a recorded report.
    """
    zeta = complex(zeta)
    norm_sq = float(np.log(1.0 / (1.0 - abs(zeta) ** 2)))
    scale = np.sqrt(norm_sq) if norm_sq > 0 else 1.0

    def f(w):
        return (zeta / (1.0 - np.conj(w) * zeta)) / scale

    def u(p):
        return transferred_cauchy(map_, f, p, tol=1e-8, n_psi=64, order=64,
                                  max_refine=2)

    ts = (np.arange(n_r) + 0.5) / n_r * radius ** 2
    thetas = -np.pi + 2.0 * np.pi * np.arange(n_theta) / n_theta
    total = 0.0
    for t in ts:
        r = np.sqrt(t)
        for th in thetas:
            p = r * np.exp(1j * th)
            ux = (u(p + fd_step) - u(p - fd_step)) / (2 * fd_step)
            uy = (u(p + 1j * fd_step) - u(p - 1j * fd_step)) / (2 * fd_step)
            dz = 0.5 * (ux - 1j * uy)
            dzb = 0.5 * (ux + 1j * uy)
            total += 0.5 * (abs(dz) ** 2 + abs(dzb) ** 2)
    dirichlet = total * radius ** 2 / (n_r * n_theta)
    return ContractionProbe(map_.name, zeta, float(dirichlet), 1.0)
