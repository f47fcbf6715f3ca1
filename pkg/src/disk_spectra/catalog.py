"""Catalog of certified univalent maps of the unit disk.

Every map carries closed-form derivatives up to fourth order (the
near-diagonal kernel models need them), Taylor coefficients at 0, and a
class flag: 'S' for normalized univalent, 'S_b' for the bounded subclass,
'other' when univalence could not be certified.

Catalog members
---------------
identity                 phi(z) = z
halfsquare               phi(z) = z - z^2/2          (phi' = 1 - z)
monomial_perturb(a, n)   phi(z) = z + a z^n,  |a| <= 1/(2n)  so Re phi' > 0
koebe                    phi(z) = z/(1-z)^2           (unbounded, class S)
becker_lacunary(c, K)    log phi' = c * sum_{k=1..K} z^(2^k)

The lacunary family is certified numerically through the Becker criterion
sup (1-|z|^2) |z phi''/phi'| <= 1 with a safety threshold of 0.9; its
boundedness is probed empirically on dyadic circles.  The smooth members
come with closed-form certificates and do not rely on the Becker check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

BECKER_THRESHOLD = 0.9


class BranchContinuationError(RuntimeError):
    """Analytic continuation of a logarithm could not be resolved."""


class CertificationError(ValueError):
    """A catalog map failed its univalence certification."""

    def __init__(self, message: str, sup_value: float):
        super().__init__(message)
        self.sup_value = sup_value


@dataclass(frozen=True)
class BeckerCertificate:
    """Grid supremum of (1-|z|^2)|z phi''/phi'| plus an annulus tail bound.

    The certificate is valid when sup_value + tail_bound stays below the
    safety threshold 0.9; the criterion itself needs only <= 1.
    """

    map_name: str
    sup_value: float
    tail_bound: float
    grid_size: int

    @property
    def valid(self) -> bool:
        return self.sup_value + self.tail_bound <= BECKER_THRESHOLD


@dataclass(frozen=True)
class LogDerivativeTrace:
    """Continuous branch of log phi' on a circle, anchored at log phi'(0) = 0.

    The branch is continued along the radius to r*exp(-i pi) and then around
    the circle; the continuation is internally refined until every step
    moves the argument by less than pi/2, so the returned values are
    independent of the requested grid size (shared angles agree to 1e-12).
    """

    radius: float
    angles: np.ndarray
    values: np.ndarray
    n_internal: int


class UnivalentMap:
    """A univalent map of the disk with derivatives and Taylor data.

    Instances are immutable after construction; evaluations are pure and
    the Taylor/trace caches are idempotent (concurrent first calls may
    duplicate work but produce bit-identical entries).
    """

    def __init__(self, name: str, fn, d1, d2, d3, d4,
                 class_label: str, is_bounded: bool, sup_norm: float,
                 sup_norm_empirical: bool = False,
                 log_deriv: Optional[Callable] = None,
                 taylor_fn: Optional[Callable[[int], np.ndarray]] = None,
                 becker_majorant: Optional[Callable] = None,
                 certificate: Optional[BeckerCertificate] = None,
                 params: Optional[dict] = None):
        self.name = name
        self._fn, self._d1, self._d2, self._d3, self._d4 = fn, d1, d2, d3, d4
        self.class_label = class_label
        self.is_bounded = is_bounded
        self.sup_norm = sup_norm
        self.sup_norm_empirical = sup_norm_empirical
        self._log_deriv = log_deriv
        self._taylor_fn = taylor_fn
        self.becker_majorant = becker_majorant
        self.certificate = certificate
        self.params = dict(params or {})
        self._cache: dict = {}

    # evaluation ------------------------------------------------------
    def __call__(self, z):
        return self._fn(z)

    def eval(self, z):
        return self._fn(z)

    def deriv(self, z):
        return self._d1(z)

    def deriv2(self, z):
        return self._d2(z)

    def deriv3(self, z):
        return self._d3(z)

    def deriv4(self, z):
        return self._d4(z)

    def log_deriv(self, z):
        """Closed-form branch of log phi' when the map carries one."""
        if self._log_deriv is None:
            raise NotImplementedError(f"{self.name} has no closed-form log phi'")
        return self._log_deriv(z)

    @property
    def has_log_deriv(self) -> bool:
        return self._log_deriv is not None

    def taylor(self, n_coeffs: int) -> np.ndarray:
        """Coefficients of z^0 .. z^(n_coeffs-1) of phi at the origin."""
        key = ("taylor", n_coeffs)
        if key not in self._cache:
            self._cache[key] = self._taylor_fn(n_coeffs)
        return self._cache[key]

    def __repr__(self):
        return f"UnivalentMap({self.name!r}, class={self.class_label})"


# ----------------------------------------------------------------------
# catalog construction
# ----------------------------------------------------------------------

def _zeros(z):
    return np.zeros_like(np.asarray(z, dtype=complex))


def _identity() -> UnivalentMap:
    def taylor(n):
        a = np.zeros(n, dtype=complex)
        if n > 1:
            a[1] = 1.0
        return a

    return UnivalentMap(
        "identity",
        fn=lambda z: np.asarray(z, dtype=complex),
        d1=lambda z: np.ones_like(np.asarray(z, dtype=complex)),
        d2=_zeros, d3=_zeros, d4=_zeros,
        class_label="S_b", is_bounded=True, sup_norm=1.0,
        log_deriv=_zeros, taylor_fn=taylor,
        becker_majorant=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
    )


def _halfsquare() -> UnivalentMap:
    # phi' = 1 - z has positive real part on the disk, which certifies
    # univalence; |phi| <= 3/2 with the sup attained at z = -1.
    def taylor(n):
        a = np.zeros(n, dtype=complex)
        if n > 1:
            a[1] = 1.0
        if n > 2:
            a[2] = -0.5
        return a

    return UnivalentMap(
        "halfsquare",
        fn=lambda z: z - 0.5 * np.asarray(z, dtype=complex) ** 2,
        d1=lambda z: 1.0 - np.asarray(z, dtype=complex),
        d2=lambda z: np.full_like(np.asarray(z, dtype=complex), -1.0),
        d3=_zeros, d4=_zeros,
        class_label="S_b", is_bounded=True, sup_norm=1.5,
        log_deriv=lambda z: np.log(1.0 - np.asarray(z, dtype=complex)),
        taylor_fn=taylor,
        # max over the circle |z| = r sits at theta = 0: (1-r^2) r/(1-r) = r(1+r)
        becker_majorant=lambda r: np.asarray(r) * (1.0 + np.asarray(r)),
    )


def _monomial_perturb(a: complex, n: int) -> UnivalentMap:
    a = complex(a)
    n = int(n)
    if n < 2:
        raise ValueError("monomial perturbation needs n >= 2")
    if abs(a) > 1.0 / (2 * n) + 1e-15:
        raise ValueError(f"|a| must be <= 1/(2n) = {1.0/(2*n)} for a certified member")

    def falling(k):
        out = 1.0
        for j in range(k):
            out *= n - j
        return out

    def taylor(m):
        c = np.zeros(m, dtype=complex)
        if m > 1:
            c[1] = 1.0
        if m > n:
            c[n] = a
        return c

    def majorant(r):
        r = np.asarray(r, dtype=float)
        num = (1.0 - r ** 2) * n * abs(a) * r ** (n - 1) * r
        den = 1.0 - n * abs(a) * r ** (n - 1)
        return num / den

    return UnivalentMap(
        f"monomial_perturb(a={a.real:g}{'' if a.imag == 0 else f'{a.imag:+g}j'},n={n})",
        fn=lambda z: z + a * np.asarray(z, dtype=complex) ** n,
        d1=lambda z: 1.0 + n * a * np.asarray(z, dtype=complex) ** (n - 1),
        d2=lambda z: falling(2) * a * np.asarray(z, dtype=complex) ** (n - 2),
        d3=lambda z: falling(3) * a * np.asarray(z, dtype=complex) ** max(n - 3, 0),
        d4=lambda z: falling(4) * a * np.asarray(z, dtype=complex) ** max(n - 4, 0),
        class_label="S_b", is_bounded=True, sup_norm=1.0 + abs(a),
        log_deriv=lambda z: np.log1p(n * a * np.asarray(z, dtype=complex) ** (n - 1)),
        taylor_fn=taylor,
        becker_majorant=majorant,
        params={"a": a, "n": n},
    )


def _koebe() -> UnivalentMap:
    # k^(j)(z) = j! (j + z)/(1 - z)^(j+2); Taylor coefficients a_m = m.
    def taylor(n):
        return np.arange(n, dtype=complex)

    def majorant(r):
        # |z k''/k'| (1-|z|^2) = (1-r^2) |2z(2+z)/(1-z^2)| <= 2r(2+r)
        r = np.asarray(r, dtype=float)
        return 2.0 * r * (2.0 + r)

    return UnivalentMap(
        "koebe",
        fn=lambda z: np.asarray(z, dtype=complex) / (1.0 - np.asarray(z, dtype=complex)) ** 2,
        d1=lambda z: (1.0 + z) / (1.0 - np.asarray(z, dtype=complex)) ** 3,
        d2=lambda z: 2.0 * (2.0 + z) / (1.0 - np.asarray(z, dtype=complex)) ** 4,
        d3=lambda z: 6.0 * (3.0 + z) / (1.0 - np.asarray(z, dtype=complex)) ** 5,
        d4=lambda z: 24.0 * (4.0 + z) / (1.0 - np.asarray(z, dtype=complex)) ** 6,
        class_label="S", is_bounded=False, sup_norm=math.inf,
        log_deriv=lambda z: np.log(1.0 + np.asarray(z, dtype=complex))
        - 3.0 * np.log(1.0 - np.asarray(z, dtype=complex)),
        taylor_fn=taylor,
        becker_majorant=majorant,
    )


# -- lacunary family ----------------------------------------------------

def _lacunary_segment_rule(K: int):
    """Shared t-nodes/weights for phi(z) = z * integral_0^1 exp(P(t z)) dt.

    Dyadic panels graded toward t = 1 resolve the boundary-layer behaviour
    of t^(2^k); 16-point Gauss-Legendre per panel is exact to machine
    precision for the per-panel oscillation budget of a few radians.
    """
    x, w = np.polynomial.legendre.leggauss(16)
    edges = [0.0, 0.5]
    j = 1
    while j <= K + 6:
        edges.append(1.0 - 2.0 ** (-j - 1))
        j += 1
    edges.append(1.0)
    ts, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        ts.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(ts), np.concatenate(ws)


def _becker_lacunary(c: float, K: int) -> UnivalentMap:
    c = float(c)
    K = int(K)
    if K < 1 or K > 24:
        raise ValueError("lacunary depth K must be in 1..24")
    exps = 2 ** np.arange(1, K + 1)

    def P(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for e in exps:
            out = out + z ** int(e)
        return c * out

    def P1(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for e in exps:
            out = out + int(e) * z ** int(e - 1)
        return c * out

    def P2(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for e in exps:
            out = out + int(e) * int(e - 1) * z ** int(e - 2)
        return c * out

    def P3(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for e in exps:
            if e >= 3:
                out = out + int(e) * int(e - 1) * int(e - 2) * z ** int(e - 3)
        return c * out

    tnodes, tweights = _lacunary_segment_rule(K)

    def fn(z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        vals = np.exp(P(flat[:, None] * tnodes[None, :]))
        out = flat * (vals @ tweights)
        return out.reshape(z.shape)

    d1 = lambda z: np.exp(P(z))
    d2 = lambda z: P1(z) * np.exp(P(z))
    d3 = lambda z: (P2(z) + P1(z) ** 2) * np.exp(P(z))
    d4 = lambda z: (P3(z) + 3.0 * P1(z) * P2(z) + P1(z) ** 3) * np.exp(P(z))

    def taylor(m):
        # phi'' = P' phi' gives (j+1) d_{j+1} = c sum_k 2^k d_{j+1-2^k}
        d = np.zeros(max(m, 1), dtype=complex)
        d[0] = 1.0
        for j in range(len(d) - 1):
            acc = 0.0 + 0.0j
            for e in exps:
                if j + 1 - e >= 0:
                    acc += e * d[j + 1 - e]
            d[j + 1] = c * acc / (j + 1)
        a = np.zeros(m, dtype=complex)
        a[1:] = d[: m - 1] / np.arange(1, m)
        return a

    def majorant(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for e in exps:
            out = out + int(e) * r ** int(e)
        return (1.0 - r ** 2) * abs(c) * out

    return UnivalentMap(
        f"becker_lacunary(c={c:g},K={K})",
        fn=fn, d1=d1, d2=d2, d3=d3, d4=d4,
        class_label="other",  # upgraded to S_b after certification
        is_bounded=True, sup_norm=math.nan, sup_norm_empirical=True,
        log_deriv=P, taylor_fn=taylor,
        becker_majorant=majorant,
        params={"c": c, "K": K},
    )


# ----------------------------------------------------------------------
# Becker certification
# ----------------------------------------------------------------------

def becker_check(map_: UnivalentMap, grid_size: int = 4096) -> BeckerCertificate:
    """Grid supremum of the Becker quantity plus an annulus tail bound.

    The grid covers dyadically graded radii up to 1 - 2^-20 with grid_size
    angles; the tail bound is the supremum of the map's circle-wise radial
    majorant over the unexplored annulus (infinite when no majorant is
    available, which forces an invalid certificate).
    """
    n_theta = max(int(grid_size), 64)
    # radii graded toward the boundary; eighth-octave dyadic steps
    js = np.arange(1, 8 * 20 + 1)
    radii = np.concatenate([np.linspace(0.05, 0.85, 33), 1.0 - 2.0 ** (-js / 8.0)])
    radii = np.unique(radii)
    theta = -np.pi + 2.0 * np.pi * np.arange(n_theta) / n_theta
    eith = np.exp(1j * theta)
    sup = 0.0
    for r in radii:
        z = r * eith
        d1 = map_.deriv(z)
        if np.any(d1 == 0) or not np.all(np.isfinite(d1)):
            return BeckerCertificate(map_.name, math.inf, math.inf, n_theta)
        q = (1.0 - r * r) * np.abs(z * map_.deriv2(z) / d1)
        m = float(np.max(q))
        if m > sup:
            sup = m
    if map_.becker_majorant is None:
        tail = math.inf
    else:
        # what the grid may have missed: dense 1D sweep of the circle-wise
        # majorant over [0, 1), including the annulus beyond the last radius
        rr = np.linspace(0.0, 1.0, 400001)[:-1]
        tail = float(max(np.max(map_.becker_majorant(rr)) - sup, 0.0))
    return BeckerCertificate(map_.name, sup, tail, n_theta)


def _bounded_probe(map_: UnivalentMap, k_max: int = 20, n_theta: int = 2048) -> float:
    """Empirical sup-norm estimate: max |phi| over circles r = 1 - 2^-k."""
    theta = -np.pi + 2.0 * np.pi * np.arange(n_theta) / n_theta
    eith = np.exp(1j * theta)
    best = 0.0
    for k in range(1, k_max + 1):
        r = 1.0 - 2.0 ** (-k)
        best = max(best, float(np.max(np.abs(map_(r * eith)))))
    return best


# ----------------------------------------------------------------------
# catalog access
# ----------------------------------------------------------------------

_CATALOG_NAMES = ("identity", "halfsquare", "monomial_perturb", "koebe",
                  "becker_lacunary")

_instances: dict = {}


def parse_map_spec(spec: str):
    """Split 'name[:key=value,...]' into (name, params)."""
    name, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not _:
                raise ValueError(f"malformed map parameter {item!r}")
            key = key.strip()
            params[key] = int(val) if key in ("n", "K") else complex(val) \
                if ("j" in val or "J" in val) else float(val)
    return name.strip(), params


def catalog_get(name: str, **params) -> UnivalentMap:
    """Fetch a catalog map by name, certifying it on first construction.

    Parameters may be embedded in the name ('becker_lacunary:c=0.1,K=12')
    or passed as keywords.  becker_lacunary members failing the Becker
    certification are rejected with the computed supremum attached.
    """
    if ":" in name:
        name, embedded = parse_map_spec(name)
        embedded.update(params)
        params = embedded
    key = (name, tuple(sorted((k, complex(v)) for k, v in params.items())))
    if key in _instances:
        return _instances[key]
    def _real(x):
        return x.real if isinstance(x, complex) else x

    if name == "identity":
        m = _identity()
    elif name == "halfsquare":
        m = _halfsquare()
    elif name == "monomial_perturb":
        m = _monomial_perturb(params.get("a", 0.25), int(_real(params.get("n", 2))))
    elif name == "koebe":
        m = _koebe()
    elif name == "becker_lacunary":
        c = float(_real(params.get("c", 0.1)))
        K = int(_real(params.get("K", 12)))
        m = _becker_lacunary(c, K)
        cert = becker_check(m)
        if not cert.valid:
            raise CertificationError(
                f"becker_lacunary(c={c},K={K}) failed certification: "
                f"sup {cert.sup_value:.6f} + tail {cert.tail_bound:.6f} > {BECKER_THRESHOLD}",
                cert.sup_value)
        m.certificate = cert
        m.class_label = "S_b"
        m.sup_norm = _bounded_probe(m)  # flagged empirical via sup_norm_empirical
    else:
        raise KeyError(f"unknown catalog map {name!r}; known: {_CATALOG_NAMES}")
    _instances[key] = m
    return m


def rotate_map(map_: UnivalentMap, theta: float) -> UnivalentMap:
    """The class-S rotation e^{-i theta} phi(e^{i theta} z) of a catalog map."""
    w = np.exp(1j * theta)
    wb = np.conj(w)
    ld = (lambda z: map_.log_deriv(w * np.asarray(z, dtype=complex))) \
        if map_.has_log_deriv else None

    def taylor(n):
        a = map_.taylor(n)
        return a * w ** (np.arange(n) - 1.0)

    return UnivalentMap(
        f"rot({map_.name},{theta:g})",
        fn=lambda z: wb * map_(w * np.asarray(z, dtype=complex)),
        d1=lambda z: map_.deriv(w * z),
        d2=lambda z: w * map_.deriv2(w * z),
        d3=lambda z: w ** 2 * map_.deriv3(w * z),
        d4=lambda z: w ** 3 * map_.deriv4(w * z),
        class_label=map_.class_label, is_bounded=map_.is_bounded,
        sup_norm=map_.sup_norm, sup_norm_empirical=map_.sup_norm_empirical,
        log_deriv=ld, taylor_fn=taylor,
        becker_majorant=map_.becker_majorant,
    )


# ----------------------------------------------------------------------
# branch-continued logarithms
# ----------------------------------------------------------------------

_MAX_STEP = 0.5 * np.pi


def _continued_steps(values: np.ndarray) -> np.ndarray:
    """Cumulative continued log increments along a path of nonzero values."""
    ratios = values[1:] / values[:-1]
    steps = np.log(ratios)
    if np.max(np.abs(steps.imag), initial=0.0) >= _MAX_STEP:
        raise BranchContinuationError("argument step of pi/2 or more along path")
    return steps


def continued_log_path(g: Callable[[np.ndarray], np.ndarray], path_end: complex,
                       anchor: complex = 0.0, n_steps: int = 256,
                       max_steps: int = 2 ** 16) -> complex:
    """log g continued from g(0) (log value `anchor`) to path_end along a segment."""
    n = n_steps
    while True:
        t = np.linspace(0.0, 1.0, n + 1)
        vals = g(t * path_end)
        if np.all(vals != 0) and np.all(np.isfinite(vals)):
            try:
                return complex(anchor + np.sum(_continued_steps(vals)))
            except BranchContinuationError:
                pass
        if n >= max_steps:
            raise BranchContinuationError(
                "segment continuation failed at maximum refinement")
        n *= 2


def continued_log_circle(g: Callable[[np.ndarray], np.ndarray], r: float, n: int,
                         anchor: complex = 0.0, n_radial: int = 1024,
                         cap: int = 2 ** 24) -> tuple[np.ndarray, int]:
    """Continuous branch of log g on the circle |z| = r, n output angles.

    Continues radially from 0 along arg z = -pi, then around the circle;
    both legs are refined (doubling, up to `cap` points) until every step
    moves the argument by less than pi/2.  Returns the branch on the output
    grid theta_k = -pi + 2 pi k/n and the internal circle resolution used.
    """
    # radial leg
    m = n_radial
    while True:
        radii = np.linspace(0.0, r, m + 1)
        vals = g(radii * np.exp(-1j * np.pi))
        good = np.all(vals[1:] != 0) and np.all(np.isfinite(vals[1:]))
        if good:
            ratios = vals[2:] / vals[1:-1]
            steps = np.log(ratios)
            first = np.log(vals[1]) - anchor  # g ~ g(0) near 0; principal start
            if np.max(np.abs(steps.imag), initial=0.0) < _MAX_STEP \
                    and abs(first.imag) < _MAX_STEP:
                start = anchor + first + np.sum(steps)
                break
        if m >= cap:
            raise BranchContinuationError(
                "radial continuation failed: derivative near zero on the ray?")
        m *= 2
    # angular leg
    m = n
    while True:
        theta = -np.pi + 2.0 * np.pi * np.arange(m + 1) / m
        vals = g(r * np.exp(1j * theta))
        if np.all(vals != 0) and np.all(np.isfinite(vals)):
            steps = np.log(vals[1:] / vals[:-1])
            if np.max(np.abs(steps.imag)) < _MAX_STEP:
                branch = start + np.concatenate([[0.0], np.cumsum(steps)])
                closure = branch[-1] - branch[0]
                if abs(closure) > 1e-8 * max(1.0, np.max(np.abs(branch))):
                    raise BranchContinuationError(
                        f"branch fails to close around the circle (defect {closure:.3e})")
                return branch[:-1][:: m // n].copy(), m
        if m >= cap:
            raise BranchContinuationError(
                "angular continuation failed at maximum refinement")
        m *= 2


def log_derivative_trace(map_: UnivalentMap, r: float, n_angles: int,
                         n_radial: int = 1024) -> LogDerivativeTrace:
    """Continuous branch of log phi' on |z| = r anchored at log phi'(0) = 0."""
    if not (0.0 < r < 1.0):
        raise ValueError("radius must lie in (0, 1)")
    if n_angles < 256 or n_angles & (n_angles - 1):
        raise ValueError("n_angles must be a power of two >= 256")
    key = ("trace", r, n_angles)
    if key not in map_._cache:
        values, m = continued_log_circle(map_.deriv, r, n_angles,
                                         anchor=0.0, n_radial=n_radial)
        angles = -np.pi + 2.0 * np.pi * np.arange(n_angles) / n_angles
        trace = LogDerivativeTrace(r, angles, values, m)
        cache = map_._cache
        cache[key] = trace
        # keep at most the four most recent traces per map
        trace_keys = [k for k in cache if isinstance(k, tuple) and k[0] == "trace"]
        for stale in trace_keys[:-4]:
            del cache[stale]
    return map_._cache[key]
