"""
Difference operators and moduli of smoothness on space-time cylinders.

For a shift h the r-th temporal difference is
    Δ^r_{h,t} f(t, x) = Σ_{i=0}^{r} (-1)^{r-i} C(r, i) f(t + i h, x)
and the spatial one shifts x along a vector h instead. The moduli take the
L_p norm of these differences over the shifted domains
    I_{r,h} = {t : t + r h ∈ I},    D_{r,h} = D ∩ (D - r h)
and the sup (or a normalized integral) over |h| ≤ δ.

Estimator design:

* N(h) = ‖Δ^r_h f‖_{L_p(shifted domain)} is tabulated once per element on a
  fixed magnitude lattice L·2^{-a}·3^{-b} (a, b ≥ 0, down to L·2^{-n_mag})
  and a fixed set of directions. L is |J| for temporal and diam(D) for
  spatial moduli. All δ are answered from this ModulusProfile, which makes
  the sup estimate exactly monotone in δ and ties samples of δ, 2δ and 3δ
  together.
* Shifted domains are integrated exactly: D_{r,h} has the normals of D and
  offsets b - max(0, r A h), so its vertices are enumerated from the
  halfspace form and triangulated.
* N(-h) = N(h), so directions cover a half-sphere.
"""

from __future__ import annotations

import itertools
import logging
import math
import threading
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.spatial import Delaunay, QhullError
from scipy.spatial.transform import Rotation

from ANISOST.exceptions import AnisoError
from Mesh.geometry import Interval, Simplex
from Polynomials.quadrature import (
    discrete_norm, field_values, lp_norm, prism_rule, spatial_rule, temporal_rule, tensor_rule,
)

logger = logging.getLogger(__name__)

TEMPORAL = 'temporal'
SPATIAL = 'spatial'
SUP = 'sup'
AVERAGED = 'averaged'


class OutOfDomain(AnisoError):
    """A difference chain t + i h (or x + i h) leaves the domain."""


class BelowLattice(AnisoError, ValueError):
    """δ is positive but smaller than every magnitude of the sampled lattice."""


@dataclass(frozen=True)
class SamplingConfig:
    """
    Sampling of the shift set.

    Fields:
        n_mag (int): depth of the magnitude lattice in octaves
        n_dir (int | None): spatial directions, default 2·d·8 (one in d = 1)
        seed (int): seed of the direction offsets/rotation
        quad_order (int): Gauss points in t; the spatial rule is exact to 2·quad_order-1
        averaging_region (str): "box" [-δ, δ]^d or "ball" |h| ≤ δ
        subdivisions (int): quadrature subdivision levels for rough integrands
    """
    n_mag: int = 12
    n_dir: int | None = None
    seed: int = 0
    quad_order: int = 5
    averaging_region: str = 'box'
    subdivisions: int = 0

    def __post_init__(self):
        if self.n_mag < 1:
            raise ValueError("n_mag must be at least 1")
        if self.n_dir is not None and self.n_dir < 1:
            raise ValueError("n_dir must be positive")
        if self.quad_order < 1:
            raise ValueError("quad_order must be positive")
        if self.averaging_region not in ('box', 'ball'):
            raise ValueError("averaging_region must be 'box' or 'ball'")

    def directions_count(self, d: int) -> int:
        if d == 1:
            return 1
        return self.n_dir or 2 * d * 8

    @property
    def spatial_degree(self) -> int:
        return 2 * self.quad_order - 1


@dataclass
class ModulusEstimate:
    """
    Value of a modulus of smoothness with its sampling metadata.

    Fields:
        value (float): estimate, ≥ 0
        kind (str): "sup" or "averaged"
        direction (str): "temporal" or "spatial"
        r (int): order of the difference
        delta (float): shift bound δ
        p (float): integrability exponent, may be ∞
        sample_meta (dict): directions, magnitudes, seed, inradius, delta0
    """
    value: float
    kind: str
    direction: str
    r: int
    delta: float
    p: float
    sample_meta: dict = field(default_factory=dict)


def _binomial_weights(r: int) -> np.ndarray:
    return np.array([(-1) ** (r - i) * math.comb(r, i) for i in range(r + 1)], dtype=float)


def temporal_difference(f, r: int, h: float, t, x, interval: Interval | None = None):
    """Δ^r_{h,t} f(t, x); OutOfDomain if t + i h leaves `interval`."""
    t = np.asarray(t, dtype=float)
    if interval is not None:
        for i in range(r + 1):
            if not np.all(interval.contains(t + i * h)):
                raise OutOfDomain(f"t + {i}h leaves [{interval.a}, {interval.b}]")
    weights = _binomial_weights(r)
    return sum(w * np.asarray(f(t + i * h, x)) for i, w in enumerate(weights))


def spatial_difference(f, r: int, h, t, x, domain=None):
    """Δ^r_{h,x} f(t, x) along the vector h; OutOfDomain if x + i h leaves `domain`."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    if domain is not None:
        for i in range(r + 1):
            if not np.all(domain.contains(np.atleast_2d(x + i * h))):
                raise OutOfDomain(f"x + {i}h leaves the spatial domain")
    weights = _binomial_weights(r)
    return sum(w * np.asarray(f(t, x + i * h)) for i, w in enumerate(weights))


def recursive_difference(f, r: int, h, t, x, direction: str = TEMPORAL):
    """Δ^r = Δ^{r-1} ∘ Δ^1, built by nesting first differences."""
    if r == 0:
        return np.asarray(f(t, x))
    if direction == TEMPORAL:
        def first(s, y):
            return np.asarray(f(s + h, y)) - np.asarray(f(s, y))
    else:
        step = np.asarray(h, dtype=float)

        def first(s, y):
            return np.asarray(f(s, y + step)) - np.asarray(f(s, y))
    return recursive_difference(first, r - 1, h, t, x, direction)


@lru_cache(maxsize=None)
def _lattice_factors(n_mag: int) -> np.ndarray:
    floor = 2.0 ** -n_mag
    factors = set()
    b = 0
    while 3.0 ** -b >= floor:
        a = 0
        while 2.0 ** -a * 3.0 ** -b >= floor:
            factors.add(2.0 ** -a * 3.0 ** -b)
            a += 1
        b += 1
    lattice = np.array(sorted(factors))
    lattice.setflags(write=False)
    return lattice


def magnitude_lattice(scale: float, n_mag: int) -> np.ndarray:
    """Ascending magnitudes scale·2^{-a}·3^{-b} ≥ scale·2^{-n_mag}."""
    return scale * _lattice_factors(n_mag)


@lru_cache(maxsize=None)
def sample_directions(d: int, n_dir: int, seed: int) -> np.ndarray:
    """Unit directions on a half-sphere, deterministic in (d, n_dir, seed)."""
    rng = np.random.default_rng(seed)
    if d == 1:
        directions = np.ones((1, 1))
    elif d == 2:
        theta = np.pi * (np.arange(n_dir) + rng.random()) / n_dir
        directions = np.column_stack([np.cos(theta), np.sin(theta)])
    elif d == 3:
        k = np.arange(n_dir)
        z = 1.0 - (k + 0.5) / n_dir
        radius = np.sqrt(1.0 - z ** 2)
        phi = k * np.pi * (3.0 - math.sqrt(5.0))
        points = np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])
        directions = Rotation.from_rotvec(rng.normal(size=3)).apply(points)
    else:
        raise ValueError(f"directions are implemented for d ≤ 3, got {d}")
    directions.setflags(write=False)
    return directions


def shifted_interval(J: Interval, r: int, h: float) -> Interval | None:
    """I_{r,h} for h ≥ 0; None when empty."""
    end = J.b - r * abs(h)
    if end - J.a <= 1e-14 * J.length:
        return None
    return Interval(J.a, end)


def clip_polytope(A: np.ndarray, b: np.ndarray) -> list[Simplex]:
    """
    Triangulation of {x : A x ≤ b}; empty list when it has no interior.

    Vertices are the feasible solutions of every d-subset of the constraints.
    """
    m, d = A.shape
    if d == 1:
        lower = -b[A[:, 0] < 0] / -A[A[:, 0] < 0, 0]
        upper = b[A[:, 0] > 0] / A[A[:, 0] > 0, 0]
        lo, hi = lower.max(), upper.min()
        scale = max(1.0, abs(lo), abs(hi))
        return [Simplex([[lo], [hi]], tag=1)] if hi - lo > 1e-13 * scale else []
    combos = np.array(list(itertools.combinations(range(m), d)))
    systems = A[combos]
    rhs = b[combos]
    solvable = np.abs(np.linalg.det(systems)) > 1e-12
    if not solvable.any():
        return []
    candidates = np.linalg.solve(systems[solvable], rhs[solvable][..., None])[..., 0]
    scale = max(1.0, float(np.abs(b).max()))
    feasible = np.all(candidates @ A.T <= b + 1e-10 * scale, axis=1)
    vertices = np.unique(np.round(candidates[feasible], 12), axis=0)
    if vertices.shape[0] < d + 1:
        return []
    if vertices.shape[0] == d + 1:
        simplex = Simplex(vertices, tag=d)
        return [] if simplex.is_degenerate() else [simplex]
    try:
        triangulation = Delaunay(vertices)
    except QhullError:
        return []
    pieces = [Simplex(vertices[idx], tag=d) for idx in triangulation.simplices]
    return [piece for piece in pieces if not piece.is_degenerate()]


def shifted_domain(D, r: int, h) -> list[Simplex]:
    """D_{r,h} = D ∩ (D - r h) as simplices."""
    A, b = D.halfspaces()
    shift = r * np.asarray(h, dtype=float)
    return clip_polytope(A, b - np.maximum(0.0, A @ shift))


def _domain_key(J: Interval, D) -> tuple:
    return (J.a, J.b, tuple(np.asarray(D.vertices).ravel().round(15)))


@dataclass
class ModulusProfile:
    """
    N(h) tabulated on the magnitude lattice × directions of one element.

    Fields:
        direction (str): "temporal" or "spatial"
        r (int): difference order
        p (float): integrability exponent
        scale (float): lattice scale L (|J| or diam D)
        magnitudes (ndarray): ascending lattice magnitudes
        directions (ndarray): (n_dir, dim) unit directions
        values (ndarray): (n_dir, n_mag) table of N
        meta (dict): sampling metadata
    """
    direction: str
    r: int
    p: float
    scale: float
    magnitudes: np.ndarray
    directions: np.ndarray
    values: np.ndarray
    meta: dict

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def floor(self) -> float:
        """Smallest sampled magnitude, L·2^{-n_mag}."""
        return float(self.magnitudes[0])

    def check_delta(self, delta: float):
        if 0 < delta < self.floor * (1.0 - 1e-12):
            raise BelowLattice(
                f"delta {delta:.3e} is below the smallest sampled shift {self.floor:.3e}; "
                f"raise n_mag"
            )

    def sup(self, delta: float) -> float:
        if delta <= 0:
            return 0.0
        used = self.magnitudes <= delta * (1.0 + 1e-12)
        return float(self.values[:, used].max()) if used.any() else 0.0

    def _radii(self, delta: float, region: str) -> np.ndarray:
        if region == 'ball' or self.dim == 1:
            return np.full(self.directions.shape[0], delta)
        return delta / np.abs(self.directions).max(axis=1)

    def sample_max(self, delta: float, region: str = 'box') -> float:
        """Largest N among the samples an averaged estimate at δ uses."""
        if delta <= 0:
            return 0.0
        best = 0.0
        for row, radius in zip(self.values, self._radii(delta, region)):
            used = self.magnitudes <= radius * (1.0 + 1e-12)
            if used.any():
                best = max(best, float(row[used].max()))
        return best

    def averaged(self, delta: float, region: str = 'box') -> float:
        """
        ((2δ)^{-dim} ∫_region N(h)^p dh)^{1/p} in polar coordinates.

        The radial integral interpolates N^p linearly in |h| between 0 and the
        lattice points and holds the last sample up to the region's radius;
        the region measure is the discrete one, so the result never exceeds
        the largest sample used.
        """
        if delta <= 0:
            return 0.0
        if math.isinf(self.p):
            return self.sup(delta)
        m = self.dim - 1
        gauss_x, gauss_w = leggauss(2)
        integrals, volumes = [], []
        for row, radius in zip(self.values, self._radii(delta, region)):
            used = self.magnitudes <= radius * (1.0 + 1e-12)
            rho = np.concatenate([[0.0], self.magnitudes[used]])
            g = np.concatenate([[0.0], row[used] ** self.p])
            total = 0.0
            for j in range(rho.shape[0] - 1):
                lo, hi = rho[j], rho[j + 1]
                s = lo + 0.5 * (hi - lo) * (gauss_x + 1.0)
                w = 0.5 * (hi - lo) * gauss_w
                interp = g[j] + (g[j + 1] - g[j]) * (s - lo) / (hi - lo)
                total += float(w @ (s ** m * interp))
            total += g[-1] * (radius ** (m + 1) - rho[-1] ** (m + 1)) / (m + 1)
            integrals.append(total)
            volumes.append(radius ** (m + 1) / (m + 1))
        mean_value = np.mean(integrals) / np.mean(volumes)
        region_ratio = 1.0
        if region == 'ball' and self.dim > 1:
            region_ratio = _ball_volume(self.dim) / 2.0 ** self.dim
        return float((region_ratio * mean_value) ** (1.0 / self.p))


def _ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


class ProfileCache:
    """Thread-safe memo of ModulusProfiles keyed by field, element and parameters."""

    def __init__(self):
        self._profiles: dict = {}
        self._fields: dict = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._profiles)

    def get(self, key):
        with self._lock:
            return self._profiles.get(key)

    def put(self, key, f, profile: ModulusProfile):
        with self._lock:
            # Holding f keeps id(f) from being reused while the key lives.
            self._fields[id(f)] = f
            self._profiles[key] = profile


def _temporal_row(f, J: Interval, D, r: int, p: float, magnitudes, sampling) -> np.ndarray:
    sx, sw = spatial_rule(D, sampling.spatial_degree, sampling.subdivisions)
    weights_r = _binomial_weights(r)
    row = np.zeros(magnitudes.shape[0])
    for k, h in enumerate(magnitudes):
        sub = shifted_interval(J, r, h)
        if sub is None:
            continue
        tt, tw = temporal_rule(sub, sampling.quad_order, sampling.subdivisions)
        rule = tensor_rule(tt, tw, sx, sw)
        diff = sum(w * field_values(f, rule.times + i * h, rule.points)
                   for i, w in enumerate(weights_r))
        row[k] = discrete_norm(diff, rule.weights, p)
    return row


def _spatial_row(f, J: Interval, D, r: int, p: float, magnitudes, direction,
                 sampling) -> np.ndarray:
    tt, tw = temporal_rule(J, sampling.quad_order, sampling.subdivisions)
    weights_r = _binomial_weights(r)
    row = np.zeros(magnitudes.shape[0])
    for k, rho in enumerate(magnitudes):
        h = rho * direction
        pieces = shifted_domain(D, r, h)
        if not pieces:
            continue
        rules = [spatial_rule(piece, sampling.spatial_degree, sampling.subdivisions)
                 for piece in pieces]
        sx = np.vstack([points for points, _ in rules])
        sw = np.concatenate([weights for _, weights in rules])
        rule = tensor_rule(tt, tw, sx, sw)
        diff = sum(w * field_values(f, rule.times, rule.points + i * h)
                   for i, w in enumerate(weights_r))
        row[k] = discrete_norm(diff, rule.weights, p)
    return row


def modulus_profile(f, J: Interval, D, direction: str, r: int, p: float,
                    sampling: SamplingConfig | None = None, *, executor=None,
                    cache: ProfileCache | None = None) -> ModulusProfile:
    """Tabulate N(h) for one element; reused from `cache` when present."""
    sampling = sampling or SamplingConfig()
    if r < 1:
        raise ValueError("difference order r must be positive")
    if direction not in (TEMPORAL, SPATIAL):
        raise ValueError(f"direction must be {TEMPORAL!r} or {SPATIAL!r}")
    key = (id(f), getattr(f, 'label', None), _domain_key(J, D), direction, r, p,
           tuple(sorted(asdict(sampling).items())))
    if cache is not None:
        cached = cache.get(key)
        if cached is not None:
            return cached

    d = D.d
    inradius = D.inradius
    if direction == TEMPORAL:
        scale = J.length
        magnitudes = magnitude_lattice(scale, sampling.n_mag)
        directions = np.ones((1, 1))
        values = _temporal_row(f, J, D, r, p, magnitudes, sampling)[None, :]
        delta0 = J.length / (4 * r)
    else:
        scale = D.diameter
        magnitudes = magnitude_lattice(scale, sampling.n_mag)
        directions = sample_directions(d, sampling.directions_count(d), sampling.seed)

        def row(vector):
            return _spatial_row(f, J, D, r, p, magnitudes, vector, sampling)

        rows = executor.map(row, directions) if executor is not None else map(row, directions)
        values = np.vstack(list(rows))
        delta0 = inradius / (4 * r)

    meta = {
        'directions': int(directions.shape[0]),
        'magnitudes': int(magnitudes.shape[0]),
        'seed': sampling.seed,
        'n_mag': sampling.n_mag,
        'quad_order': sampling.quad_order,
        'inradius': inradius,
        'delta0': delta0,
    }
    profile = ModulusProfile(direction, r, p, scale, magnitudes, directions, values, meta)
    logger.debug("profile %s r=%d p=%s on %s: %d samples", direction, r, p,
                 key[2][:2], values.size)
    if cache is not None:
        cache.put(key, f, profile)
    return profile


def sup_modulus(f, J: Interval, D, direction: str, r: int, delta: float, p: float,
                sampling: SamplingConfig | None = None, *, executor=None,
                cache: ProfileCache | None = None) -> ModulusEstimate:
    """
    ω_r(f, J×D, δ)_p estimated as the max of N over sampled shifts |h| ≤ δ.

    Sampling approximates the sup from below. A positive δ under the
    smallest lattice magnitude raises BelowLattice instead of reading 0.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    sampling = sampling or SamplingConfig()
    profile = modulus_profile(f, J, D, direction, r, p, sampling, executor=executor, cache=cache)
    profile.check_delta(delta)
    return ModulusEstimate(profile.sup(delta), SUP, direction, r, delta, p, dict(profile.meta))


def averaged_modulus(f, J: Interval, D, direction: str, r: int, delta: float, p: float,
                     sampling: SamplingConfig | None = None, *, executor=None,
                     cache: ProfileCache | None = None) -> ModulusEstimate:
    """
    w_r(f, J×D, δ)_p = ((2δ)^{-dim} ∫ N(h)^p dh)^{1/p} over the configured
    averaging region; p = ∞ aliases the sup modulus.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    sampling = sampling or SamplingConfig()
    profile = modulus_profile(f, J, D, direction, r, p, sampling, executor=executor, cache=cache)
    profile.check_delta(delta)
    meta = dict(profile.meta, region=sampling.averaging_region)
    value = profile.averaged(delta, sampling.averaging_region)
    return ModulusEstimate(value, AVERAGED, direction, r, delta, p, meta)


def modulus_table(f, J: Interval, D, deltas, r_t: int, r_x: int, p: float,
                  sampling: SamplingConfig | None = None, *, executor=None,
                  cache: ProfileCache | None = None) -> list[ModulusEstimate]:
    """Sup and averaged, temporal and spatial moduli for every δ."""
    cache = cache if cache is not None else ProfileCache()
    estimates = []
    for delta in deltas:
        for direction, r in ((TEMPORAL, r_t), (SPATIAL, r_x)):
            for estimator in (sup_modulus, averaged_modulus):
                estimates.append(estimator(f, J, D, direction, r, delta, p, sampling,
                                           executor=executor, cache=cache))
    return estimates


@dataclass
class MarchaudReport:
    """
    Marchaud-type comparison of a low-order modulus with higher-order ones.

    Fields:
        delta (float): evaluation point
        k, r (int): low and high difference orders, k < r
        lhs (float): ω_k(δ)
        rhs (float): δ^k (‖f‖^μ + ∫_δ^∞ ω_r(s)^μ s^{-kμ} ds/s)^{1/μ}
        constant (float | None): lhs/rhs, the measured constant
    """
    delta: float
    direction: str
    k: int
    r: int
    lhs: float
    rhs: float
    constant: float | None


def marchaud_bound(f, J: Interval, D, direction: str, k: int, r: int, delta: float,
                   p: float, sampling: SamplingConfig | None = None, *, levels: int = 24,
                   executor=None, cache: ProfileCache | None = None) -> MarchaudReport:
    """
    Evaluate both sides of the Marchaud inequality at δ.

    The s-integral runs on the dyadic grid δ·2^j up to the lattice scale L
    with the trapezoid rule in log s; beyond L the modulus is constant and the
    tail is integrated in closed form. Diagnostic only.
    """
    if not 0 < k < r:
        raise ValueError("Marchaud needs 0 < k < r")
    if math.isinf(p):
        raise ValueError("the Marchaud diagnostic is reported for finite p")
    sampling = sampling or SamplingConfig()
    mu = min(1.0, p)
    low = modulus_profile(f, J, D, direction, k, p, sampling, executor=executor, cache=cache)
    high = modulus_profile(f, J, D, direction, r, p, sampling, executor=executor, cache=cache)
    scale = high.scale
    if delta <= 0:
        raise ValueError("Marchaud needs delta > 0")
    grid = [delta * 2.0 ** j for j in range(levels) if delta * 2.0 ** j <= scale] or [delta]
    if grid[-1] < scale:
        grid.append(scale)
    s = np.array(grid)
    integrand = np.array([high.sup(value) ** mu for value in s]) / s ** (k * mu)
    logs = np.log(s)
    integral = float(np.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(logs)))
    # ω_r is constant beyond the last grid point.
    top = s[-1]
    integral += high.sup(top) ** mu * top ** (-k * mu) / (k * mu)
    norm = lp_norm(f, J, D, p, prism_rule(J, D, sampling.quad_order, sampling.spatial_degree))
    rhs = delta ** k * (norm ** mu + integral) ** (1.0 / mu)
    lhs = low.sup(delta)
    return MarchaudReport(delta, direction, k, r, lhs, rhs, lhs / rhs if rhs > 0 else None)
