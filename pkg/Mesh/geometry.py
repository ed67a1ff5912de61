"""
Space-time geometry: intervals, tagged simplices, prisms and partitions.

All measures come from determinant formulas on exact vertex coordinates, never
from quadrature. Simplices are refined with Maubach's tagged bisection: a
simplex with tag k bisects the edge (x0, xk). Starting from the Kuhn
triangulation (tag d) this produces finitely many similarity classes, which is
what keeps shape regularity bounded under arbitrary refinement.

Every value type here is immutable; a Partition is replaced, not mutated, when
a refinement round commits.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, Delaunay
from scipy.spatial.distance import pdist

from ANISOST.exceptions import AnisoError

logger = logging.getLogger(__name__)

# Membership tolerance for barycentric and halfspace tests.
CONTAINS_TOL = 1e-12
# Relative overlap threshold; stays above the LP solver feasibility tolerance.
OVERLAP_TOL = 1e-6


class InvalidTag(AnisoError):
    """The refinement tag does not select an edge of the simplex."""


class Degenerate(AnisoError):
    """An interval or simplex has (numerically) zero measure."""


class EmptyPartition(AnisoError):
    """A partition statistic was requested on a partition without elements."""


def time_level(k: int, s1: float, s2: float, d: int) -> int:
    """ℓ(J) required for a prism of level k: ⌈k·s2/(s1·d)⌉."""
    # Rounded before the ceiling so that e.g. 3·(0.1/0.1) stays 3.
    return math.ceil(round(k * s2 / (s1 * d), 9))


@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    level: int = 0

    def __post_init__(self):
        if not self.a < self.b:
            raise Degenerate(f"interval [{self.a}, {self.b}] is empty")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, t, tol: float = CONTAINS_TOL):
        t = np.asarray(t, dtype=float)
        scale = tol * max(1.0, abs(self.a), abs(self.b))
        return (t >= self.a - scale) & (t <= self.b + scale)


def bisect_interval(J: Interval) -> tuple[Interval, Interval]:
    """Split J at its midpoint; both children sit one level deeper."""
    mid = J.midpoint
    return Interval(J.a, mid, J.level + 1), Interval(mid, J.b, J.level + 1)


@dataclass(frozen=True, eq=False)
class Simplex:
    """
    A d-simplex given by d+1 vertices in ℝ^d.

    Fields:
        vertices (ndarray): (d+1, d) read-only vertex array
        tag (int): Maubach tag in 1..d, the bisection edge is (x0, x_tag)
        level (int): number of bisections from the root

    Tags count edges from 1: tag k here is tag k-1 in the zero-based
    convention, and serialized tags keep this shifted range.
    """
    vertices: np.ndarray
    tag: int = 1
    level: int = 0

    def __post_init__(self):
        verts = np.array(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[0] != verts.shape[1] + 1:
            raise Degenerate(f"expected (d+1, d) vertices, got shape {verts.shape}")
        verts.setflags(write=False)
        object.__setattr__(self, 'vertices', verts)

    @property
    def d(self) -> int:
        return self.vertices.shape[1]

    @property
    def edge_matrix(self) -> np.ndarray:
        return (self.vertices[1:] - self.vertices[0]).T

    @property
    def volume(self) -> float:
        return abs(np.linalg.det(self.edge_matrix)) / math.factorial(self.d)

    @property
    def diameter(self) -> float:
        if self.d == 1:
            return abs(self.vertices[1, 0] - self.vertices[0, 0])
        return float(pdist(self.vertices).max())

    @property
    def measure(self) -> float:
        return self.volume

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def is_degenerate(self) -> bool:
        return self.volume <= 1e-13 * self.diameter ** self.d

    def _barycentric_gradients(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows g_i, offsets c_i with λ_i(x) = g_i·x + c_i."""
        if self.is_degenerate():
            raise Degenerate("simplex has zero volume")
        B = np.linalg.inv(self.edge_matrix)
        v0 = self.vertices[0]
        grads = np.vstack([-B.sum(axis=0), B])
        offsets = np.concatenate([[1.0 + B.sum(axis=0) @ v0], -B @ v0])
        return grads, offsets

    def barycentric(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        grads, offsets = self._barycentric_gradients()
        return x @ grads.T + offsets

    def contains(self, x, tol: float = CONTAINS_TOL):
        lam = self.barycentric(x)
        inside = np.all(lam >= -tol, axis=1)
        return inside if np.ndim(x) > 1 else bool(inside[0])

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit outward normals A and offsets b with S = {x : A x ≤ b}."""
        grads, offsets = self._barycentric_gradients()
        norms = np.linalg.norm(grads, axis=1)
        return -grads / norms[:, None], offsets / norms

    def facet_areas(self) -> np.ndarray:
        # Facet i lies opposite vertex i at height 1/|g_i|, so |F_i| = d|S||g_i|.
        grads, _ = self._barycentric_gradients()
        return self.d * self.volume * np.linalg.norm(grads, axis=1)

    @property
    def inradius(self) -> float:
        return self.d * self.volume / self.facet_areas().sum()

    def triangulate(self) -> list[Simplex]:
        return [self]


def bisect_simplex(S: Simplex) -> tuple[Simplex, Simplex]:
    """
    Maubach bisection of a tagged simplex.

    For tag k the edge (x0, xk) is halved at z and the children are
    (x0, ..., x_{k-1}, z, x_{k+1}, ..., xd) and (x1, ..., xk, z, x_{k+1}, ..., xd),
    both tagged k-1 (wrapping to d when k = 1). Tag 0 would select no edge and
    is rejected together with every tag outside [1, d].
    """
    d, k = S.d, S.tag
    if not 1 <= k <= d:
        raise InvalidTag(f"tag {k} is outside [1, {d}]")
    x = S.vertices
    z = 0.5 * (x[0] + x[k])
    first = np.vstack([x[:k], z, x[k + 1:]])
    second = np.vstack([x[1:k + 1], z, x[k + 1:]])
    tag = k - 1 if k > 1 else d
    return (Simplex(first, tag, S.level + 1), Simplex(second, tag, S.level + 1))


def shape_kappa(S: Simplex) -> float:
    """κ_S = diam(S)/ρ_S with ρ_S = d|S| / (sum of facet areas)."""
    if S.is_degenerate():
        raise Degenerate("shape_kappa needs a nondegenerate simplex")
    return S.diameter / S.inradius


def uniform_refine(S: Simplex, rounds: int) -> list[Simplex]:
    """Bisect every simplex `rounds` times; returns 2**rounds descendants."""
    current = [S]
    for _ in range(rounds):
        current = [child for simplex in current for child in bisect_simplex(simplex)]
    return current


def similarity_classes(simplices: Iterable[Simplex], decimals: int = 8) -> Counter:
    """Group simplices by sorted edge lengths normalized by the longest edge."""
    classes = Counter()
    for simplex in simplices:
        edges = np.sort(pdist(simplex.vertices))
        classes[tuple(np.round(edges / edges[-1], decimals))] += 1
    return classes


class Region:
    """
    A convex polytope D ⊂ ℝ^d given by its vertices.

    Carries the halfspace form (from the convex hull), a Delaunay triangulation
    into simplices, and the Chebyshev inradius used as the σ(D) stand-in.
    """

    def __init__(self, vertices: Sequence[Sequence[float]]):
        verts = np.array(vertices, dtype=float)
        if verts.ndim != 2:
            raise Degenerate("region vertices must be a 2-D array")
        self.d = verts.shape[1]
        if self.d == 1:
            lo, hi = float(verts.min()), float(verts.max())
            if not lo < hi:
                raise Degenerate("region is a single point")
            self.vertices = np.array([[lo], [hi]])
            self._A = np.array([[-1.0], [1.0]])
            self._b = np.array([-lo, hi])
            self._simplices = [Simplex(self.vertices, tag=1)]
            self.measure = hi - lo
            return
        hull = ConvexHull(verts)
        self.vertices = verts[hull.vertices]
        normals, offsets = hull.equations[:, :-1], -hull.equations[:, -1]
        # Triangulated hull facets repeat coplanar normals.
        _, keep = np.unique(np.round(hull.equations, 10), axis=0, return_index=True)
        keep = np.sort(keep)
        self._A, self._b = normals[keep], offsets[keep]
        self._simplices = [
            Simplex(self.vertices[idx], tag=self.d)
            for idx in Delaunay(self.vertices).simplices
        ]
        self._simplices = [s for s in self._simplices if not s.is_degenerate()]
        self.measure = float(hull.volume)

    @classmethod
    def unit_cube(cls, d: int, scale: float = 1.0) -> Region:
        return cls(scale * np.array(list(itertools.product((0.0, 1.0), repeat=d))))

    @property
    def volume(self) -> float:
        return self.measure

    @property
    def diameter(self) -> float:
        return float(pdist(self.vertices).max())

    @property
    def centroid(self) -> np.ndarray:
        return sum(s.volume * s.centroid for s in self._simplices) / self.measure

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        return self._A, self._b

    def triangulate(self) -> list[Simplex]:
        return list(self._simplices)

    def contains(self, x, tol: float = CONTAINS_TOL):
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        inside = np.all(pts @ self._A.T <= self._b + tol * max(1.0, self.diameter), axis=1)
        return inside if np.ndim(x) > 1 else bool(inside[0])

    @property
    def inradius(self) -> float:
        return chebyshev_radius(self._A, self._b)


def chebyshev_radius(A: np.ndarray, b: np.ndarray) -> float:
    """Radius of the largest ball inside {x : A x ≤ b}; 0 when it has no interior."""
    # max ρ subject to A x + ρ|a_i| ≤ b
    d = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(
        c, A_ub=np.column_stack([A, norms]), b_ub=b,
        bounds=[(None, None)] * d + [(0, None)], method='highs',
    )
    return float(res.x[-1]) if res.success else 0.0


@dataclass(frozen=True, eq=False)
class Prism:
    """
    Space-time element J×S.

    Fields:
        time (Interval): temporal factor J
        space (Simplex): spatial factor S
        level (int): prism level ℓ(J×S), the number of atomic splits from the root
        key (tuple): path of child indices from the root, used as stable id
    """
    time: Interval
    space: Simplex
    level: int = 0
    key: tuple = field(default=(0,))

    @property
    def d(self) -> int:
        return self.space.d

    @property
    def element_id(self) -> str:
        return '-'.join(str(part) for part in self.key)

    @property
    def measure(self) -> float:
        return self.time.length * self.space.volume

    @property
    def diameter(self) -> float:
        return self.space.diameter

    def aniso_value(self, s1: float, s2: float) -> float:
        """|J| / |S|^{s2/(s1 d)}."""
        return self.time.length / self.space.volume ** (s2 / (s1 * self.d))

    def level_identity_holds(self, s1: float, s2: float, root: Prism | None = None) -> bool:
        base_time = root.time.level if root else 0
        base_space = root.space.level if root else 0
        return (
            self.space.level - base_space == self.level
            and self.time.level - base_time == time_level(self.level, s1, s2, self.d)
        )

    def contains(self, t, x):
        return self.time.contains(t) & np.atleast_1d(self.space.contains(np.atleast_2d(x)))


def interiors_overlap(first: Prism, second: Prism, tol: float = OVERLAP_TOL) -> bool:
    """Whether two prisms share interior points: overlapping times and a spatial intersection with positive inradius."""
    overlap = min(first.time.b, second.time.b) - max(first.time.a, second.time.a)
    if overlap <= tol * max(first.time.length, second.time.length):
        return False
    u, v = first.space.vertices, second.space.vertices
    if np.any(u.max(axis=0) <= v.min(axis=0)) or np.any(v.max(axis=0) <= u.min(axis=0)):
        return False
    A1, b1 = first.space.halfspaces()
    A2, b2 = second.space.halfspaces()
    A, b = np.vstack([A1, A2]), np.concatenate([b1, b2])
    # x = c + s y puts the LP on unit scale, so the tolerance is relative.
    center = first.space.centroid
    size = min(first.diameter, second.diameter)
    return chebyshev_radius(A, (b - A @ center) / size) > tol


class Partition:
    """
    A non-overlapping prism cover of I×D.

    Elements are kept sorted by their key so that iteration order, element ids
    and every reduction over elements are reproducible. Construction rejects
    duplicate keys and overlapping interiors with Degenerate; `refined` skips
    the overlap scan because atomic children tile their parent.
    """

    def __init__(self, elements: Iterable[Prism], root: Sequence[Prism] | None = None,
                 aniso_params: tuple[float, float] = (1.0, 1.0), *, validate: bool = True):
        self.elements: list[Prism] = sorted(elements, key=lambda el: el.key)
        self.root: tuple[Prism, ...] = tuple(root if root is not None else self.elements)
        self.aniso_params = (float(aniso_params[0]), float(aniso_params[1]))
        self._by_key = {el.key: el for el in self.elements}
        if len(self._by_key) != len(self.elements):
            raise Degenerate("partition elements must have distinct keys")
        if validate:
            self._check_disjoint()

    def _check_disjoint(self):
        order = sorted(self.elements, key=lambda el: el.time.a)
        for i, first in enumerate(order):
            for second in order[i + 1:]:
                if second.time.a >= first.time.b - OVERLAP_TOL * first.time.length:
                    break
                if interiors_overlap(first, second):
                    raise Degenerate(
                        f"elements {first.element_id} and {second.element_id} overlap"
                    )

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, key: tuple) -> Prism:
        return self._by_key[key]

    @property
    def d(self) -> int:
        if not self.elements:
            raise EmptyPartition("partition has no elements")
        return self.elements[0].d

    def measure(self) -> float:
        return math.fsum(el.measure for el in self.elements)

    def refined(self, splits: dict[tuple, Sequence[Prism]]) -> Partition:
        """New partition with every key in `splits` replaced by its children."""
        kept = [el for el in self.elements if el.key not in splits]
        children = [child for key in sorted(splits) for child in splits[key]]
        return Partition(kept + children, root=self.root, aniso_params=self.aniso_params,
                         validate=False)

    def time_span(self) -> Interval:
        return Interval(min(el.time.a for el in self.root), max(el.time.b for el in self.root))

    def spatial_domain(self) -> Region | Simplex:
        """The spatial domain D covered by the root simplices."""
        spaces = {id(el.space): el.space for el in self.root}
        if len(spaces) == 1:
            return next(iter(spaces.values()))
        return Region(np.vstack([s.vertices for s in spaces.values()]))

    def locate(self, t, x) -> np.ndarray:
        """Index of the first element containing each point, -1 when none does."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.atleast_2d(np.asarray(x, dtype=float))
        owner = np.full(t.shape[0], -1, dtype=int)
        for idx, el in enumerate(self.elements):
            open_pts = owner < 0
            if not open_pts.any():
                break
            hit = np.zeros_like(open_pts)
            hit[open_pts] = el.contains(t[open_pts], x[open_pts])
            owner[hit] = idx
        return owner

    def stats(self) -> dict:
        if not self.elements:
            raise EmptyPartition("partition has no elements")
        return {
            'elements': len(self),
            'measure': self.measure(),
            'kappa': partition_kappa(self),
            'anisotropy': anisotropy_ratio(self),
            'levels': dict(sorted(Counter(el.level for el in self.elements).items())),
        }


def anisotropy_ratio(P: Partition, s1: float | None = None, s2: float | None = None) -> float:
    """
    a(P) = max over J×S of max(|J|/|S|^{s2/(s1 d)}, |S|^{s2/(s1 d)}/|J|).

    Uses the partition's own (s1, s2) unless overridden; always ≥ 1.
    """
    if not P.elements:
        raise EmptyPartition("anisotropy ratio of an empty partition")
    s1 = P.aniso_params[0] if s1 is None else s1
    s2 = P.aniso_params[1] if s2 is None else s2
    values = np.array([el.aniso_value(s1, s2) for el in P.elements])
    return float(np.max(np.maximum(values, 1.0 / values)))


def partition_kappa(P: Partition) -> float:
    """κ_P, the largest κ_S over the spatial factors of P."""
    if not P.elements:
        raise EmptyPartition("shape statistic of an empty partition")
    return max(shape_kappa(el.space) for el in P.elements)


def kuhn_simplices(d: int, scale: float = 1.0) -> list[Simplex]:
    """
    Kuhn triangulation of [0, scale]^d, vertices ordered along the
    coordinate path 0 → e_π1 → e_π1+e_π2 → ... so that tag d bisects the
    main diagonal.
    """
    if d == 1:
        return [Simplex([[0.0], [scale]], tag=1)]
    simplices = []
    for perm in itertools.permutations(range(d)):
        vertex = np.zeros(d)
        path = [vertex.copy()]
        for axis in perm:
            vertex[axis] += scale
            path.append(vertex.copy())
        simplices.append(Simplex(np.array(path), tag=d))
    return simplices


def kuhn_mesh(d: int, time: tuple[float, float] = (0.0, 1.0), scale: float = 1.0,
              aniso_params: tuple[float, float] = (1.0, 1.0)) -> Partition:
    """Well-labeled tensor partition P0 of [t0, t1]×[0, scale]^d."""
    J = Interval(float(time[0]), float(time[1]))
    roots = [Prism(J, S, level=0, key=(idx,)) for idx, S in enumerate(kuhn_simplices(d, scale))]
    logger.debug("kuhn mesh d=%d with %d root prisms", d, len(roots))
    return Partition(roots, aniso_params=aniso_params)


def split_count(n: int, s1: float, s2: float, d: int) -> int:
    """Temporal bisections m = ⌈n·s2/(s1 d)⌉ - ⌈(n-1)·s2/(s1 d)⌉ at prism level n ≥ 1."""
    if n < 1:
        raise ValueError("split level n starts at 1")
    return time_level(n, s1, s2, d) - time_level(n - 1, s1, s2, d)


def split_prism(element: Prism, s1: float, s2: float) -> list[Prism]:
    """
    Atomic anisotropic split of J×S into 2^{m+1} prisms of level n = ℓ(J×S)+1.

    S is bisected once; J is bisected m = split_count(n) times. Child keys
    extend the parent key with index i·2 + j for temporal piece i and
    spatial child j.
    """
    n = element.level + 1
    m = split_count(n, s1, s2, element.d)
    spatial = bisect_simplex(element.space)
    temporal = [element.time]
    for _ in range(m):
        temporal = [child for piece in temporal for child in bisect_interval(piece)]
    return [
        Prism(J, S, level=n, key=element.key + (2 * i + j,))
        for i, J in enumerate(temporal)
        for j, S in enumerate(spatial)
    ]
