"""Contours of finite-volume configurations under the +1 boundary condition.

The minus vertices of a configuration split into connected components. The
edge boundary of a component is a subcontour; subcontours whose vertex sets
come within distance 2 of each other are chained into contours.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from cayley_ising import tree
from cayley_ising.configurations import (
    Configuration,
    from_index,
    from_minus_set,
)
from cayley_ising.errors import (
    InvalidCollectionError,
    PreconditionError,
    ResourceError,
    UnsupportedError,
)
from cayley_ising.model import (
    BallClass,
    Couplings,
    LinearForm,
    RegionLabel,
    class_energy,
    class_of_ball,
    region_membership,
)
from cayley_ising.tree import Vertex

ENUMERATION_CAP = 2**16


def _sorted_vertices(vs):
    return sorted(vs, key=tree.vertex_key)


def _sorted_edges(es):
    return sorted(es, key=tree.edge_key)


@dataclass(frozen=True)
class MinusComponent:
    vertices: frozenset
    edges: frozenset


@dataclass(frozen=True)
class Subcontour:
    edges: frozenset
    interior: frozenset

    @property
    def vertices(self) -> frozenset:
        return frozenset(v for e in self.edges for v in e)


@dataclass(frozen=True, eq=False)
class Contour:
    """A maximal chain of adjacent subcontours. Identity is the support."""

    subcontours: tuple
    support: frozenset
    interior: frozenset

    @classmethod
    def from_subcontours(cls, subs: Iterable[Subcontour]) -> "Contour":
        subs = tuple(sorted(subs, key=lambda t: tree.vertex_key(min(t.interior, key=tree.vertex_key))))
        support = frozenset().union(*(t.edges for t in subs))
        interior = frozenset().union(*(t.interior for t in subs))
        return cls(subs, support, interior)

    @property
    def vertices(self) -> frozenset:
        """Endpoints of the support edges."""
        return frozenset(v for e in self.support for v in e)

    @property
    def all_vertices(self) -> frozenset:
        return self.vertices | self.interior

    def __eq__(self, other):
        if not isinstance(other, Contour):
            return NotImplemented
        return self.support == other.support

    def __hash__(self):
        return hash(self.support)

    def sort_key(self):
        return tree.vertex_key(min(self.interior, key=tree.vertex_key))


@dataclass(frozen=True)
class BoundaryPartition:
    """Improper balls keyed by ball class; (+, 0) never occurs."""

    parts: dict
    ball_radius: int

    @property
    def counts(self) -> dict:
        return {c: len(v) for c, v in self.parts.items()}

    @property
    def improper(self) -> frozenset:
        return frozenset().union(*self.parts.values()) if self.parts else frozenset()


@dataclass(frozen=True)
class ContourStats:
    gamma_counts: dict
    size: int

    def count(self, eps: int, i: int) -> int:
        return self.gamma_counts.get(BallClass(eps, i), 0)


def partition_keys(k: int) -> list[BallClass]:
    return [BallClass(1, i) for i in range(1, k + 2)] + [BallClass(-1, i) for i in range(k + 2)]


def _require_plus(config: Configuration):
    if config.boundary.kind != "plus":
        raise UnsupportedError(
            "contours are extracted under the +1 boundary; flip the configuration "
            "and the field for the -1 case")


def minus_components(config: Configuration) -> list[MinusComponent]:
    _require_plus(config)
    k = config.k
    minus = config.minus_set()
    seen = set()
    out = []
    for start in _sorted_vertices(minus):
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        seen.add(start)
        while queue:
            x = queue.popleft()
            for y in tree.neighbors(x, k):
                if y in minus and y not in seen:
                    seen.add(y)
                    comp.add(y)
                    queue.append(y)
        edges = frozenset(
            tree.make_edge(x, y) for x in comp for y in tree.neighbors(x, k) if y in comp)
        out.append(MinusComponent(frozenset(comp), edges))
    return out


def subcontour_of(component: MinusComponent, k: int) -> Subcontour:
    """Edges outside the component with one endpoint inside it."""
    inside = component.vertices
    edges = frozenset(
        tree.make_edge(x, y) for x in inside for y in tree.neighbors(x, k) if y not in inside)
    return Subcontour(edges, inside)


def set_distance(a: Iterable[Vertex], b: Iterable[Vertex]) -> int:
    b = list(b)
    return min(tree.distance(x, y) for x in a for y in b)


def subcontour_distance(t1: Subcontour, t2: Subcontour) -> int:
    return set_distance(t1.vertices, t2.vertices)


def contour_distance(g1: Contour, g2: Contour) -> int:
    return set_distance(g1.vertices, g2.vertices)


def assemble_contours(subcontours: Sequence[Subcontour]) -> list[Contour]:
    """Connected components of subcontours under dist <= 2."""
    subs = list(subcontours)
    parent = list(range(len(subs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            if subcontour_distance(subs[i], subs[j]) <= 2:
                parent[find(i)] = find(j)
    groups: dict[int, list] = {}
    for i, t in enumerate(subs):
        groups.setdefault(find(i), []).append(t)
    return sorted((Contour.from_subcontours(g) for g in groups.values()), key=Contour.sort_key)


def extract_contours(config: Configuration) -> list[Contour]:
    return assemble_contours([subcontour_of(c, config.k) for c in minus_components(config)])


def boundary_partition(config: Configuration, J: Couplings | None = None,
                       ball_radius: int | None = None) -> BoundaryPartition:
    """Sort the improper balls (those holding a -1) by ball class.

    Centers range over V_R, R = n + 1 by default. With ``J`` given, the
    couplings must lie in the interior of A_{+,0}, where the all-plus
    configuration is the unique ground state.
    """
    _require_plus(config)
    if J is not None and not region_membership(J, config.k, RegionLabel(1, 0, interior=True)):
        raise PreconditionError("boundary partition needs couplings in int A_{+,0}")
    k = config.k
    R = config.n + 1 if ball_radius is None else ball_radius
    parts = {key: set() for key in partition_keys(k)}
    for c in tree.enumerate_volume(k, R):
        s, nb = config.ball(c)
        if s == 1 and all(v == 1 for v in nb):
            continue
        parts[class_of_ball(s, nb, k)].add(c)
    return BoundaryPartition({key: frozenset(v) for key, v in parts.items()}, R)


def contour_stats(gamma: Contour, partition: BoundaryPartition, k: int) -> ContourStats:
    """Improper balls meeting the contour, counted per part."""
    touched = gamma.all_vertices
    counts = {}
    for key, centers in partition.parts.items():
        counts[key] = sum(
            1 for c in centers if any(v in touched for v in tree.ball_vertices(c, k)))
    return ContourStats(counts, sum(counts.values()))


def contour_form(config: Configuration, ball_radius: int | None = None) -> LinearForm:
    """Energy written through the boundary part sizes, as coefficients."""
    k = config.k
    part = boundary_partition(config, ball_radius=ball_radius)
    ground = class_energy(BallClass(1, 0), k)
    total = ground.scale(tree.volume_size(k, part.ball_radius))
    for key, centers in part.parts.items():
        total = total + (class_energy(key, k) - ground).scale(len(centers))
    return total


def contour_hamiltonian(config: Configuration, J: Couplings,
                        ball_radius: int | None = None) -> Fraction:
    return contour_form(config, ball_radius).evaluate(J)


def chi_gamma(config: Configuration, gamma: Contour) -> Configuration:
    """Erase ``gamma`` by setting its interior to +1."""
    if gamma not in extract_contours(config):
        raise InvalidCollectionError("gamma is not a contour of this configuration")
    return config.with_spins({x: 1 for x in gamma.interior})


def config_from_contours(contours: Iterable[Contour], k: int, n: int) -> Configuration:
    contours = list(contours)
    inner = set(tree.enumerate_volume(k, n))
    outer = set(tree.enumerate_volume(k, n + 1))
    for g in contours:
        if not g.interior <= inner or not g.vertices <= outer:
            raise InvalidCollectionError("a contour does not fit inside V_{n+1}")
    for a in range(len(contours)):
        for b in range(a + 1, len(contours)):
            if contour_distance(contours[a], contours[b]) <= 2:
                raise InvalidCollectionError("two contours are within distance 2")
    minus = set().union(*(g.interior for g in contours)) if contours else set()
    config = from_minus_set(k, n, minus)
    rebuilt = extract_contours(config)
    if set(rebuilt) != set(contours) or any(
        g.interior != next(h for h in contours if h == g).interior for g in rebuilt
    ):
        raise InvalidCollectionError("the collection is not a valid contour configuration")
    return config


@dataclass
class ContourCount:
    x: Vertex
    volume: int
    counts: dict  # r -> N_r(x)
    bound: dict = field(default_factory=dict)  # r -> (4e)^(2r)

    @property
    def ok(self) -> bool:
        return all(self.counts[r] <= self.bound[r] for r in self.counts)


def counting_bound(r: int) -> float:
    return (4 * math.e) ** (2 * r)


def all_contours(k: int, n: int, cap: int = ENUMERATION_CAP) -> dict:
    """Every contour realised by some configuration on V_n, mapped to |gamma|."""
    size = tree.volume_size(k, n)
    if 2**size > cap:
        raise ResourceError(f"2^{size} minus-sets exceed the enumeration cap {cap}", cap)
    found: dict[Contour, int] = {}
    for index in range(2**size):
        config = from_index(k, n, index)
        gammas = extract_contours(config)
        if not gammas:
            continue
        part = boundary_partition(config)
        for g in gammas:
            if g not in found:
                found[g] = contour_stats(g, part, k).size
    return found


def count_contours_through(x: Vertex, r_max: int, volume: int, k: int = 2,
                           cap: int = ENUMERATION_CAP) -> ContourCount:
    """N_r(x): distinct contours with x among their support vertices and
    |gamma| = r, over all minus-sets of V_volume."""
    if k != 2:
        raise UnsupportedError("the contour counting bound is stated for k = 2")
    counts = {r: 0 for r in range(1, r_max + 1)}
    if volume >= 0:
        for g, size in all_contours(k, volume, cap).items():
            if x in g.vertices and size <= r_max:
                counts[size] += 1
    return ContourCount(x, volume, counts, {r: counting_bound(r) for r in counts})


def contour_to_dict(gamma: Contour, stats: ContourStats) -> dict:
    vs = tree.vertex_to_str
    return {
        "support": [[vs(a), vs(b)] for a, b in _sorted_edges(gamma.support)],
        "interior": [vs(x) for x in _sorted_vertices(gamma.interior)],
        "size": stats.size,
        "gamma_counts": {c.label(): n for c, n in stats.gamma_counts.items()},
    }
