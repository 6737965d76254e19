"""Cayley tree geometry through the free product of order-two groups.

A vertex is a reduced word over the generators ``1..k+1``, stored as a tuple
of ints. The empty tuple is the root. Adjacent letters never repeat because
every generator squares to the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from cayley_ising.errors import InvalidGeneratorError, InvalidSubgroupError

Vertex = tuple  # tuple[int, ...]
Edge = tuple  # (Vertex, Vertex) in canonical order

ROOT: Vertex = ()


def _check_letters(letters, k):
    for a in letters:
        if not 1 <= a <= k + 1:
            raise InvalidGeneratorError(f"generator index {a} outside 1..{k + 1}")


def reduce_word(letters: Iterable[int], k: int) -> Vertex:
    """Cancel adjacent equal letters until the word is reduced."""
    letters = list(letters)
    _check_letters(letters, k)
    stack: list[int] = []
    for a in letters:
        if stack and stack[-1] == a:
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


def is_reduced(x: Sequence[int], k: int) -> bool:
    if any(not 1 <= a <= k + 1 for a in x):
        return False
    return all(x[i] != x[i + 1] for i in range(len(x) - 1))


def multiply(x: Vertex, y: Vertex, k: int) -> Vertex:
    return reduce_word(tuple(x) + tuple(y), k)


def inverse(x: Vertex) -> Vertex:
    return tuple(reversed(x))


def parent(x: Vertex) -> Vertex | None:
    """The predecessor ``x_down``; ``None`` for the root."""
    if not x:
        return None
    return x[:-1]


def children(x: Vertex, k: int) -> list[Vertex]:
    """Direct successors in ascending generator order."""
    last = x[-1] if x else None
    return [x + (a,) for a in range(1, k + 2) if a != last]


def neighbors(x: Vertex, k: int) -> list[Vertex]:
    """The k+1 nearest neighbours, parent first, then children by index."""
    up = parent(x)
    kids = children(x, k)
    return kids if up is None else [up] + kids


def distance(x: Vertex, y: Vertex) -> int:
    common = 0
    for a, b in zip(x, y):
        if a != b:
            break
        common += 1
    return len(x) + len(y) - 2 * common


def vertex_key(x: Vertex):
    """Canonical order: by length, then lexicographic on letters."""
    return (len(x), x)


def make_edge(x: Vertex, y: Vertex) -> Edge:
    return (x, y) if vertex_key(x) <= vertex_key(y) else (y, x)


def edge_key(e: Edge):
    return (vertex_key(e[0]), vertex_key(e[1]))


def sphere_size(k: int, n: int) -> int:
    if n == 0:
        return 1
    return (k + 1) * k ** (n - 1)


def volume_size(k: int, n: int) -> int:
    if n < 0:
        return 0
    return sum(sphere_size(k, m) for m in range(n + 1))


def sphere(k: int, n: int) -> list[Vertex]:
    """Vertices at distance exactly ``n`` from the root, canonical order."""
    if n < 0:
        return []
    layer = [ROOT]
    for _ in range(n):
        layer = [c for x in layer for c in children(x, k)]
    return layer


def enumerate_volume(k: int, n: int) -> list[Vertex]:
    """All vertices of the ball of radius ``n`` around the root."""
    if k < 1:
        raise ValueError("branching order k must be >= 1")
    out: list[Vertex] = []
    layer = [ROOT]
    for m in range(n + 1):
        out.extend(layer)
        if m < n:
            layer = [c for x in layer for c in children(x, k)]
    return out


def unit_ball(center: Vertex, k: int) -> tuple[Vertex, list[Vertex]]:
    return center, neighbors(center, k)


def ball_vertices(center: Vertex, k: int) -> list[Vertex]:
    return [center] + neighbors(center, k)


def letter_counts(x: Vertex, k: int) -> list[int]:
    counts = [0] * (k + 2)
    for a in x:
        counts[a] += 1
    return counts


def subgroup_membership(x: Vertex, A: Iterable[int], k: int | None = None) -> int:
    """Coset of ``x`` modulo H_A: 0 when the letters from A occur an even
    number of times, 1 otherwise."""
    A = frozenset(A)
    if not A:
        raise InvalidSubgroupError("subgroup generator set A must be nonempty")
    if k is not None and not A <= set(range(1, k + 2)):
        raise InvalidSubgroupError(f"A={sorted(A)} is not a subset of 1..{k + 1}")
    return sum(1 for a in x if a in A) % 2


def even_sublattice(x: Vertex) -> bool:
    return len(x) % 2 == 0


def vertex_to_str(x: Vertex) -> str:
    if any(a > 9 for a in x):
        return ".".join(str(a) for a in x)
    return "".join(str(a) for a in x)


def vertex_from_str(s: str, k: int) -> Vertex:
    """Parse a vertex key; rejects words that are not reduced."""
    s = s.strip()
    if not s:
        return ROOT
    try:
        letters = tuple(int(t) for t in (s.split(".") if "." in s else s))
    except ValueError:
        raise InvalidGeneratorError(f"malformed vertex string {s!r}") from None
    _check_letters(letters, k)
    if not is_reduced(letters, k):
        raise InvalidGeneratorError(f"vertex {s!r} is not a reduced word")
    return letters


@dataclass(frozen=True)
class Geometry:
    """Index tables for a finite piece of the tree.

    ``vertices`` lists V_{radius} canonically; the first ``volume_size(k, m)``
    entries are V_m for every m <= radius. ``balls`` holds, for each center in
    V_{radius-1}, the indices of the center followed by its neighbours.
    """

    k: int
    radius: int
    vertices: tuple
    index: dict
    balls: tuple
    parity: tuple

    def size(self, m: int) -> int:
        return volume_size(self.k, m)


@lru_cache(maxsize=64)
def geometry(k: int, radius: int) -> Geometry:
    verts = enumerate_volume(k, radius)
    index = {v: i for i, v in enumerate(verts)}
    balls = tuple(
        tuple([index[c]] + [index[y] for y in neighbors(c, k)])
        for c in verts[: volume_size(k, radius - 1)]
    )
    parity = tuple(len(v) % 2 for v in verts)
    return Geometry(k, radius, tuple(verts), index, balls, parity)
