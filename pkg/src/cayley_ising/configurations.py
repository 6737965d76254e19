"""Finite-volume spin configurations, Hamiltonians and ground-state checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from cayley_ising import tree
from cayley_ising.errors import (
    CayleyIsingError,
    IncompleteBoundaryError,
    InvalidSubgroupError,
    PreconditionError,
    ResourceError,
    UnsupportedError,
)
from cayley_ising.model import (
    AnyCouplings,
    BallClass,
    Couplings,
    LinearForm,
    ball_form,
    class_of_ball,
    energy_table,
    in_peierls_region,
    is_periodic,
    lambda0,
    minimal_classes,
)
from cayley_ising.tree import Vertex

PEIERLS_CAP = 2**16


@dataclass(frozen=True)
class BoundarySpec:
    kind: str  # "plus", "minus" or "explicit"
    values: Mapping | None = None

    @classmethod
    def plus(cls) -> "BoundarySpec":
        return cls("plus")

    @classmethod
    def minus(cls) -> "BoundarySpec":
        return cls("minus")

    @classmethod
    def constant(cls, s: int) -> "BoundarySpec":
        return cls("plus") if s == 1 else cls("minus")

    @classmethod
    def explicit(cls, values: Mapping) -> "BoundarySpec":
        return cls("explicit", dict(values))

    def value(self, x: Vertex) -> int:
        if self.kind == "plus":
            return 1
        if self.kind == "minus":
            return -1
        try:
            return self.values[x]
        except KeyError:
            raise IncompleteBoundaryError(
                f"boundary has no spin for vertex {tree.vertex_to_str(x)!r}") from None

    def flipped(self) -> "BoundarySpec":
        if self.kind == "plus":
            return BoundarySpec.minus()
        if self.kind == "minus":
            return BoundarySpec.plus()
        return BoundarySpec.explicit({x: -s for x, s in self.values.items()})

    @property
    def constant_value(self) -> int | None:
        return {"plus": 1, "minus": -1}.get(self.kind)


@dataclass(frozen=True)
class Configuration:
    """Spins on V_n; vertices outside V_n read the boundary specification."""

    k: int
    n: int
    spins: Mapping
    boundary: BoundarySpec = field(default_factory=BoundarySpec.plus)

    def __post_init__(self):
        for x in tree.enumerate_volume(self.k, self.n):
            s = self.spins.get(x)
            if s not in (1, -1):
                raise CayleyIsingError(
                    f"vertex {tree.vertex_to_str(x)!r} needs a spin in {{+1,-1}}, got {s!r}")

    def spin(self, x: Vertex) -> int:
        if len(x) <= self.n:
            return self.spins[x]
        return self.boundary.value(x)

    def ball(self, center: Vertex) -> tuple[int, list[int]]:
        return self.spin(center), [self.spin(y) for y in tree.neighbors(center, self.k)]

    def minus_set(self) -> frozenset:
        return frozenset(x for x, s in self.spins.items() if s == -1)

    def with_spins(self, updates: Mapping) -> "Configuration":
        spins = dict(self.spins)
        spins.update(updates)
        return Configuration(self.k, self.n, spins, self.boundary)

    def flipped(self) -> "Configuration":
        return Configuration(
            self.k, self.n, {x: -s for x, s in self.spins.items()}, self.boundary.flipped())


@dataclass(frozen=True)
class GroundStateReport:
    is_ground: bool
    offending_balls: list
    realized_classes: frozenset
    min_energy: Fraction

    def opposite_sign_witness(self) -> tuple[BallClass, BallClass] | None:
        plus = sorted(c for c in self.realized_classes if c.epsilon == 1)
        minus = sorted(c for c in self.realized_classes if c.epsilon == -1)
        if plus and minus:
            return plus[0], minus[0]
        return None


def from_minus_set(k: int, n: int, minus: Iterable[Vertex],
                   boundary: BoundarySpec | None = None) -> Configuration:
    minus = set(minus)
    spins = {x: (-1 if x in minus else 1) for x in tree.enumerate_volume(k, n)}
    return Configuration(k, n, spins, boundary or BoundarySpec.plus())


def from_index(k: int, n: int, index: int, boundary: BoundarySpec | None = None) -> Configuration:
    """Configuration whose bit ``v`` of ``index`` marks vertex ``v`` (canonical
    order) as -1."""
    verts = tree.enumerate_volume(k, n)
    spins = {x: (-1 if (index >> v) & 1 else 1) for v, x in enumerate(verts)}
    return Configuration(k, n, spins, boundary or BoundarySpec.plus())


# --- configuration families -------------------------------------------------

FAMILIES = ("constant", "ha_periodic", "ha_weakly_periodic", "alternating")


def _check_family_args(kind, k, extra):
    if kind not in FAMILIES:
        raise CayleyIsingError(f"unknown configuration family {kind!r}")
    for key, value in extra.items():
        if key.startswith("l") or key in ("s", "s_even"):
            if value not in (1, -1):
                raise CayleyIsingError(f"{key} must be +1 or -1, got {value!r}")
    if kind in ("ha_periodic", "ha_weakly_periodic"):
        A = frozenset(extra.get("A", ()))
        if not A or not A <= set(range(1, k + 2)):
            raise InvalidSubgroupError(f"A must be a nonempty subset of 1..{k + 1}")


def family_spin(kind: str, x: Vertex, k: int, **extra) -> int:
    if kind == "constant":
        return extra["s"]
    if kind == "alternating":
        s = extra["s_even"]
        return s if len(x) % 2 == 0 else -s
    A = extra["A"]
    if kind == "ha_periodic":
        return extra["l1"] if tree.subgroup_membership(x, A) else extra["l0"]
    if kind == "ha_weakly_periodic":
        if not x:
            # the root has no predecessor; it takes the (H0, H0) value
            return extra["l00"]
        i = tree.subgroup_membership(tree.parent(x), A)
        j = tree.subgroup_membership(x, A)
        return extra[f"l{i}{j}"]
    raise CayleyIsingError(f"unknown configuration family {kind!r}")


def generate(kind: str, k: int, n: int, **extra) -> Configuration:
    """Truncation to V_n of a family configuration, with the family itself
    continued on V_{n+2} as boundary."""
    if "A" in extra:
        extra["A"] = frozenset(extra["A"])
    _check_family_args(kind, k, extra)
    spins = {x: family_spin(kind, x, k, **extra) for x in tree.enumerate_volume(k, n)}
    if kind == "constant":
        boundary = BoundarySpec.constant(extra["s"])
    else:
        outside = tree.enumerate_volume(k, n + 2)[tree.volume_size(k, n):]
        boundary = BoundarySpec.explicit({x: family_spin(kind, x, k, **extra) for x in outside})
    return Configuration(k, n, spins, boundary)


# --- Hamiltonians ------------------------------------------------------------

def conditional_form(config: Configuration, ball_radius: int | None = None) -> LinearForm:
    """Coefficients of the sum of ball energies over centers in V_R
    (default R = n + 1, i.e. every ball meeting V_n)."""
    R = config.n + 1 if ball_radius is None else ball_radius
    total = LinearForm()
    for c in tree.enumerate_volume(config.k, R):
        s, nb = config.ball(c)
        total = total + ball_form(s, nb, len(c) % 2)
    return total


def conditional_hamiltonian(config: Configuration, J: AnyCouplings,
                            ball_radius: int | None = None) -> Fraction:
    return conditional_form(config, ball_radius).evaluate(J)


def ball_sum(config: Configuration, J: AnyCouplings, centers: Iterable[Vertex]) -> Fraction:
    table = energy_table(J, config.k)
    periodic = is_periodic(J)
    total = Fraction(0)
    for c in centers:
        s, nb = config.ball(c)
        total += table[class_of_ball(s, nb, config.k, len(c) % 2 if periodic else None)]
    return total


def truncated_direct_hamiltonian(config: Configuration, J: AnyCouplings,
                                 n: int | None = None) -> Fraction:
    """Edge, distance-two and field sums restricted so that the result equals
    the sum of ball energies over centers in V_n."""
    k = config.k
    n = config.n if n is None else n
    sp = config.spin
    edges = Fraction(0)
    for x in tree.enumerate_volume(k, n)[1:]:
        edges += sp(x) * sp(tree.parent(x))
    for x in tree.sphere(k, n + 1):
        edges += Fraction(sp(x) * sp(tree.parent(x)), 2)
    pairs = 0
    field_sum = Fraction(0)
    for m in tree.enumerate_volume(k, n):
        nb = [sp(y) for y in tree.neighbors(m, k)]
        pairs += sum(nb[i] * nb[j] for i in range(len(nb)) for j in range(i + 1, len(nb)))
        field_sum += J.field(len(m) % 2) * sp(m)
    return J.j1 * edges + J.j2 * pairs + field_sum


def _same_support(sigma: Configuration, phi: Configuration):
    if (sigma.k, sigma.n) != (phi.k, phi.n):
        raise PreconditionError("configurations live on different volumes")
    if sigma.boundary.kind != phi.boundary.kind or (
        sigma.boundary.kind == "explicit" and sigma.boundary.values != phi.boundary.values
    ):
        raise PreconditionError("configurations must share the same boundary condition")


def differing_vertices(sigma: Configuration, phi: Configuration) -> list[Vertex]:
    _same_support(sigma, phi)
    return [x for x in tree.enumerate_volume(sigma.k, sigma.n) if sigma.spin(x) != phi.spin(x)]


def relative_hamiltonian(sigma: Configuration, phi: Configuration, J: AnyCouplings) -> Fraction:
    """Energy difference from the edge, distance-two and field sums over the
    terms that touch a vertex where the two configurations differ."""
    k = sigma.k
    diff = differing_vertices(sigma, phi)
    edges = set()
    pairs = set()
    for x in diff:
        for y in tree.neighbors(x, k):
            edges.add(tree.make_edge(x, y))
            for z in tree.neighbors(y, k):
                if z != x:
                    pairs.add(tree.make_edge(x, z))
    d_edges = sum(sigma.spin(x) * sigma.spin(y) - phi.spin(x) * phi.spin(y) for x, y in edges)
    d_pairs = sum(sigma.spin(x) * sigma.spin(y) - phi.spin(x) * phi.spin(y) for x, y in pairs)
    d_field = sum(J.field(len(x) % 2) * (sigma.spin(x) - phi.spin(x)) for x in diff)
    return J.j1 * d_edges + J.j2 * d_pairs + d_field


def relative_ball_sum(sigma: Configuration, phi: Configuration, J: AnyCouplings) -> Fraction:
    diff = differing_vertices(sigma, phi)
    centers = set(diff)
    for x in diff:
        centers.update(tree.neighbors(x, sigma.k))
    return ball_sum(sigma, J, centers) - ball_sum(phi, J, centers)


# --- ground states -------------------------------------------------------------

def ground_state_audit(config: Configuration, J: AnyCouplings, depth: int = 3) -> GroundStateReport:
    """Check every ball centered in V_depth against the minimal class energy."""
    k = config.k
    table = energy_table(J, k)
    lo = min(table.values())
    periodic = is_periodic(J)
    offending = []
    realized = set()
    for c in tree.enumerate_volume(k, depth):
        s, nb = config.ball(c)
        cls = class_of_ball(s, nb, k, len(c) % 2 if periodic else None)
        realized.add(cls)
        if table[cls] != lo:
            offending.append((c, cls, table[cls], lo))
    return GroundStateReport(not offending, offending, frozenset(realized), lo)


def _family_classes(kind, s, k, periodic):
    if kind == "constant":
        if periodic:
            return {BallClass(s, 0, 0), BallClass(s, 0, 1)}
        return {BallClass(s, 0)}
    if periodic:
        return {BallClass(s, k + 1, 0), BallClass(-s, k + 1, 1)}
    return {BallClass(s, k + 1), BallClass(-s, k + 1)}


def ground_state_families(J: AnyCouplings, k: int) -> list[tuple[str, dict]]:
    """The complete ground-state set where it is determined.

    If every minimal class is monochrome (i = 0) each ground state is constant;
    if every minimal class has all neighbours opposite (i = k+1) each ground
    state alternates by word length. Otherwise the set is not classified here.
    """
    mins = minimal_classes(J, k)
    periodic = is_periodic(J)
    if all(c.i == 0 for c in mins):
        kind, key = "constant", "s"
    elif all(c.i == k + 1 for c in mins):
        kind, key = "alternating", "s_even"
    else:
        raise UnsupportedError(
            "the ground-state set is not classified at this parameter point")
    fams = [(kind, {key: s}) for s in (1, -1) if _family_classes(kind, s, k, periodic) <= mins]
    if not fams:
        raise UnsupportedError("no ground state exists at this parameter point")
    return fams


def _improper(config: Configuration, families, centers) -> frozenset:
    k = config.k
    out = set()
    for c in centers:
        ball = tree.ball_vertices(c, k)
        seen = [config.spin(x) for x in ball]
        if all(seen != [family_spin(kind, x, k, **extra) for x in ball] for kind, extra in families):
            out.add(c)
    return frozenset(out)


def improper_boundary(config: Configuration, J: AnyCouplings) -> frozenset:
    """Centers (within V_{n+1}) of balls that match no ground state."""
    families = ground_state_families(J, config.k)
    return _improper(config, families, tree.enumerate_volume(config.k, config.n + 1))


@dataclass
class PeierlsReport:
    radius: int
    lambda0: Fraction
    total: int
    satisfied: int
    violations: list
    min_ratio: Fraction | None
    argmin: frozenset | None  # minus set attaining min_ratio (for +1 ground state)

    @property
    def ok(self) -> bool:
        return not self.violations


def peierls_verify(J: Couplings, radius: int, k: int = 2, cap: int = PEIERLS_CAP) -> PeierlsReport:
    """Exhaustively compare H(sigma, phi) with lambda0 * |boundary| for every
    sigma equal to the constant ground state outside V_radius."""
    if not in_peierls_region(J, k):
        raise PreconditionError("couplings are outside the Peierls region")
    size = tree.volume_size(k, radius)
    if 2**size > cap:
        raise ResourceError(f"2^{size} configurations exceed the cap {cap}", cap)
    s = 1 if J.alpha < 0 else -1
    lam = lambda0(J, k)
    phi = generate("constant", k, radius, s=s)
    families = [("constant", {"s": s})]
    centers = tree.enumerate_volume(k, radius + 1)
    verts = tree.enumerate_volume(k, radius)
    violations = []
    satisfied = 0
    best = None
    best_set = None
    for index in range(2**size):
        spins = {x: (-s if (index >> v) & 1 else s) for v, x in enumerate(verts)}
        sigma = Configuration(k, radius, spins, phi.boundary)
        h = relative_hamiltonian(sigma, phi, J)
        nb = len(_improper(sigma, families, centers))
        if h >= lam * nb:
            satisfied += 1
        else:
            violations.append((index, h, nb))
        if nb:
            ratio = h / nb
            if best is None or ratio < best:
                best = ratio
                best_set = frozenset(x for x, v in spins.items() if v != s)
    return PeierlsReport(radius, lam, 2**size, satisfied, violations, best, best_set)


# --- file format -----------------------------------------------------------------

def config_to_dict(config: Configuration) -> dict:
    if config.boundary.kind == "explicit":
        boundary = {tree.vertex_to_str(x): s for x, s in
                    sorted(config.boundary.values.items(), key=lambda kv: tree.vertex_key(kv[0]))}
    else:
        boundary = config.boundary.kind
    spins = {tree.vertex_to_str(x): config.spins[x] for x in tree.enumerate_volume(config.k, config.n)}
    return {"k": config.k, "n": config.n, "boundary": boundary, "spins": spins}


def config_from_dict(data: Mapping) -> Configuration:
    try:
        k = int(data["k"])
        n = int(data["n"])
        raw_boundary = data.get("boundary", "plus")
        raw_spins = data["spins"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CayleyIsingError(f"malformed configuration: {exc}") from None
    if k < 1 or n < 0:
        raise CayleyIsingError("need k >= 1 and n >= 0")
    if isinstance(raw_boundary, str):
        if raw_boundary not in ("plus", "minus"):
            raise CayleyIsingError(f"unknown boundary kind {raw_boundary!r}")
        boundary = BoundarySpec(raw_boundary)
    elif isinstance(raw_boundary, Mapping):
        boundary = BoundarySpec.explicit(
            {tree.vertex_from_str(key, k): _spin(v) for key, v in raw_boundary.items()})
    else:
        raise CayleyIsingError("boundary must be 'plus', 'minus' or an object")
    spins = {tree.vertex_from_str(key, k): _spin(v) for key, v in raw_spins.items()}
    expected = set(tree.enumerate_volume(k, n))
    if set(spins) != expected:
        raise CayleyIsingError(f"spins must cover exactly the {len(expected)} vertices of V_{n}")
    return Configuration(k, n, spins, boundary)


def _spin(v) -> int:
    if isinstance(v, bool) or v not in (1, -1):
        raise CayleyIsingError(f"spin values must be 1 or -1, got {v!r}")
    return int(v)


def dump_config(config: Configuration) -> str:
    return json.dumps(config_to_dict(config), indent=1)


def load_config(text: str) -> Configuration:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CayleyIsingError(f"configuration file is not valid JSON: {exc}") from None
    if not isinstance(data, Mapping):
        raise CayleyIsingError("configuration file must hold a JSON object")
    return config_from_dict(data)
