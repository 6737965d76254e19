"""Unit-ball energies, phase regions and the Peierls gap.

Every ball energy is an integer linear form over the basis
``(J1/2, J2, field on even vertices, field on odd vertices)``. The constant
field model is the special case where both field entries equal ``alpha``;
comparisons are done after substituting exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple, Sequence, Union

from cayley_ising.errors import InvalidBallError, InvalidClassError, UnsupportedError


def to_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, float or a string like "-3/2"."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not couplings")
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not an exact rational: {value!r}") from None
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


@dataclass(frozen=True)
class Couplings:
    j1: Fraction
    j2: Fraction
    alpha: Fraction

    def __post_init__(self):
        for name in ("j1", "j2", "alpha"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))

    def field(self, parity: int) -> Fraction:
        return self.alpha

    def flipped(self) -> "Couplings":
        return Couplings(self.j1, self.j2, -self.alpha)

    def as_strings(self) -> dict:
        return {"j1": str(self.j1), "j2": str(self.j2), "alpha": str(self.alpha)}


@dataclass(frozen=True)
class PeriodicCouplings:
    """Field ``alpha0`` on even-length words, ``alpha1`` on odd ones."""

    j1: Fraction
    j2: Fraction
    alpha0: Fraction
    alpha1: Fraction

    def __post_init__(self):
        for name in ("j1", "j2", "alpha0", "alpha1"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))

    def field(self, parity: int) -> Fraction:
        return self.alpha0 if parity == 0 else self.alpha1

    def flipped(self) -> "PeriodicCouplings":
        return PeriodicCouplings(self.j1, self.j2, -self.alpha0, -self.alpha1)

    def as_strings(self) -> dict:
        return {
            "j1": str(self.j1),
            "j2": str(self.j2),
            "alpha0": str(self.alpha0),
            "alpha1": str(self.alpha1),
        }


AnyCouplings = Union[Couplings, PeriodicCouplings]


def is_periodic(J) -> bool:
    return isinstance(J, PeriodicCouplings)


class BallClass(NamedTuple):
    """Center spin, number of disagreeing neighbours, and (periodic model
    only) the sublattice of the center."""

    epsilon: int
    i: int
    j: int | None = None

    def label(self) -> str:
        sign = "+" if self.epsilon > 0 else "-"
        if self.j is None:
            return f"({sign},{self.i})"
        return f"({sign},{self.i},{self.j})"


@dataclass(frozen=True)
class LinearForm:
    """``a*J1/2 + b*J2 + c_even*alpha_even + c_odd*alpha_odd``."""

    a: int = 0
    b: int = 0
    c_even: int = 0
    c_odd: int = 0

    @property
    def c(self) -> int:
        return self.c_even + self.c_odd

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(
            self.a + other.a,
            self.b + other.b,
            self.c_even + other.c_even,
            self.c_odd + other.c_odd,
        )

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + other.scale(-1)

    def scale(self, m: int) -> "LinearForm":
        return LinearForm(m * self.a, m * self.b, m * self.c_even, m * self.c_odd)

    def evaluate(self, J: AnyCouplings) -> Fraction:
        return (
            Fraction(self.a) * J.j1 / 2
            + self.b * J.j2
            + self.c_even * J.field(0)
            + self.c_odd * J.field(1)
        )


EnergyCoefficients = LinearForm


@dataclass(frozen=True)
class RegionLabel:
    epsilon: int
    m: int
    j: int | None = None
    interior: bool = False

    @property
    def ball_class(self) -> BallClass:
        return BallClass(self.epsilon, self.m, self.j)


def _check_spin(s):
    if s not in (1, -1):
        raise InvalidBallError(f"spin values must be +1 or -1, got {s!r}")


def class_of_ball(center_spin: int, neighbor_spins: Sequence[int], k: int,
                  parity: int | None = None) -> BallClass:
    if len(neighbor_spins) != k + 1:
        raise InvalidBallError(
            f"a ball on the order-{k} tree has {k + 1} neighbours, got {len(neighbor_spins)}")
    _check_spin(center_spin)
    for s in neighbor_spins:
        _check_spin(s)
    i = sum(1 for s in neighbor_spins if s != center_spin)
    return BallClass(center_spin, i, parity)


def class_energy(cls: BallClass, k: int) -> LinearForm:
    """Closed-form coefficients of the class energy U_{eps,i} (or U^{(j)})."""
    eps, i, j = cls
    if eps not in (1, -1):
        raise InvalidClassError(f"epsilon must be +1 or -1, got {eps!r}")
    if not 0 <= i <= k + 1:
        raise InvalidClassError(f"class index {i} outside 0..{k + 1}")
    if j not in (None, 0, 1):
        raise InvalidClassError(f"sublattice index must be 0 or 1, got {j!r}")
    a = k + 1 - 2 * i
    b = k * (k + 1) // 2 + 2 * i * (i - k - 1)
    if j == 1:
        return LinearForm(a, b, 0, eps)
    return LinearForm(a, b, eps, 0)


def class_energy_periodic(cls: BallClass, k: int) -> LinearForm:
    if cls.j not in (0, 1):
        raise InvalidClassError("periodic-field classes need a sublattice index j")
    return class_energy(cls, k)


def ball_form(center_spin: int, neighbor_spins: Sequence[int], parity: int = 0) -> LinearForm:
    """Integer coefficients of the ball energy, read off the spin products."""
    s = sum(neighbor_spins)
    pairs = (s * s - len(neighbor_spins)) // 2
    if parity:
        return LinearForm(center_spin * s, pairs, 0, center_spin)
    return LinearForm(center_spin * s, pairs, center_spin, 0)


def ball_energy(center_spin: int, neighbor_spins: Sequence[int], J: AnyCouplings, k: int,
                parity: int = 0) -> Fraction:
    """Direct evaluation of the ball energy from nearest-neighbour and
    distance-two products; each neighbour pair is counted once."""
    if len(neighbor_spins) != k + 1:
        raise InvalidBallError(
            f"a ball on the order-{k} tree has {k + 1} neighbours, got {len(neighbor_spins)}")
    nn = sum(x * center_spin for x in neighbor_spins)
    nnn = sum(x * y for x, y in combinations(neighbor_spins, 2))
    return J.j1 * nn / 2 + J.j2 * nnn + J.field(parity) * center_spin


def all_classes(k: int, periodic: bool = False) -> list[BallClass]:
    if periodic:
        return [BallClass(eps, i, j) for j in (0, 1) for i in range(k + 2) for eps in (1, -1)]
    return [BallClass(eps, i) for i in range(k + 2) for eps in (1, -1)]


def _integer_basis(J: AnyCouplings):
    # numerators of (J1/2, J2, field_even, field_odd) over a common denominator
    basis = (J.j1 / 2, J.j2, J.field(0), J.field(1))
    d = math.lcm(*(x.denominator for x in basis))
    return [x.numerator * (d // x.denominator) for x in basis], d


def energy_table(J: AnyCouplings, k: int) -> dict[BallClass, Fraction]:
    (p, q, r0, r1), d = _integer_basis(J)
    out = {}
    for c in all_classes(k, is_periodic(J)):
        f = class_energy(c, k)
        out[c] = Fraction(f.a * p + f.b * q + f.c_even * r0 + f.c_odd * r1, d)
    return out


def energy_table_periodic(P: PeriodicCouplings, k: int) -> dict[BallClass, Fraction]:
    return energy_table(P, k)


def minimum_energy(J: AnyCouplings, k: int) -> Fraction:
    return min(energy_table(J, k).values())


def minimal_classes(J: AnyCouplings, k: int) -> frozenset[BallClass]:
    table = energy_table(J, k)
    lo = min(table.values())
    return frozenset(c for c, u in table.items() if u == lo)


def minimal_classes_periodic(P: PeriodicCouplings, k: int) -> frozenset[BallClass]:
    return minimal_classes(P, k)


def lambda0(J: AnyCouplings, k: int) -> Fraction:
    """Gap between the smallest and second-smallest class energy value;
    zero when all class energies coincide."""
    values = set(energy_table(J, k).values())
    lo = min(values)
    rest = values - {lo}
    if not rest:
        return Fraction(0)
    return min(rest) - lo


def _le(x, y, strict):
    return x < y if strict else x <= y


def _base_region(j1, j2, k, m, strict) -> bool:
    # shared (J1, J2) inequalities; the sign condition is added by callers
    if m == 0:
        return _le(j1, 0, strict) and _le(j1 + 2 * k * j2, 0, strict)
    if m == k + 1:
        return _le(0, j1, strict) and _le(0, j1 - 2 * k * j2, strict)
    return (
        _le(0, j2, strict)
        and _le(2 * (2 * m - k - 2) * j2, j1, strict)
        and _le(j1, 2 * (2 * m - k) * j2, strict)
    )


def region_membership(J: AnyCouplings, k: int, label: RegionLabel) -> bool:
    """Closed-form inequalities for A_{eps,m} (or its interior)."""
    if is_periodic(J):
        return region_membership_periodic(J, label, k)
    if label.epsilon not in (1, -1) or not 0 <= label.m <= k + 1:
        raise InvalidClassError(f"invalid region label {label}")
    strict = label.interior
    return _base_region(J.j1, J.j2, k, label.m, strict) and _le(
        label.epsilon * J.alpha, 0, strict)


def region_membership_periodic(P: PeriodicCouplings, label: RegionLabel, k: int = 2) -> bool:
    if k != 2:
        raise UnsupportedError("closed-form periodic-field regions are only known for k = 2")
    if label.j not in (0, 1):
        raise InvalidClassError("periodic region labels need a sublattice index j")
    if label.epsilon not in (1, -1) or not 0 <= label.m <= k + 1:
        raise InvalidClassError(f"invalid region label {label}")
    strict = label.interior
    own, other = (P.alpha0, P.alpha1) if label.j == 0 else (P.alpha1, P.alpha0)
    pull = -label.epsilon * own
    return (
        _base_region(P.j1, P.j2, k, label.m, strict)
        and _le(0, pull, strict)
        and _le(abs(other), pull, strict)
    )


def region_labels(J: AnyCouplings, k: int, interior: bool = False) -> list[RegionLabel]:
    """All labels whose closed-form region contains ``J``."""
    periodic = is_periodic(J)
    out = []
    for c in all_classes(k, periodic):
        label = RegionLabel(c.epsilon, c.i, c.j, interior)
        if region_membership(J, k, label):
            out.append(label)
    return out


def in_peierls_region(J: Couplings, k: int = 2) -> bool:
    if k != 2:
        raise UnsupportedError("the Peierls region is characterised for k = 2 only")
    return J.j1 < 0 and J.j1 + 4 * J.j2 < 0 and J.alpha != 0
