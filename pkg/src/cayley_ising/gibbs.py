"""Exact finite-volume Gibbs distributions by exhaustive enumeration.

Every configuration on V_n contributes an integer coefficient vector
(a, b, c_even, c_odd) for its conditional energy. Enumeration only builds a
histogram of those vectors (with the root spin attached), so it is independent
of the couplings and of beta; probabilities are then log-sum-exp sums over the
histogram. Histogram merging is integer addition, hence exact and independent
of chunking or worker count.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from cayley_ising import tree
from cayley_ising.configurations import BoundarySpec, from_index
from cayley_ising.contours import Contour, all_contours, extract_contours
from cayley_ising.errors import DomainError, PreconditionError, ResourceError
from cayley_ising.kernels import get_backend
from cayley_ising.model import (
    AnyCouplings,
    Couplings,
    LinearForm,
    RegionLabel,
    lambda0,
    region_membership,
)

DEFAULT_CAP = 2**24
CHUNK = 2**16
EVENT_CAP = 2**16  # event predicates and contour events run per configuration


@dataclass(frozen=True)
class GibbsSpec:
    k: int
    n: int
    couplings: AnyCouplings
    beta: float
    boundary: BoundarySpec = field(default_factory=BoundarySpec.plus)
    ball_radius: int | None = None

    @property
    def radius(self) -> int:
        return self.n + 1 if self.ball_radius is None else self.ball_radius


@dataclass
class GibbsResult:
    log_partition: float
    root_marginal_plus: float
    events: dict = field(default_factory=dict)

    @property
    def root_marginal_minus(self) -> float:
        return 1.0 - self.root_marginal_plus


def _kernel_inputs(k, n, boundary, radius):
    geo = tree.geometry(k, radius + 1)
    nfree = tree.volume_size(k, n)
    base = np.ones(len(geo.vertices), dtype=np.int8)
    for v in range(nfree, len(geo.vertices)):
        base[v] = boundary.value(geo.vertices[v])
    balls = np.ascontiguousarray(np.array(geo.balls, dtype=np.int32))
    parity = np.array([geo.parity[b[0]] for b in geo.balls], dtype=np.int8)
    return nfree, base, balls, parity


class _Packer:
    """Packs (a, b, c_even, c_odd, root_bit) into one int64 and back."""

    def __init__(self, k, nballs):
        self.ba = (k + 1) * nballs
        self.bb = (k * (k + 1) // 2) * nballs
        self.bc = nballs
        self.wb = 2 * self.bb + 1
        self.wc = 2 * self.bc + 1

    def pack(self, forms, root_bit):
        f = forms.astype(np.int64)
        key = f[:, 0] + self.ba
        key = key * self.wb + (f[:, 1] + self.bb)
        key = key * self.wc + (f[:, 2] + self.bc)
        key = key * self.wc + (f[:, 3] + self.bc)
        return key * 2 + root_bit

    def unpack(self, key):
        key = int(key)
        root_bit = key % 2
        key //= 2
        co = key % self.wc - self.bc
        key //= self.wc
        ce = key % self.wc - self.bc
        key //= self.wc
        b = key % self.wb - self.bb
        a = key // self.wb - self.ba
        return LinearForm(a, b, ce, co), root_bit


@dataclass
class DensityOfStates:
    """Counts of (energy coefficients, root spin) over all configurations."""

    k: int
    n: int
    radius: int
    packer: _Packer
    total: Counter
    events: dict = field(default_factory=dict)

    def terms(self, counter=None):
        counter = self.total if counter is None else counter
        for key in sorted(counter):
            form, root_bit = self.packer.unpack(key)
            yield form, root_bit, counter[key]


def _spins_matrix(start, stop, nfree):
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(nfree, dtype=np.int64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


_DOS_CACHE: dict = {}


def density_of_states(k: int, n: int, boundary: BoundarySpec | None = None,
                      ball_radius: int | None = None,
                      events: Mapping[str, Callable] | None = None,
                      cap: int = DEFAULT_CAP, backend: str | None = None,
                      workers: int = 1) -> DensityOfStates:
    """Enumerate all 2^|V_n| configurations in fixed chunks.

    ``events`` maps names to predicates that take an int8 array of shape
    (chunk, |V_n|) with columns in canonical vertex order and return a boolean
    mask.
    """
    boundary = boundary or BoundarySpec.plus()
    radius = n + 1 if ball_radius is None else ball_radius
    if radius < n + 1:
        raise ValueError("the ball set must cover every ball meeting V_n")
    nfree = tree.volume_size(k, n)
    total = 2**nfree
    if total > cap:
        raise ResourceError(f"2^{nfree} configurations exceed the enumeration cap {cap}", cap)
    if events and total > EVENT_CAP:
        raise ResourceError(f"event predicates are limited to {EVENT_CAP} configurations", EVENT_CAP)
    cache_key = None
    if not events and boundary.kind != "explicit":
        cache_key = (k, n, boundary.kind, radius, backend)
        if cache_key in _DOS_CACHE:
            return _DOS_CACHE[cache_key]

    kern = get_backend(backend)
    nfree, base, balls, parity = _kernel_inputs(k, n, boundary, radius)
    packer = _Packer(k, len(balls))
    events = dict(events or {})

    def run(bounds):
        start, stop = bounds
        forms = kern.ball_forms(start, stop, base, nfree, balls, parity)
        root_bit = np.arange(start, stop, dtype=np.int64) & 1
        keys = packer.pack(np.asarray(forms), root_bit)
        uniq, cnt = np.unique(keys, return_counts=True)
        out = {"": Counter(dict(zip(uniq.tolist(), cnt.tolist())))}
        if events:
            spins = _spins_matrix(start, stop, nfree)
            for name, pred in events.items():
                mask = np.asarray(pred(spins), dtype=bool)
                u, c = np.unique(keys[mask], return_counts=True)
                out[name] = Counter(dict(zip(u.tolist(), c.tolist())))
        return out

    bounds = [(s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    hist = Counter()
    ev = {name: Counter() for name in events}
    for part in parts:
        hist.update(part[""])
        for name in events:
            ev[name].update(part[name])
    dos = DensityOfStates(k, n, radius, packer, hist, ev)
    if cache_key is not None:
        _DOS_CACHE[cache_key] = dos
    return dos


def _log_weights(dos, counter, J, beta, energy_cache):
    out = []
    for form, root_bit, count in dos.terms(counter):
        h = energy_cache.get(form)
        if h is None:
            h = energy_cache[form] = float(form.evaluate(J))
        out.append((math.log(count) - beta * h, root_bit))
    return out


def _logsumexp(values):
    if not values:
        return -math.inf
    m = max(values)
    return m + math.log(math.fsum(math.exp(v - m) for v in values))


def gibbs_from_density(dos: DensityOfStates, J: AnyCouplings, beta: float) -> GibbsResult:
    beta = float(beta)
    cache: dict = {}
    terms = _log_weights(dos, None, J, beta, cache)
    log_z = _logsumexp([w for w, _ in terms])
    log_plus = _logsumexp([w for w, bit in terms if bit == 0])
    events = {}
    for name, counter in dos.events.items():
        ev_terms = _log_weights(dos, counter, J, beta, cache)
        events[name] = math.exp(_logsumexp([w for w, _ in ev_terms]) - log_z)
    return GibbsResult(log_z, math.exp(log_plus - log_z), events)


def _check_beta(beta, allow_zero=False):
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0 or (beta == 0 and not allow_zero):
        raise DomainError(f"inverse temperature must be positive, got {beta}")
    return beta


def exact_gibbs(spec: GibbsSpec, events: Mapping[str, Callable] | None = None,
                cap: int = DEFAULT_CAP, backend: str | None = None,
                workers: int = 1) -> GibbsResult:
    beta = _check_beta(spec.beta)
    dos = density_of_states(spec.k, spec.n, spec.boundary, spec.ball_radius, events, cap,
                            backend, workers)
    return gibbs_from_density(dos, spec.couplings, beta)


# --- contour probabilities ---------------------------------------------------

_CONTOUR_INDEX: dict = {}


def contour_index(k: int, n: int, cap: int = EVENT_CAP) -> dict:
    """Map every contour realisable on V_n to the configuration indices
    (+1 boundary) that contain it."""
    key = (k, n)
    if key in _CONTOUR_INDEX:
        return _CONTOUR_INDEX[key]
    size = tree.volume_size(k, n)
    if 2**size > cap:
        raise ResourceError(f"2^{size} configurations exceed the contour enumeration cap {cap}", cap)
    index: dict[Contour, list] = {}
    for i in range(2**size):
        for g in extract_contours(from_index(k, n, i)):
            index.setdefault(g, []).append(i)
    out = {g: np.array(v, dtype=np.int64) for g, v in index.items()}
    _CONTOUR_INDEX[key] = out
    return out


@dataclass
class PPlusResult:
    gamma: Contour
    value: float
    size: int
    lambda0: Fraction
    bound: float

    @property
    def holds(self) -> bool:
        return self.value <= self.bound


def _config_energies(spec, backend):
    nfree, base, balls, parity = _kernel_inputs(spec.k, spec.n, spec.boundary, spec.radius)
    forms = np.asarray(get_backend(backend).ball_forms(0, 2**nfree, base, nfree, balls, parity))
    cache = {}
    energies = np.empty(len(forms))
    for i, row in enumerate(forms):
        form = LinearForm(*map(int, row))
        h = cache.get(form)
        if h is None:
            h = cache[form] = float(form.evaluate(spec.couplings))
        energies[i] = h
    return energies


def _check_plus_spec(spec):
    J = spec.couplings
    if not isinstance(J, Couplings) or not region_membership(
        J, spec.k, RegionLabel(1, 0, interior=True)
    ):
        raise PreconditionError("contour probabilities need couplings in int A_{+,0}")
    if spec.boundary.kind != "plus":
        raise PreconditionError("contour probabilities use the +1 boundary condition")


def p_plus_all(spec: GibbsSpec, backend: str | None = None) -> dict:
    """p_+(gamma) with its bound exp(-beta*lambda0*|gamma|) for every contour
    realisable on V_n."""
    _check_plus_spec(spec)
    beta = _check_beta(spec.beta)
    lam = lambda0(spec.couplings, spec.k)
    sizes = all_contours(spec.k, spec.n)
    index = contour_index(spec.k, spec.n)
    logw = -beta * _config_energies(spec, backend)
    m = logw.max()
    w = np.exp(logw - m)
    z = math.fsum(w.tolist())
    out = {}
    for g, idx in index.items():
        value = math.fsum(w[idx].tolist()) / z
        out[g] = PPlusResult(g, value, sizes[g], lam, math.exp(-beta * float(lam) * sizes[g]))
    return out


def p_plus(gamma: Contour, spec: GibbsSpec, backend: str | None = None) -> PPlusResult:
    _check_plus_spec(spec)
    results = p_plus_all(spec, backend)
    if gamma not in results:
        raise PreconditionError("gamma is not realisable inside V_n")
    return results[gamma]


# --- two boundary conditions ----------------------------------------------------

def two_phase_report(n: int, J: Couplings, betas, k: int = 2, backend: str | None = None,
                     cap: int = DEFAULT_CAP, workers: int = 1) -> list[dict]:
    """Root marginals under +1 and -1 boundaries at J and at (J1, J2, -alpha)."""
    inside_plus = region_membership(J, k, RegionLabel(1, 0, interior=True))
    inside_minus = region_membership(J, k, RegionLabel(-1, 0, interior=True))
    if not (inside_plus or inside_minus):
        raise PreconditionError("couplings must lie in int A_{+,0} or int A_{-,0}")
    dos = {
        bc: density_of_states(k, n, BoundarySpec(bc), cap=cap, backend=backend, workers=workers)
        for bc in ("plus", "minus")
    }
    rows = []
    for beta in betas:
        beta = _check_beta(beta)
        res = {}
        for point, couplings in (("given", J), ("mirrored", J.flipped())):
            for bc in ("plus", "minus"):
                res[point, bc] = gibbs_from_density(dos[bc], couplings, beta)
        for point, couplings in (("given", J), ("mirrored", J.flipped())):
            other = "mirrored" if point == "given" else "given"
            for bc in ("plus", "minus"):
                flip_bc = "minus" if bc == "plus" else "plus"
                mirror = res[other, flip_bc].root_marginal_minus
                r = res[point, bc]
                rows.append({
                    "beta": beta,
                    "point": point,
                    "couplings": couplings.as_strings(),
                    "boundary": bc,
                    "log_partition": r.log_partition,
                    "root_marginal_plus": r.root_marginal_plus,
                    "symmetry_gap": abs(r.root_marginal_plus - mirror),
                })
    return rows


# --- Metropolis sampler -------------------------------------------------------------

@dataclass
class MCMCResult:
    root_marginal_plus: float
    stderr: float
    sweeps: int
    burn_in: int
    seed: int


def _acceptance_table(J, k, beta):
    deg, deg2 = k + 1, k * (k + 1)
    table = np.empty((2, 2, 2 * deg + 1, 2 * deg2 + 1))
    for p in (0, 1):
        for si, s in enumerate((-1, 1)):
            for n1 in range(-deg, deg + 1):
                for n2 in range(-deg2, deg2 + 1):
                    delta = -2 * s * (J.j1 * n1 + J.j2 * n2 + J.field(p))
                    table[p, si, n1 + deg, n2 + deg2] = (
                        1.0 if delta <= 0 else math.exp(-beta * float(delta)))
    return table


def mcmc_sample(spec: GibbsSpec, sweeps: int, seed: int, burn_in: int | None = None,
                batches: int = 50, backend: str | None = None,
                block: int = 10_000) -> MCMCResult:
    """Single-site Metropolis on V_n; one sweep is |V_n| updates at
    uniformly chosen sites."""
    beta = _check_beta(spec.beta, allow_zero=True)
    if sweeps < 1:
        raise ValueError("need at least one sweep")
    if spec.ball_radius not in (None, spec.n + 1):
        raise ValueError("the sampler uses the default ball set")
    k, n = spec.k, spec.n
    geo = tree.geometry(k, n + 2)
    nfree = tree.volume_size(k, n)
    idx = geo.index
    nn = np.array([[idx[y] for y in tree.neighbors(x, k)] for x in geo.vertices[:nfree]],
                  dtype=np.int32)
    nnn = np.array([[idx[z] for y in tree.neighbors(x, k) for z in tree.neighbors(y, k) if z != x]
                    for x in geo.vertices[:nfree]], dtype=np.int32)
    parity = np.array(geo.parity[:nfree], dtype=np.int8)
    accept = _acceptance_table(spec.couplings, k, beta)
    rng = np.random.default_rng(seed)
    spins = np.empty(len(geo.vertices), dtype=np.int8)
    spins[:nfree] = rng.choice(np.array([-1, 1], dtype=np.int8), size=nfree)
    for v in range(nfree, len(geo.vertices)):
        spins[v] = spec.boundary.value(geo.vertices[v])
    kern = get_backend(backend)
    trace = []
    done = 0
    while done < sweeps:
        m = min(block, sweeps - done)
        sites = rng.integers(0, nfree, size=(m, nfree), dtype=np.int32)
        u = rng.random((m, nfree))
        trace.append(np.asarray(kern.metropolis(spins, nn, nnn, parity, accept, sites, u)))
        done += m
    trace = np.concatenate(trace)
    burn = sweeps // 10 if burn_in is None else burn_in
    kept = (trace[burn:] == 1).astype(float)
    if len(kept) == 0:
        raise ValueError("burn-in consumes every sweep")
    nb = max(2, min(batches, len(kept)))
    means = np.array([chunk.mean() for chunk in np.array_split(kept, nb)])
    return MCMCResult(float(kept.mean()), float(means.std(ddof=1) / math.sqrt(nb)),
                      sweeps, burn, seed)
