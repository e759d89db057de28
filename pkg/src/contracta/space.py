"""One-dimensional b-metric spaces, deterministic sampling and axiom audits."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DomainError, EvaluationError
from .expr import Expression

TAU_EQ = 1e-12
DEFAULT_N_MAX = 1_000_000


# --- domains ----------------------------------------------------------------


def _harmonic(n):
    # sequential accumulation: values[k] + 1/(k+2) == values[k+1] bit for bit
    return np.cumsum(1.0 / np.arange(1, n + 1, dtype=float))


GENERATORS = {
    "harmonic": (_harmonic, "k-th harmonic partial sum H_(k+1)"),
}


@functools.lru_cache(maxsize=16)
def _enumerated_table(generator, n_max):
    if generator in GENERATORS:
        values = GENERATORS[generator][0](n_max)
    else:
        values = Expression(generator, variables={"k"})(k=np.arange(n_max, dtype=float))
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ArgumentError(f"generator {generator!r} produced non-finite values")
    order = np.argsort(values, kind="stable")
    ordered = values[order]
    dup = np.flatnonzero(ordered[1:] == ordered[:-1])
    if dup.size:
        a, b = sorted((int(order[dup[0]]), int(order[dup[0] + 1])))
        raise ArgumentError(f"generator {generator!r} is not injective: points {a} and {b} coincide")
    values.setflags(write=False)
    ordered.setflags(write=False)
    order.setflags(write=False)
    return values, ordered, order


@dataclass(frozen=True)
class DomainDescriptor:
    """Either a closed interval ``[lo, hi]`` or an enumerated point set.

    Enumerated domains hold the points ``generator(k)`` for ``k < n_max``;
    ``generator`` is a builtin name (``"harmonic"``) or an expression in
    ``k``.  Injectivity is checked eagerly on construction.
    """

    kind: str
    lo: float | None = None
    hi: float | None = None
    generator: str | None = None
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        if self.kind == "interval":
            if self.lo is None or self.hi is None:
                raise ArgumentError("interval domain needs lo and hi")
            lo, hi = float(self.lo), float(self.hi)
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise ArgumentError(f"interval bounds must be finite with lo < hi, got [{lo}, {hi}]")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "enumerated":
            if not self.generator:
                raise ArgumentError("enumerated domain needs a generator")
            if int(self.n_max) < 1:
                raise ArgumentError("n_max must be a positive integer")
            object.__setattr__(self, "n_max", int(self.n_max))
            _enumerated_table(self.generator, self.n_max)
        else:
            raise ArgumentError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def interval(cls, lo, hi):
        return cls("interval", lo=lo, hi=hi)

    @classmethod
    def enumerated(cls, generator, n_max=DEFAULT_N_MAX):
        return cls("enumerated", generator=generator, n_max=n_max)

    @property
    def is_interval(self):
        return self.kind == "interval"

    @property
    def values(self) -> np.ndarray:
        """Enumerated points in index order (read-only)."""
        return _enumerated_table(self.generator, self.n_max)[0]

    def point(self, k: int) -> float:
        if not 0 <= k < self.n_max:
            raise DomainError(f"index {k} outside 0..{self.n_max - 1}")
        return float(self.values[k])

    def index_of(self, x):
        """Indices of enumerated points; -1 where ``x`` is not a point."""
        _, ordered, order = _enumerated_table(self.generator, self.n_max)
        x = np.asarray(x, dtype=float)
        pos = np.clip(np.searchsorted(ordered, x), 0, len(ordered) - 1)
        return np.where(ordered[pos] == x, order[pos], -1)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_interval:
            return (x >= self.lo) & (x <= self.hi)
        return self.index_of(x) >= 0

    def require(self, x, what="point"):
        if not np.all(self.contains(x)):
            arr = np.atleast_1d(np.asarray(x, dtype=float))
            bad = arr[~np.atleast_1d(self.contains(arr))][0]
            raise DomainError(f"{what} {bad!r} is outside the domain {self.describe()}")

    def grid(self, count: int) -> np.ndarray:
        """``count`` equispaced points (interval) or the first ``count`` points."""
        if count < 1:
            raise ArgumentError("count must be >= 1")
        if self.is_interval:
            if count == 1:
                return np.array([self.lo])
            i = np.arange(count, dtype=float)
            # weighted form keeps endpoints and k/(count-1) fractions exact where possible
            return (self.lo * (count - 1 - i) + self.hi * i) / (count - 1)
        if count > self.n_max:
            raise ArgumentError(f"count {count} exceeds enumerated domain capacity {self.n_max}")
        return np.array(self.values[:count])

    def default_base(self) -> float:
        return self.hi if self.is_interval else float(self.values[0])

    def describe(self) -> str:
        if self.is_interval:
            return f"[{self.lo!r}, {self.hi!r}]"
        return f"{{{self.generator}(k) : k < {self.n_max}}}"


# --- distances --------------------------------------------------------------

BUILTIN_DISTANCES = {
    "abs": (lambda x, y: abs(x - y), "abs(x - y)"),
    "half_abs": (lambda x, y: abs(x - y) / 2, "abs(x - y)/2"),
    "square": (lambda x, y: (x - y) ** 2, "(x - y)^2"),
}


@dataclass(frozen=True)
class DistanceSpec:
    """A builtin distance tag or an expression in ``x`` and ``y``.

    Evaluation orders the arguments as ``(min, max)`` before calling the
    formula, so the resulting distance is symmetric by construction.  The
    unordered formula stays reachable through :meth:`raw` for auditing.
    """

    source: str
    _expr: Expression | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.source not in BUILTIN_DISTANCES:
            object.__setattr__(self, "_expr", Expression(self.source, variables={"x", "y"}))

    @property
    def is_builtin(self):
        return self._expr is None

    @property
    def expression(self) -> str:
        return BUILTIN_DISTANCES[self.source][1] if self.is_builtin else self.source

    def raw(self, x, y):
        if self.is_builtin:
            fn = BUILTIN_DISTANCES[self.source][0]
            if np.ndim(x) == 0 and np.ndim(y) == 0:
                return float(fn(float(x), float(y)))
            return fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return self._expr(x=x, y=y)

    def __call__(self, x, y):
        if np.ndim(x) == 0 and np.ndim(y) == 0:
            x, y = float(x), float(y)
            return self.raw(x, y) if x <= y else self.raw(y, x)
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return self.raw(np.minimum(x, y), np.maximum(x, y))


@dataclass(frozen=True)
class BMetricSpace:
    domain: DomainDescriptor
    distance: DistanceSpec
    s_claimed: float = 1.0
    triangle_enforced: bool = True
    tau_eq: float = TAU_EQ

    def __post_init__(self):
        if isinstance(self.distance, str):
            object.__setattr__(self, "distance", DistanceSpec(self.distance))
        if not self.s_claimed >= 1:
            raise ArgumentError(f"s_claimed must be >= 1, got {self.s_claimed}")
        if not self.tau_eq > 0:
            raise ArgumentError("tau_eq must be positive")

    def dist(self, x, y):
        """Vectorised distance without domain checks."""
        d = self.distance(x, y)
        if np.any(np.isnan(d)):
            raise EvaluationError("distance evaluated to NaN", self.distance.expression)
        return d

    def replace(self, **changes) -> "BMetricSpace":
        from dataclasses import replace

        return replace(self, **changes)


def distance(space: BMetricSpace, x: float, y: float) -> float:
    """Checked distance between two domain points."""
    space.domain.require(x)
    space.domain.require(y)
    return float(space.dist(float(x), float(y)))


def subset_diameter(space: BMetricSpace, points) -> float:
    """Largest pairwise distance within ``points`` (0 for fewer than 2)."""
    pts = np.asarray(points, dtype=float)
    best = 0.0
    for start in range(0, len(pts), 512):
        block = space.dist(pts[start:start + 512, None], pts[None, :])
        if block.size:
            best = max(best, float(block.max()))
    return best


def is_bounded(space: BMetricSpace, points, bound: float) -> bool:
    """True when every pair of ``points`` lies within ``bound`` of each other."""
    return subset_diameter(space, points) <= bound


# --- sampling ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Points and the pairs built from them, in row-major order.

    ``x[i*n + j], y[i*n + j] = points[i], points[j]`` for grid and random
    strategies.  ``explicit`` sample sets carry user pairs verbatim.
    """

    strategy: str
    count: int
    seed: int | None
    points: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    def __len__(self):
        return len(self.x)

    @classmethod
    def from_points(cls, points, strategy="explicit", count=None, seed=None):
        pts = np.asarray(points, dtype=float)
        xs = np.repeat(pts, len(pts))
        ys = np.tile(pts, len(pts))
        return cls(strategy, len(pts) if count is None else count, seed, pts, xs, ys)

    @classmethod
    def from_pairs(cls, pairs):
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        pts = np.unique(arr)
        return cls("explicit", len(arr), None, pts, arr[:, 0].copy(), arr[:, 1].copy())

    def describe(self) -> dict:
        return {"strategy": self.strategy, "count": self.count, "seed": self.seed,
                "points": len(self.points), "pairs": len(self)}


def sample_pairs(domain: DomainDescriptor, strategy: str = "grid", count: int = 301,
                 seed: int | None = None) -> SampleSet:
    """Deterministic sample of ``count`` points and all their ordered pairs."""
    if count < 1:
        raise ArgumentError("count must be >= 1")
    if not domain.is_interval and count > domain.n_max:
        raise ArgumentError(f"count {count} exceeds enumerated domain capacity {domain.n_max}")
    if strategy == "grid":
        pts = domain.grid(count)
    elif strategy == "random":
        if seed is None:
            raise ArgumentError("random sampling needs a seed")
        rng = np.random.default_rng(np.uint64(seed))
        if domain.is_interval:
            pts = rng.uniform(domain.lo, domain.hi, size=count)
        else:
            pts = domain.values[rng.integers(0, domain.n_max, size=count)]
    else:
        raise ArgumentError(f"unknown sampling strategy {strategy!r}")
    return SampleSet.from_points(pts, strategy=strategy, count=count, seed=seed)


def grid_triples(domain: DomainDescriptor, count: int) -> np.ndarray:
    """All ``count**3`` triples ``(x, y, z)`` of the domain grid, row-major."""
    g = domain.grid(count)
    x, y, z = np.meshgrid(g, g, g, indexing="ij")
    return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)


# --- axiom audit ------------------------------------------------------------


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    status: str  # pass | fail | skipped
    witness: tuple | None = None
    value: float | None = None

    @property
    def passed(self):
        return self.status != "fail"


@dataclass(frozen=True)
class AxiomReport:
    s_claimed: float
    checks: tuple

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _first_pair(mask, xs, ys):
    i = int(np.argmax(mask))
    return (float(xs[i]), float(ys[i]))


def verify_axioms(space: BMetricSpace, samples: SampleSet, triples=None) -> AxiomReport:
    """Audit self-distance, positivity, symmetry and the relaxed triangle.

    The triangle audit runs over every triple of sample points unless
    ``triples`` (an ``(n, 3)`` array of ``(x, y, z)``) is given.  Its
    ``value`` is the worst ratio ``d(x,y) / (s * (d(x,z) + d(z,y)))``.
    """
    if samples is None or len(samples) == 0:
        raise ArgumentError("empty sample set")
    tau = space.tau_eq
    xs, ys = samples.x, samples.y
    space.domain.require(xs, "sample")
    space.domain.require(ys, "sample")
    checks = []

    pts = samples.points
    self_d = space.dist(pts, pts)
    bad = self_d > tau
    checks.append(AxiomCheck("self_zero", "fail" if bad.any() else "pass",
                             _first_pair(bad, pts, pts) if bad.any() else None,
                             float(np.max(np.abs(self_d)))))

    d = space.dist(xs, ys)
    bad = (d < 0) | ((xs != ys) & (d <= 0))
    checks.append(AxiomCheck("positivity", "fail" if bad.any() else "pass",
                             _first_pair(bad, xs, ys) if bad.any() else None, float(d.min())))

    asym = np.abs(space.distance.raw(xs, ys) - space.distance.raw(ys, xs))
    bad = asym > tau
    checks.append(AxiomCheck("symmetry", "fail" if bad.any() else "pass",
                             _first_pair(bad, xs, ys) if bad.any() else None, float(asym.max())))

    if not space.triangle_enforced:
        checks.append(AxiomCheck("relaxed_triangle", "skipped"))
    else:
        checks.append(_triangle_check(space, pts, triples))
    return AxiomReport(space.s_claimed, tuple(checks))


def _triangle_check(space, pts, triples):
    s, tau = space.s_claimed, space.tau_eq
    best_ratio, best_triple, violated = 0.0, None, False
    worst_violation = None  # (ratio, triple)
    if triples is not None:
        t = np.asarray(triples, dtype=float).reshape(-1, 3)
        space.domain.require(t, "triple point")
        dxy = space.dist(t[:, 0], t[:, 1])
        rhs = space.dist(t[:, 0], t[:, 2]) + space.dist(t[:, 2], t[:, 1])
        chunks = [(dxy, rhs, t)]
    else:
        dm = space.dist(pts[:, None], pts[None, :])
        n = len(pts)

        def gen():
            for i in range(n):
                # rows: y index j, columns: z index l -> triple (pts[i], pts[j], pts[l])
                lhs = np.broadcast_to(dm[i][:, None], (n, n))
                rhs = dm[i][None, :] + dm.T
                yield lhs.ravel(), rhs.ravel(), (i, n)
        chunks = gen()
    for lhs, rhs, where in chunks:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rhs > 0, lhs / (s * rhs), np.where(lhs > 0, np.inf, 0.0))
        viol = lhs > s * rhs + tau
        r_max = float(ratio.max()) if ratio.size else 0.0
        if r_max > best_ratio:
            best_ratio = r_max
        if viol.any():
            cand = np.where(viol, ratio, -np.inf)
            j = int(np.argmax(cand))
            if worst_violation is None or cand[j] > worst_violation[0]:
                if isinstance(where, tuple):
                    i, n = where
                    triple = (float(pts[i]), float(pts[j // n]), float(pts[j % n]))
                else:
                    triple = tuple(float(v) for v in where[j])
                worst_violation = (float(cand[j]), triple)
            violated = True
    if violated:
        return AxiomCheck("relaxed_triangle", "fail", worst_violation[1], worst_violation[0])
    return AxiomCheck("relaxed_triangle", "pass", None, best_ratio)


def estimate_s(space: BMetricSpace, triples) -> float:
    """Empirical relaxed-triangle coefficient, a lower bound on the true s.

    Returns ``max d(x,y) / (d(x,z) + d(z,y))`` over the triples, clamped
    below at 1.  Triples with a zero denominator are skipped.
    """
    t = np.asarray(triples, dtype=float).reshape(-1, 3)
    if len(t) == 0:
        raise ArgumentError("no triples given")
    space.domain.require(t, "triple point")
    lhs = space.dist(t[:, 0], t[:, 1])
    rhs = space.dist(t[:, 0], t[:, 2]) + space.dist(t[:, 2], t[:, 1])
    ok = rhs > 0
    if not ok.any():
        raise ArgumentError("every triple is degenerate (x = z = y)")
    return max(1.0, float(np.max(lhs[ok] / rhs[ok])))
