"""Picard orbits, orbit diameters, divergence detection and fixed-point solving."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ClosureError, DomainError
from .expr import Expression
from .space import BMetricSpace, DomainDescriptor, subset_diameter

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000


class CapReached(ClosureError):
    """The orbit walked off the end of a finite enumerated domain."""


def _halve(x, domain):
    return x / 2


def _identity(x, domain):
    return x


def _piecewise_leader(x, domain):
    if np.ndim(x) == 0:
        return x / 3 if x <= 0.5 else x / 3 + 0.25
    return np.where(x <= 0.5, x / 3, x / 3 + 0.25)


def _harmonic_shift(x, domain):
    if domain.is_interval:
        raise ArgumentError("harmonic_shift needs an enumerated domain")
    idx = np.asarray(domain.index_of(x))
    if np.any(idx < 0):
        raise DomainError("harmonic_shift applied to a point outside the domain")
    if np.any(idx + 1 >= domain.n_max):
        raise CapReached(f"shift past the last enumerated point (n_max={domain.n_max})")
    out = domain.values[idx + 1]
    return float(out) if np.ndim(x) == 0 else out


# name -> (function(x, domain), equivalent expression)
BUILTIN_MAPS = {
    "halve": (_halve, "x/2"),
    "identity": (_identity, "x"),
    "piecewise_leader": (_piecewise_leader, "piecewise(x <= 1/2 : x/3 ; x/3 + 1/4)"),
    "harmonic_shift": (_harmonic_shift, "x + 1/(k + 2)"),
}


@dataclass(frozen=True)
class SelfMap:
    """A map of a one-dimensional domain into itself.

    ``spec`` is a builtin name or an expression in ``x``; on enumerated
    domains the expression may also use ``k``, the index of ``x``.  Closure
    is audited on a grid when the map is built.
    """

    spec: str
    domain: DomainDescriptor
    audit_points: int = 1001
    _expr: Expression | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.spec not in BUILTIN_MAPS:
            object.__setattr__(self, "_expr", Expression(self.spec, variables={"x", "k"}))
        if self.audit_points:
            if self.domain.is_interval:
                pts = self.domain.grid(self.audit_points)
            else:
                pts = self.domain.grid(min(self.audit_points, self.domain.n_max - 1) or 1)
                if self.domain.n_max == 1:
                    pts = pts[:0]
            if len(pts):
                self.apply(pts)

    @property
    def is_builtin(self):
        return self._expr is None

    @property
    def expression(self) -> str:
        return BUILTIN_MAPS[self.spec][1] if self.is_builtin else self.spec

    def _raw(self, x):
        if self.is_builtin:
            return BUILTIN_MAPS[self.spec][0](x, self.domain)
        if self.domain.is_interval:
            return self._expr(x=x)
        k = self.domain.index_of(x)
        if np.any(k < 0):
            raise DomainError("map applied to a point outside the enumerated domain")
        return self._expr(x=x, k=np.asarray(k, dtype=float) if np.ndim(x) else float(k))

    def __call__(self, x: float) -> float:
        x = float(x)
        if self.domain.is_interval and not self.domain.lo <= x <= self.domain.hi:
            raise DomainError(f"point {x!r} is outside the domain {self.domain.describe()}")
        v = float(self._raw(x))
        self._check_closure(np.array([x]), np.array([v]))
        return v

    def apply(self, xs) -> np.ndarray:
        """Vectorised evaluation with the closure audit."""
        xs = np.asarray(xs, dtype=float)
        out = np.asarray(self._raw(xs), dtype=float)
        out = np.broadcast_to(out, xs.shape).copy()
        self._check_closure(xs, out)
        return out

    def iterate(self, xs, r: int) -> np.ndarray:
        out = np.asarray(xs, dtype=float)
        for _ in range(r):
            out = self.apply(out)
        return out

    def _check_closure(self, xs, out):
        d = self.domain
        if d.is_interval:
            if out.size == 1:
                v = float(out.reshape(-1)[0])
                ok = d.lo <= v <= d.hi
                if ok:
                    return
            bad = ~((out >= d.lo) & (out <= d.hi))
        else:
            bad = d.index_of(out) < 0
        if np.any(bad):
            i = int(np.argmax(bad.reshape(-1)))
            x, v = float(xs.reshape(-1)[i]), float(out.reshape(-1)[i])
            if not d.is_interval and d.index_of(x) == d.n_max - 1:
                raise CapReached(f"map leaves the last enumerated point {x!r}", value=v)
            raise ClosureError(f"map sends {x!r} to {v!r}, outside the domain {d.describe()}", value=v)


@dataclass(frozen=True, eq=False)
class Orbit:
    base: float
    points: np.ndarray
    step_dists: np.ndarray

    def __len__(self):
        return len(self.points)


def picard(space: BMetricSpace, tmap: SelfMap, x0: float, n: int) -> Orbit:
    """Orbit ``x0, T x0, ..., T^n x0`` with consecutive step distances."""
    if n < 0:
        raise ArgumentError("n must be >= 0")
    space.domain.require(x0, "base point")
    pts = [float(x0)]
    x = float(x0)
    for k in range(n):
        try:
            x = tmap(x)
        except ClosureError as exc:
            exc.index = k + 1
            raise
        pts.append(x)
    arr = np.array(pts)
    steps = space.dist(arr[:-1], arr[1:]) if n else np.empty(0)
    return Orbit(float(x0), arr, np.asarray(steps, dtype=float))


def orbit_diameter(space: BMetricSpace, orbit: Orbit) -> float:
    """Largest distance within the computed prefix (a lower bound on the orbit diameter)."""
    if len(orbit) == 0:
        raise ArgumentError("empty orbit")
    return subset_diameter(space, orbit.points)


def cauchy_table(space: BMetricSpace, orbit: Orbit, epsilons) -> dict:
    """For each eps, the least m0 with d(x_n, x_m) < eps for all n, m > m0 in the prefix.

    Diagnostic only: a prefix can never prove the Cauchy property.  ``None``
    means even the last pair of the prefix is not within eps.
    """
    pts = orbit.points
    n = len(pts)
    tail = np.zeros(n + 1)
    for m in range(n - 2, -1, -1):
        tail[m] = max(tail[m + 1], float(np.max(space.dist(pts[m], pts[m + 1:]))))
    out = {}
    for eps in epsilons:
        # indices > m0 have tail diameter tail[m0 + 1]
        m0 = next((m for m in range(-1, n - 2) if tail[m + 1] < eps), None)
        out[float(eps)] = m0
    return out


@dataclass(frozen=True)
class UnboundedVerdict:
    status: str  # bounded_so_far | diverging
    diameter: float
    length: int
    diameters: tuple
    lengths: tuple
    inconclusive: bool = False
    note: str = ""


def detect_unbounded(space: BMetricSpace, tmap: SelfMap, x0: float, threshold: float,
                     window_doublings: int = 8, start_length: int = 25,
                     min_growth: float = 1e-3) -> UnboundedVerdict:
    """Watch the orbit diameter over prefixes of doubling length.

    Reports ``diverging`` once the diameter passes ``threshold`` after having
    grown by at least ``min_growth`` (relative) in every doubling window.
    """
    if not threshold > 0:
        raise ArgumentError("threshold must be positive")
    if start_length < 2 or window_doublings < 0:
        raise ArgumentError("start_length must be >= 2 and window_doublings >= 0")
    space.domain.require(x0, "base point")
    pts = [float(x0)]
    diam = 0.0
    lengths, diams = [], []
    growing = True
    for j in range(window_doublings + 1):
        target = start_length * 2 ** j
        old = len(pts)
        x = pts[-1]
        try:
            while len(pts) < target:
                x = tmap(x)
                pts.append(x)
        except CapReached as exc:
            diam = max(diam, _new_diameter(space, pts, old))
            return UnboundedVerdict("bounded_so_far", diam, len(pts), tuple(diams), tuple(lengths),
                                    inconclusive=True, note=str(exc))
        diam = max(diam, _new_diameter(space, pts, old))
        if diams and not diam >= diams[-1] * (1 + min_growth):
            growing = False
        lengths.append(len(pts))
        diams.append(diam)
        if not growing:
            break
        if j >= 1 and diam > threshold:
            return UnboundedVerdict("diverging", diam, len(pts), tuple(diams), tuple(lengths))
    return UnboundedVerdict("bounded_so_far", diam, len(pts), tuple(diams), tuple(lengths))


def _new_diameter(space, pts, old):
    arr = np.asarray(pts)
    best = 0.0
    for i in range(max(old, 1), len(arr), 256):
        block = space.dist(arr[i:i + 256, None], arr[None, :i + 256])
        best = max(best, float(block.max()))
    return best


@dataclass(frozen=True)
class FixedPointResult:
    status: str  # converged | max_iter | diverged
    point: float | None
    residual: float
    iterations: int


def solve_fixed_point(space: BMetricSpace, tmap: SelfMap, x0: float, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> FixedPointResult:
    """Picard iteration until ``d(x_n, x_{n+1}) <= tol`` and ``d(z, Tz) <= tol``."""
    if not tol > 0 or max_iter < 1:
        raise ArgumentError("tol must be positive and max_iter >= 1")
    space.domain.require(x0, "starting point")
    dist = space.distance
    x = float(x0)
    residual = math.inf
    for it in range(1, max_iter + 1):
        try:
            nxt = tmap(x)
        except ClosureError as exc:
            exc.index = it
            raise
        step = float(dist(x, nxt))
        if not math.isfinite(step):
            return FixedPointResult("diverged", None, step, it)
        if step <= tol:
            residual = float(dist(nxt, tmap(nxt)))
            if residual <= tol:
                return FixedPointResult("converged", nxt, residual, it)
        x = nxt
    try:
        residual = float(dist(x, tmap(x)))
    except CapReached:
        residual = math.nan
    return FixedPointResult("max_iter", None, residual, max_iter)
