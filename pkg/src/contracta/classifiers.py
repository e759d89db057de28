"""Sampling-based certification and falsification of contraction classes.

Every checker works on a :class:`~contracta.space.SampleSet` and returns a
:class:`ClassVerdict`.  ``certified_on_samples`` is evidence, never proof;
``falsified`` always carries a :class:`Witness` that can be replayed.

When several sampled pairs violate an inequality the witness is the most
severe one, exact ties going to the lowest sample index.  Meir-Keeler
falsifiers all defeat every delta, so the first one in sample order is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArgumentError, AuditError
from .expr import Expression
from .orbit import CapReached, SelfMap, detect_unbounded
from .space import BMetricSpace, SampleSet

CERTIFIED = "certified_on_samples"
FALSIFIED = "falsified"
INCONCLUSIVE = "inconclusive"

TAU_SEMI = 1e-6
TAU_LIM = 1e-3
DEFAULT_EPSILONS = (0.05, 0.1, 0.25, 0.5)
DEFAULT_R_MAX = 10

# hierarchy order (smallest classes first), then the classes outside the diagram
CLASS_ORDER = ("boyd_wong", "meir_keeler", "matkowski", "nonexpansive",
               "nonexpansive_leader", "leader", "geraghty")
# (smaller, larger): certification of the first forbids falsification of the second
IMPLICATIONS = (
    ("boyd_wong", "meir_keeler"),
    ("meir_keeler", "nonexpansive_leader"),
    ("matkowski", "nonexpansive_leader"),
    ("nonexpansive_leader", "leader"),
    ("boyd_wong", "nonexpansive"),
    ("matkowski", "nonexpansive"),
    ("meir_keeler", "nonexpansive"),
    ("geraghty", "nonexpansive"),
)


@dataclass(frozen=True)
class DeltaSchedule:
    """Geometric search schedule ``start_factor * eps * ratio**i``, ``i < steps``."""

    start_factor: float = 1.0
    ratio: float = 0.5
    steps: int = 40

    def __post_init__(self):
        if not (self.start_factor > 0 and 0 < self.ratio < 1 and self.steps >= 1):
            raise ArgumentError("delta schedule needs start_factor > 0, 0 < ratio < 1, steps >= 1")

    def deltas(self, eps: float) -> np.ndarray:
        return self.start_factor * eps * self.ratio ** np.arange(self.steps)


@dataclass(frozen=True)
class Witness:
    """Concrete numbers behind a verdict.

    ``kind`` is ``pair`` for sampled-pair violations, otherwise the audit
    that failed (``phi_below_identity``, ``phi_monotone``, ``phi_decay``,
    ``semicontinuity``, ``limit``).  ``bound`` is the right-hand side the
    measured ``d_after`` was compared to.
    """

    kind: str
    x: float | None = None
    y: float | None = None
    epsilon: float | None = None
    delta: float | None = None
    r: int | None = None
    d_before: float | None = None
    d_after: float | None = None
    bound: float | None = None
    t: float | None = None
    value: float | None = None
    note: str = ""

    def as_dict(self) -> dict:
        return {k: v for k, v in vars(self).items() if v is not None and v != ""}


@dataclass(frozen=True)
class Certificate:
    epsilon: float
    delta: float
    r: int
    band_pairs: int
    max_image: float
    source: str = "schedule"


@dataclass(frozen=True)
class ClassVerdict:
    class_name: str
    status: str
    witness: Witness | None = None
    params: dict = field(default_factory=dict)
    certificates: tuple = ()
    note: str = ""

    def __post_init__(self):
        if self.status == FALSIFIED and self.witness is None:
            raise ValueError("a falsified verdict needs a witness")

    def certificate_for(self, eps: float) -> Certificate | None:
        for c in self.certificates:
            if c.epsilon == eps:
                return c
        return None


@dataclass(frozen=True)
class PhiSpec:
    """Comparison function phi(t) with an optional audit grid."""

    expression: str
    grid: tuple | None = None

    def __post_init__(self):
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if g.size == 0 or np.any(g <= 0) or np.any(np.diff(g) <= 0):
                raise ArgumentError("phi audit grid must be nonempty, positive and strictly increasing")

    def __call__(self, t):
        return _expr(self.expression, "t")(t=t)

    def audit_grid(self, d_max: float) -> np.ndarray:
        if self.grid is not None:
            return np.asarray(self.grid, dtype=float)
        top = d_max if d_max > 0 else 1.0
        i = np.arange(1, 201, dtype=float)
        return top * i / 200


@dataclass(frozen=True)
class AlphaSpec:
    expression: str
    variant: str = "type_I"

    def __post_init__(self):
        if self.variant not in ("type_I", "type_II"):
            raise ArgumentError(f"unknown Geraghty variant {self.variant!r}")

    def __call__(self, t):
        return _expr(self.expression, "t")(t=t)


_EXPR_CACHE: dict = {}


def _expr(text, var):
    key = (text, var)
    if key not in _EXPR_CACHE:
        _EXPR_CACHE[key] = Expression(text, variables={var})
    return _EXPR_CACHE[key]


# --- shared helpers ---------------------------------------------------------


class _Pairs:
    """Distances of sampled pairs and (cached) of their images under T^r."""

    def __init__(self, space: BMetricSpace, tmap: SelfMap, samples: SampleSet):
        if samples is None or len(samples) == 0:
            raise ArgumentError("empty sample set")
        space.domain.require(samples.x, "sample")
        space.domain.require(samples.y, "sample")
        self.space, self.tmap = space, tmap
        self.x, self.y = samples.x, samples.y
        self.d = space.dist(self.x, self.y)
        self.uniq, inv = np.unique(np.concatenate([self.x, self.y]), return_inverse=True)
        self.ix, self.iy = inv[:len(self.x)], inv[len(self.x):]
        self._iterates = {0: self.uniq}
        self._images = {}

    def iterate_points(self, r):
        top = max(k for k in self._iterates if k <= r)
        pts = self._iterates[top]
        for k in range(top + 1, r + 1):
            pts = self.tmap.apply(pts)
            self._iterates[k] = pts
        return self._iterates[r]

    def image(self, r=1):
        if r not in self._images:
            pts = self.iterate_points(r)
            self._images[r] = self.space.dist(pts[self.ix], pts[self.iy])
        return self._images[r]

    def pair_witness(self, i, **extra) -> Witness:
        return Witness("pair", x=float(self.x[i]), y=float(self.y[i]), d_before=float(self.d[i]), **extra)


def _worst(mask, severity):
    """Index of the most severe flagged entry; exact ties go to the lowest index."""
    return int(np.argmax(np.where(mask, severity, -np.inf)))


def _verdict(name, status, witness=None, samples=None, **params):
    if samples is not None:
        params = {"samples": samples.describe(), **params}
    return ClassVerdict(name, status, witness, params)


# --- checkers ---------------------------------------------------------------


def check_nonexpansive(space: BMetricSpace, tmap: SelfMap, samples: SampleSet) -> ClassVerdict:
    """Falsify ``d(Tx, Ty) <= d(x, y)`` on the samples, or certify it there."""
    p = _Pairs(space, tmap, samples)
    img = p.image(1)
    viol = img > p.d + space.tau_eq
    if viol.any():
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p.d > 0, img / p.d, np.inf)
        i = _worst(viol, ratio)
        w = p.pair_witness(i, r=1, d_after=float(img[i]), bound=float(p.d[i]),
                           value=float(ratio[i]))
        return _verdict("nonexpansive", FALSIFIED, w, samples, violations=int(viol.sum()))
    return _verdict("nonexpansive", CERTIFIED, None, samples,
                    max_ratio=float(np.max(np.where(p.d > 0, img / np.where(p.d > 0, p.d, 1), 0.0))))


def _epsilons(epsilons):
    eps = [float(e) for e in epsilons]
    if not eps:
        raise ArgumentError("epsilon list is empty")
    if any(not e > 0 for e in eps):
        raise ArgumentError("epsilons must be positive")
    return eps


def check_meir_keeler(space: BMetricSpace, tmap: SelfMap, epsilons, delta_schedule: DeltaSchedule | None,
                      samples: SampleSet) -> ClassVerdict:
    """Search, for each eps, a delta whose band ``eps <= d < eps + delta`` maps below eps.

    A delta only counts when its band holds at least one sampled pair; band
    edges carry the ``tau_eq`` margin (``eps - tau <= d < eps + delta - tau``).
    Falsification needs a pair with ``d(x, y) = eps`` up to ``tau_eq`` whose
    image is still ``>= eps``: such a pair defeats all delta at once.
    """
    schedule = delta_schedule or DeltaSchedule()
    eps_list = _epsilons(epsilons)
    p = _Pairs(space, tmap, samples)
    img = p.image(1)
    tau = space.tau_eq
    per_eps, certs = [], []
    falsifier = None
    for eps in eps_list:
        deltas = schedule.deltas(eps)
        lower = p.d >= eps - tau
        found = None
        for delta in deltas:
            band = lower & (p.d < eps + delta - tau)
            if band.any() and np.all(img[band] < eps - tau):
                found = Certificate(eps, float(delta), 1, int(band.sum()), float(img[band].max()))
                break
        if found:
            certs.append(found)
            per_eps.append({"epsilon": eps, "status": CERTIFIED, "delta": found.delta})
            continue
        # d(x, y) = eps up to tau: inside every band of the schedule
        bad = (np.abs(p.d - eps) <= tau) & (img >= eps)
        if bad.any():
            # every such pair defeats all delta equally: report the first one
            i = int(np.argmax(bad))
            per_eps.append({"epsilon": eps, "status": FALSIFIED, "falsifying_pairs": int(bad.sum())})
            if falsifier is None:
                falsifier = p.pair_witness(i, epsilon=eps, delta=float(deltas.min()), r=1,
                                           d_after=float(img[i]), bound=eps)
        else:
            nonempty = any((lower & (p.d < eps + d - tau)).any() for d in deltas)
            per_eps.append({"epsilon": eps, "status": INCONCLUSIVE,
                            "reason": "band violations without a delta-uniform pair" if nonempty
                            else "no sampled pair in any band"})
    status = FALSIFIED if falsifier else CERTIFIED if len(certs) == len(eps_list) else INCONCLUSIVE
    v = _verdict("meir_keeler", status, falsifier, samples, per_epsilon=per_eps,
                 delta_schedule=vars(schedule))
    return ClassVerdict(v.class_name, v.status, v.witness, v.params, tuple(certs))


def leader_candidates(eps, r_max, schedule, hint=None):
    """(r, delta, source) in search order: the hint first, then r ascending, delta descending."""
    if hint is not None:
        r, delta = hint(eps)
        if 1 <= r <= r_max:
            yield r, float(delta), "hint"
    for r in range(1, r_max + 1):
        for delta in schedule.deltas(eps):
            yield r, float(delta), "schedule"


def check_leader(space: BMetricSpace, tmap: SelfMap, epsilons, delta_schedule: DeltaSchedule | None,
                 r_max: int, samples: SampleSet, hint: Callable | None = None,
                 max_iter: int = 10_000) -> ClassVerdict:
    """Search (r, delta) with ``d(x,y) < eps + delta  =>  d(T^r x, T^r y) < eps``.

    ``hint`` maps eps to a claimed ``(r, delta)`` tried before the schedule.
    Finite search cannot refute the existence of some larger r, so the
    verdict is never ``falsified``.
    """
    if r_max < 1:
        raise ArgumentError("r_max must be >= 1")
    if r_max > max_iter:
        raise ArgumentError(f"r_max={r_max} exceeds the iteration budget {max_iter}")
    schedule = delta_schedule or DeltaSchedule()
    eps_list = _epsilons(epsilons)
    p = _Pairs(space, tmap, samples)
    tau = space.tau_eq
    order = np.argsort(p.d, kind="stable")
    d_sorted = p.d[order]
    prefix_max = {}

    def running_max(r):
        if r not in prefix_max:
            prefix_max[r] = np.maximum.accumulate(p.image(r)[order])
        return prefix_max[r]

    certs, per_eps = [], []
    for eps in eps_list:
        lo = int(np.searchsorted(d_sorted, eps - tau, side="left"))
        found = None
        for r, delta, source in leader_candidates(eps, r_max, schedule, hint):
            hi = int(np.searchsorted(d_sorted, eps + delta - tau, side="left"))
            if hi <= lo:
                continue  # empty band eps <= d < eps + delta
            try:
                top = float(running_max(r)[hi - 1])
            except CapReached:
                continue  # T^r leaves a finite enumerated domain for some sample

            if top < eps - tau:
                found = Certificate(eps, delta, r, hi - lo, top, source)
                break
        if found:
            certs.append(found)
            per_eps.append({"epsilon": eps, "status": CERTIFIED, "r": found.r, "delta": found.delta,
                            "source": found.source})
        else:
            per_eps.append({"epsilon": eps, "status": INCONCLUSIVE})
    status = CERTIFIED if len(certs) == len(eps_list) else INCONCLUSIVE
    v = _verdict("leader", status, None, samples, per_epsilon=per_eps, r_max=r_max,
                 delta_schedule=vars(schedule))
    return ClassVerdict(v.class_name, v.status, None, v.params, tuple(certs))


def _phi_below_identity(phi, grid, tau):
    vals = phi(grid)
    bad = (vals >= grid - tau) | (vals < 0)
    if bad.any():
        i = int(np.argmax(bad))
        return Witness("phi_below_identity", t=float(grid[i]), value=float(vals[i]),
                       note="phi(t) < t or phi(t) >= 0 fails")
    return None


def _phi_sample_check(name, p, phi, samples, tau, **params):
    img = p.image(1)
    pos = p.d > 0
    bound = np.where(pos, phi(np.where(pos, p.d, 1.0)), 0.0)
    excess = img - bound
    viol = excess > tau
    if viol.any():
        i = _worst(viol, excess)
        w = p.pair_witness(i, r=1, d_after=float(img[i]), bound=float(bound[i]))
        return _verdict(name, FALSIFIED, w, samples, worst_margin=float(-excess[i]), **params)
    return _verdict(name, CERTIFIED, None, samples, worst_margin=float(np.min(-excess)), **params)


def check_matkowski(space: BMetricSpace, tmap: SelfMap, phi: PhiSpec, samples: SampleSet,
                    iter_depth: int = 10_000, decay_tol: float = 1e-3) -> ClassVerdict:
    """Audit phi (below identity, nondecreasing, iterates decay) then ``d(Tx,Ty) <= phi(d(x,y))``."""
    p = _Pairs(space, tmap, samples)
    tau = space.tau_eq
    grid = phi.audit_grid(float(p.d.max()))
    params = {"phi_expression": phi.expression}
    w = _phi_below_identity(phi, grid, tau)
    if w is None:
        vals = phi(grid)
        drop = vals[1:] < vals[:-1] - tau
        if drop.any():
            i = int(np.argmax(drop))
            w = Witness("phi_monotone", t=float(grid[i + 1]), value=float(vals[i + 1]),
                        bound=float(vals[i]), note=f"phi decreases after t={grid[i]!r}")
    if w is None:
        t = grid.copy()
        for _ in range(iter_depth):
            if np.all(t <= decay_tol):
                break
            t = phi(t)
        if np.any(t > decay_tol):
            i = int(np.argmax(t > decay_tol))
            w = Witness("phi_decay", t=float(grid[i]), value=float(t[i]), bound=decay_tol,
                        note=f"phi^{iter_depth}(t) stays above {decay_tol}")
    if w is not None:
        return _verdict("matkowski", FALSIFIED, w, samples, **params)
    return _phi_sample_check("matkowski", p, phi, samples, tau, **params)


def check_boyd_wong(space: BMetricSpace, tmap: SelfMap, phi: PhiSpec, samples: SampleSet,
                    tau_semi: float = TAU_SEMI) -> ClassVerdict:
    """Audit phi (below identity, right upper semicontinuous) then the sample inequality.

    The semicontinuity audit compares phi(t) with the largest value of phi
    on eight points of the right window ``(t, t + 1e-3 * tau_semi * max(t, 1)]``
    and fails when it exceeds ``phi(t) + tau_semi``.
    """
    p = _Pairs(space, tmap, samples)
    tau = space.tau_eq
    grid = phi.audit_grid(float(p.d.max()))
    params = {"phi_expression": phi.expression, "tau_semi": tau_semi}
    w = _phi_below_identity(phi, grid, tau)
    if w is None:
        base = phi(grid)
        width = tau_semi * np.maximum(grid, 1.0) * 1e-3
        offsets = np.arange(1, 9) / 8
        right = grid[:, None] + width[:, None] * offsets[None, :]
        limsup = phi(right).max(axis=1)
        bad = limsup > base + tau_semi
        if bad.any():
            i = _worst(bad, limsup - base)
            w = Witness("semicontinuity", t=float(grid[i]), value=float(limsup[i]), bound=float(base[i]),
                        note="right lim sup of phi exceeds phi(t)")
    if w is not None:
        return _verdict("boyd_wong", FALSIFIED, w, samples, **params)
    return _phi_sample_check("boyd_wong", p, phi, samples, tau, **params)


def default_probe_sequences(n: int = 1000) -> tuple:
    k = np.arange(1, n + 1, dtype=float)
    return (1 / k, 0.5 + 1 / k, 1 + 1 / k)


def _limit_audit(alpha, seq, tau_lim, tau_eq):
    """Finite evidence against 'alpha(s_n) -> 1 implies s_n -> 0'.

    Fails when, inside the band alpha >= 1 - tau_lim, the gap 1 - alpha
    shrinks tenfold while s_n neither halves nor drops below tau_eq.
    """
    a = alpha(seq)
    band = np.flatnonzero(a >= 1 - tau_lim)
    if band.size < 2:
        return None
    first = band[0]
    deepest = band[int(np.argmax(a[band]))]
    gap0, gap1 = 1 - a[first], 1 - a[deepest]
    if gap1 <= 0.1 * gap0 and seq[deepest] >= 0.5 * seq[first] and seq[deepest] > tau_eq:
        return Witness("limit", t=float(seq[deepest]), value=float(a[deepest]),
                       note=f"alpha -> 1 along the probe while s_n stays near {seq[deepest]:.6g}")
    return None


def check_geraghty(space: BMetricSpace, tmap: SelfMap, alpha: AlphaSpec, samples: SampleSet,
                   probe_sequences=None, tau_lim: float = TAU_LIM) -> ClassVerdict:
    """Check ``d(Tx,Ty) <= alpha(d) d`` on samples and audit the limit condition.

    Raises :class:`AuditError` when alpha leaves [0, 1) at a sampled distance
    or probe value.
    """
    p = _Pairs(space, tmap, samples)
    tau = space.tau_eq
    probes = [np.asarray(s, dtype=float) for s in (probe_sequences if probe_sequences is not None
                                                    else default_probe_sequences())]
    for s in probes:
        if s.size == 0 or np.any(s <= 0):
            raise ArgumentError("probe sequences must be nonempty and positive")
        if alpha.variant == "type_II" and np.any(np.diff(s) >= 0):
            raise ArgumentError("type_II probes must be strictly decreasing")
    pos = p.d > 0
    ts = np.concatenate([p.d[pos]] + probes)
    av = alpha(ts)
    out = (av < 0) | (av >= 1)
    if out.any():
        i = int(np.argmax(out))
        raise AuditError(f"alpha({ts[i]!r}) = {av[i]!r} is outside [0, 1)", t=float(ts[i]), value=float(av[i]))
    params = {"alpha": alpha.expression, "variant": alpha.variant, "tau_lim": tau_lim,
              "probes": len(probes)}
    img = p.image(1)
    bound = np.where(pos, alpha(np.where(pos, p.d, 1.0)) * p.d, 0.0)
    excess = img - bound
    viol = excess > tau
    if viol.any():
        i = _worst(viol, excess)
        w = p.pair_witness(i, r=1, d_after=float(img[i]), bound=float(bound[i]))
        return _verdict("geraghty", FALSIFIED, w, samples, worst_margin=float(-excess[i]), **params)
    for s in probes:
        w = _limit_audit(alpha, s, tau_lim, tau)
        if w is not None:
            return _verdict("geraghty", FALSIFIED, w, samples, **params)
    return _verdict("geraghty", CERTIFIED, None, samples, worst_margin=float(np.min(-excess)), **params)


# --- witness replay ---------------------------------------------------------


def replay_witness(space: BMetricSpace, tmap: SelfMap, verdict: ClassVerdict,
                   phi: PhiSpec | None = None, alpha: AlphaSpec | None = None) -> bool:
    """Recompute a witness and confirm both the stored numbers and the violation."""
    w = verdict.witness
    if w is None:
        return False
    tau = space.tau_eq

    def close(a, b):
        return abs(a - b) <= tau

    if w.kind == "pair":
        d = float(space.dist(w.x, w.y))
        tx, ty = tmap.iterate(np.array([w.x, w.y]), w.r or 1)
        da = float(space.dist(tx, ty))
        if not (close(d, w.d_before) and close(da, w.d_after)):
            return False
        name = verdict.class_name
        if name in ("nonexpansive", "nonexpansive_leader"):
            return da > d + tau
        if name == "meir_keeler":
            return abs(d - w.epsilon) <= tau and da >= w.epsilon
        if name in ("matkowski", "boyd_wong"):
            return close(float(phi(d)), w.bound) and da > w.bound + tau
        if name == "geraghty":
            return close(float(alpha(d)) * d, w.bound) and da > w.bound + tau
        return False
    fn = phi if w.kind.startswith("phi") or w.kind == "semicontinuity" else alpha
    if fn is None:
        return False
    if w.kind == "phi_below_identity":
        v = float(fn(w.t))
        return close(v, w.value) and (v >= w.t - tau or v < 0)
    if w.kind == "phi_monotone":
        return close(float(fn(w.t)), w.value) and w.value < w.bound - tau
    if w.kind == "phi_decay":
        return w.value > w.bound
    if w.kind == "semicontinuity":
        return w.value > w.bound + verdict.params.get("tau_semi", TAU_SEMI) and close(float(fn(w.t)), w.bound)
    if w.kind == "limit":
        return close(float(fn(w.t)), w.value)
    return False


# --- classification ---------------------------------------------------------


@dataclass(frozen=True)
class ClassifyConfig:
    samples: SampleSet
    epsilons: tuple = DEFAULT_EPSILONS
    delta_schedule: DeltaSchedule = DeltaSchedule()
    r_max: int = DEFAULT_R_MAX
    phi: str = "t/2"
    alpha: str = "1/2"
    alpha_variant: str = "type_I"
    iter_depth: int = 10_000
    tau_semi: float = TAU_SEMI
    tau_lim: float = TAU_LIM
    probe_sequences: tuple | None = None
    leader_hint: Callable | None = None
    x0: float | None = None
    orbit_threshold: float = 2.0
    window_doublings: int = 8
    max_iter: int = 10_000


@dataclass(frozen=True)
class HierarchyPlacement:
    verdicts: dict
    faults: tuple
    orbit: object

    @property
    def certified(self) -> list[str]:
        return [n for n, v in self.verdicts.items() if v.status == CERTIFIED]

    def status(self, name) -> str:
        return self.verdicts[name].status


def _nle(ne: ClassVerdict, le: ClassVerdict) -> ClassVerdict:
    if ne.status == FALSIFIED:
        return ClassVerdict("nonexpansive_leader", FALSIFIED, ne.witness,
                            {"from": "nonexpansive"}, note="non-expansiveness fails")
    if ne.status == CERTIFIED and le.status == CERTIFIED:
        return ClassVerdict("nonexpansive_leader", CERTIFIED, None,
                            {"from": ["nonexpansive", "leader"]}, le.certificates)
    return ClassVerdict("nonexpansive_leader", INCONCLUSIVE, None, {"from": ["nonexpansive", "leader"]})


def classify(space: BMetricSpace, tmap: SelfMap, config: ClassifyConfig) -> HierarchyPlacement:
    """Run every checker and place the map in the contraction hierarchy.

    The non-expansive Leader verdict is the conjunction of the
    non-expansive and Leader verdicts.  Whenever a class is certified while a
    class containing it is falsified, the larger class's witness is replayed
    and the disagreement is reported as a consistency fault.
    """
    s = config.samples
    phi = PhiSpec(config.phi)
    alpha = AlphaSpec(config.alpha, config.alpha_variant)
    v = {}
    v["boyd_wong"] = check_boyd_wong(space, tmap, phi, s, config.tau_semi)
    v["meir_keeler"] = check_meir_keeler(space, tmap, config.epsilons, config.delta_schedule, s)
    v["matkowski"] = check_matkowski(space, tmap, phi, s, config.iter_depth)
    v["nonexpansive"] = check_nonexpansive(space, tmap, s)
    v["leader"] = check_leader(space, tmap, config.epsilons, config.delta_schedule, config.r_max, s,
                               hint=config.leader_hint, max_iter=config.max_iter)
    v["nonexpansive_leader"] = _nle(v["nonexpansive"], v["leader"])
    try:
        v["geraghty"] = check_geraghty(space, tmap, alpha, s, config.probe_sequences, config.tau_lim)
    except AuditError as exc:
        v["geraghty"] = ClassVerdict("geraghty", FALSIFIED,
                                     Witness("alpha_range", t=exc.t, value=exc.value, note=str(exc)),
                                     {"alpha": alpha.expression, "variant": alpha.variant})
    ordered = {name: v[name] for name in CLASS_ORDER}
    faults = []
    for small, large in IMPLICATIONS:
        if ordered[small].status == CERTIFIED and ordered[large].status == FALSIFIED:
            reproduced = replay_witness(space, tmap, ordered[large], phi, alpha)
            faults.append({"certified": small, "falsified": large, "witness_reproduced": reproduced})
    x0 = config.x0 if config.x0 is not None else space.domain.default_base()
    orbit = detect_unbounded(space, tmap, x0, config.orbit_threshold, config.window_doublings)
    return HierarchyPlacement(ordered, tuple(faults), orbit)
