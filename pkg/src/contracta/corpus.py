"""Named, parameter-free instances: the worked examples and hierarchy baselines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import ArgumentError
from .orbit import SelfMap
from .space import BMetricSpace, DomainDescriptor, DistanceSpec


@dataclass(frozen=True)
class InstanceDescriptor:
    name: str
    space: BMetricSpace
    map: SelfMap
    expected: dict
    notes: str
    leader_hint: Callable | None = field(default=None, compare=False)
    # sampler used when a config does not set one; None means the global default
    sampler: dict | None = None

    @property
    def map_expression(self) -> str:
        return self.map.expression

    @property
    def distance_expression(self) -> str:
        return self.space.distance.expression


def piecewise_leader_certificate(eps: float) -> tuple[int, float]:
    """Analytic Leader constants for ``x/3`` / ``x/3 + 1/4``.

    r is the least integer with ``1 / (4 * 3**(r-1)) < eps/2`` and
    ``delta = (3**r / 2 - 1) * eps``; then ``d(x,y) < eps + delta`` gives
    ``d(T^r x, T^r y) <= (eps + delta) / 3**r + eps/2 < eps``.
    """
    r = 1
    while not 1 / (4 * 3 ** (r - 1)) < eps / 2:
        r += 1
    return r, (3 ** r / 2 - 1) * eps


_ALL_CERTIFIED = {
    "nonexpansive": "certified_on_samples",
    "meir_keeler": "certified_on_samples",
    "leader": "certified_on_samples",
    "nonexpansive_leader": "certified_on_samples",
    "matkowski": "certified_on_samples",
    "boyd_wong": "certified_on_samples",
    "geraghty": "certified_on_samples",
}


def _banach_half():
    dom = DomainDescriptor.interval(0.0, 1.0)
    return InstanceDescriptor(
        "banach_half",
        BMetricSpace(dom, DistanceSpec("abs"), 1.0),
        SelfMap("halve", dom),
        dict(_ALL_CERTIFIED, orbit="bounded_so_far", fixed_point="converged"),
        "Banach contraction x/2 on [0, 1]; sits in every class of the hierarchy.",
    )


def _piecewise_leader():
    dom = DomainDescriptor.interval(0.0, 0.75)
    return InstanceDescriptor(
        "piecewise_leader",
        BMetricSpace(dom, DistanceSpec("abs"), 1.0),
        SelfMap("piecewise_leader", dom),
        {
            "nonexpansive": "falsified",
            "meir_keeler": "falsified",
            "leader": "certified_on_samples",
            "nonexpansive_leader": "falsified",
            "matkowski": "falsified",
            "boyd_wong": "falsified",
            "geraghty": "falsified",
            "orbit": "bounded_so_far",
            "fixed_point": "converged",
        },
        "x/3 on [0, 1/2] and x/3 + 1/4 on (1/2, 3/4]: a Leader contraction that is "
        "not non-expansive (jump at 1/2). Unique fixed point 0.",
        leader_hint=piecewise_leader_certificate,
    )


def _harmonic(name, dist, label):
    dom = DomainDescriptor.enumerated("harmonic")
    return InstanceDescriptor(
        name,
        BMetricSpace(dom, DistanceSpec(dist), 1.0),
        SelfMap("harmonic_shift", dom),
        {
            "nonexpansive": "certified_on_samples",
            "leader": "inconclusive",
            "orbit": "diverging",
            "fixed_point": "max_iter",
        },
        f"Shift H_n -> H_(n+1) on the harmonic partial sums with d = {label}, one end of the "
        "two-sided bound |x-y|/2 <= d <= |x-y|. Stand-in metric: the original construction "
        "is not reproduced. Unbounded orbit, no fixed point.",
        # a grid sees only the head of the sequence, where steps are large
        sampler={"strategy": "random", "count": 301, "seed": 42},
    )


def _square_b():
    dom = DomainDescriptor.interval(-2.0, 2.0)
    return InstanceDescriptor(
        "square_b",
        BMetricSpace(dom, DistanceSpec("square"), 2.0),
        SelfMap("halve", dom),
        dict(_ALL_CERTIFIED, axioms="pass", orbit="bounded_so_far", fixed_point="converged"),
        "Squared difference on [-2, 2]: a b-metric with coefficient s = 2, not a metric.",
    )


_REGISTRY = {
    "banach_half": _banach_half,
    "harmonic_shift_abs": lambda: _harmonic("harmonic_shift_abs", "abs", "|x-y|"),
    "harmonic_shift_low": lambda: _harmonic("harmonic_shift_low", "half_abs", "|x-y|/2"),
    "piecewise_leader": _piecewise_leader,
    "square_b": _square_b,
}


def list_instances() -> list[str]:
    return sorted(_REGISTRY)


def get_instance(name: str) -> InstanceDescriptor:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ArgumentError(f"unknown instance {name!r}; known: {', '.join(list_instances())}") from None
