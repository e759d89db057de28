"""Finite truncations of the sigma/theta quantities over index-sequence pairs.

For a base point x and a pair of index sequences (m, n) with m(k) <= n(k)
both diverging::

    sigma(m, n, p) = inf_k  d(T^(m(k)+p) x, T^(n(k)+p) x)
    sigma(p)       = inf over pairs of sigma(m, n, p)
    theta(p)       = sup over pairs of sigma(m, n, p)

Only finitely many pairs and k < K are evaluated, so ``sigma_mnp`` is an
upper bound on the true infimum over k, ``sigma_p`` an upper bound on the
true sigma(p) and ``theta_p`` a lower bound on the true theta(p).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .orbit import SelfMap, picard
from .space import BMetricSpace

DEFAULT_OFFSETS = (0, 1, 2, 3)
DEFAULT_GAPS = (0, 1, 2, 3, 4)
DEFAULT_K = 30
DEFAULT_P_MAX = 30
BIAS_NOTE = ("sigma_mnp and sigma_p are upper bounds (finite k and finite family); "
             "theta_p is a lower bound (finite family)")


@dataclass(frozen=True)
class Member:
    """One (m, n) pair: parametric ``m(k) = k + offset, n(k) = k + offset + gap`` or a table."""

    offset: int = 0
    gap: int = 0
    m_table: tuple | None = None
    n_table: tuple | None = None

    def __post_init__(self):
        if self.m_table is None:
            if self.offset < 0 or self.gap < 0:
                raise ArgumentError("offset and gap must be >= 0")
            return
        m, n = np.asarray(self.m_table), np.asarray(self.n_table)
        if m.shape != n.shape or m.ndim != 1 or m.size == 0:
            raise ArgumentError("m and n tables must be nonempty and of equal length")
        if np.any(m < 0) or np.any(m > n):
            raise ArgumentError("tables need 0 <= m(k) <= n(k)")
        if np.any(np.diff(m) <= 0) or np.any(np.diff(n) <= 0):
            raise ArgumentError("tables must be strictly increasing")

    def indices(self, K: int) -> tuple[np.ndarray, np.ndarray]:
        if self.m_table is None:
            k = np.arange(K)
            return k + self.offset, k + self.offset + self.gap
        if K > len(self.m_table):
            raise ArgumentError(f"table has {len(self.m_table)} entries, K={K} requested")
        return np.asarray(self.m_table[:K]), np.asarray(self.n_table[:K])

    def label(self) -> str:
        if self.m_table is None:
            return f"a={self.offset},g={self.gap}"
        return f"table[{len(self.m_table)}]"


@dataclass(frozen=True)
class IndexFamily:
    members: tuple
    K: int = DEFAULT_K

    def __post_init__(self):
        if not self.members:
            raise ArgumentError("index family is empty")
        if self.K < 1:
            raise ArgumentError("K must be >= 1")

    @classmethod
    def parametric(cls, offsets=DEFAULT_OFFSETS, gaps=DEFAULT_GAPS, K=DEFAULT_K, tables=()):
        members = [Member(a, g) for a in offsets for g in gaps]
        members += [Member(m_table=tuple(m), n_table=tuple(n)) for m, n in tables]
        return cls(tuple(members), K)

    def max_index(self, p_max: int) -> int:
        return max(int(m.indices(self.K)[1].max()) for m in self.members) + p_max


def _orbit_points(space, tmap, x, needed):
    return picard(space, tmap, x, needed).points


def sigma_mnp(space: BMetricSpace, tmap: SelfMap, x: float, member: Member, p: int, K: int,
              orbit=None) -> float:
    """min over k < K of d(T^(m(k)+p) x, T^(n(k)+p) x)."""
    if K < 1:
        raise ArgumentError("K must be >= 1")
    if p < 0:
        raise ArgumentError("p must be >= 0")
    m, n = member.indices(K)
    need = int(n.max()) + p
    pts = orbit if orbit is not None else _orbit_points(space, tmap, x, need)
    if len(pts) <= need:
        raise ArgumentError(f"orbit prefix of length {len(pts)} does not reach index {need}")
    return float(np.min(space.dist(pts[m + p], pts[n + p])))


@dataclass(frozen=True, eq=False)
class SigmaReport:
    members: tuple  # labels
    p_values: tuple
    table: np.ndarray  # shape (members, p_max + 1)
    sigma_p: np.ndarray
    theta_p: np.ndarray
    member_monotone: tuple
    sigma_p_monotone: bool
    theta_p_monotone: bool
    squeeze_holds: bool
    squeeze_by_p: tuple
    limits: dict
    nonexpansive_on_orbit: bool
    bias: str = field(default=BIAS_NOTE)


def probe(space: BMetricSpace, tmap: SelfMap, x: float, family: IndexFamily,
          p_max: int = DEFAULT_P_MAX, K: int | None = None) -> SigmaReport:
    """Tabulate sigma(m, n, p), sigma(p), theta(p) for p = 0..p_max and flag their relations.

    Flags use ``space.tau_eq``.  Nothing here raises on a failed flag: the
    squeeze relation ``theta(p+1) <= sigma(p)`` in particular is reported,
    not asserted.
    """
    if p_max < 0:
        raise ArgumentError("p_max must be >= 0")
    K = family.K if K is None else K
    fam = IndexFamily(family.members, K)
    need = fam.max_index(p_max)
    pts = _orbit_points(space, tmap, x, need)
    tau = space.tau_eq
    table = np.array([[sigma_mnp(space, tmap, x, m, p, K, orbit=pts) for p in range(p_max + 1)]
                      for m in fam.members])
    sigma_p = table.min(axis=0)
    theta_p = table.max(axis=0)
    member_mono = tuple(bool(np.all(row[1:] <= row[:-1] + tau)) for row in table)
    squeeze = tuple(bool(theta_p[p + 1] <= sigma_p[p] + tau) for p in range(p_max))

    # non-expansiveness restricted to pairs of orbit points
    img = space.dist(pts[1:, None], pts[None, 1:])
    pre = space.dist(pts[:-1, None], pts[None, :-1])
    ne = bool(np.all(img <= pre + tau))
    return SigmaReport(
        members=tuple(m.label() for m in fam.members),
        p_values=tuple(range(p_max + 1)),
        table=table,
        sigma_p=sigma_p,
        theta_p=theta_p,
        member_monotone=member_mono,
        sigma_p_monotone=bool(np.all(sigma_p[1:] <= sigma_p[:-1] + tau)),
        theta_p_monotone=bool(np.all(theta_p[1:] <= theta_p[:-1] + tau)),
        squeeze_holds=all(squeeze),
        squeeze_by_p=squeeze,
        limits={"sigma": float(sigma_p[-1]), "theta": float(theta_p[-1])},
        nonexpansive_on_orbit=ne,
    )
