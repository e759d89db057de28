import numpy as np
import pytest

from contracta import classifiers as cl
from contracta.classifiers import (CERTIFIED, FALSIFIED, INCONCLUSIVE, AlphaSpec, ClassifyConfig,
                                   ClassVerdict, DeltaSchedule, PhiSpec, Witness, check_boyd_wong,
                                   check_geraghty, check_leader, check_matkowski, check_meir_keeler,
                                   check_nonexpansive, classify, leader_candidates, replay_witness)
from contracta.corpus import piecewise_leader_certificate
from contracta.errors import ArgumentError, AuditError
from contracta.orbit import SelfMap
from contracta.space import BMetricSpace, DistanceSpec, DomainDescriptor, SampleSet, sample_pairs


@pytest.fixture(scope="module")
def grid_pw(piecewise):
    return sample_pairs(piecewise.space.domain, "grid", 301)


@pytest.fixture(scope="module")
def grid_banach(banach):
    return sample_pairs(banach.space.domain, "grid", 301)


# --- non-expansive ----------------------------------------------------------

def test_nonexpansive_pair_straddling_half(piecewise):
    v = check_nonexpansive(piecewise.space, piecewise.map, SampleSet.from_pairs([(0.5, 0.51)]))
    assert v.status == FALSIFIED
    # T(0.51) - T(0.5) = 0.42 - 1/6
    assert v.witness.value == pytest.approx((0.42 - 1 / 6) / 0.01, abs=1e-9)
    assert v.witness.value == pytest.approx(25.333333, abs=1e-6)


def test_nonexpansive_grid_witness_is_worst(piecewise, grid_pw):
    v = check_nonexpansive(piecewise.space, piecewise.map, grid_pw)
    w = v.witness
    assert v.status == FALSIFIED
    assert (w.x, w.y) == (0.5, 0.5025)
    assert w.value >= 20
    assert replay_witness(piecewise.space, piecewise.map, v)


def test_nonexpansive_certified(banach, grid_banach):
    v = check_nonexpansive(banach.space, banach.map, grid_banach)
    assert v.status == CERTIFIED and v.witness is None
    assert v.params["max_ratio"] == pytest.approx(0.5)


def test_falsified_needs_witness():
    with pytest.raises(ValueError):
        ClassVerdict("nonexpansive", FALSIFIED)


# --- Meir-Keeler ------------------------------------------------------------

def test_meir_keeler_boundary_pair(piecewise):
    v = check_meir_keeler(piecewise.space, piecewise.map, [0.25], None,
                          SampleSet.from_pairs([(0.5, 0.75)]))
    w = v.witness
    assert v.status == FALSIFIED
    assert (w.x, w.y, w.d_before) == (0.5, 0.75, 0.25)
    assert w.d_after == pytest.approx(1 / 3, abs=1e-15)
    assert replay_witness(piecewise.space, piecewise.map, v)


def test_meir_keeler_grid_falsifier_defeats_every_delta(piecewise, grid_pw):
    v = check_meir_keeler(piecewise.space, piecewise.map, [0.25], None, grid_pw)
    w = v.witness
    assert v.status == FALSIFIED
    assert w.d_before == pytest.approx(0.25, abs=1e-12)
    assert w.d_after >= 0.25
    assert w.x <= 0.5 < w.y  # the pair straddles the jump
    assert replay_witness(piecewise.space, piecewise.map, v)


def test_meir_keeler_banach_certificate(banach, grid_banach):
    v = check_meir_keeler(banach.space, banach.map, cl.DEFAULT_EPSILONS, None, grid_banach)
    assert v.status == CERTIFIED
    for eps in cl.DEFAULT_EPSILONS:
        c = v.certificate_for(eps)
        # the whole band eps <= d < 2 eps maps to d/2 < eps
        assert c.delta == eps and c.max_image < eps


def test_meir_keeler_empty_band_is_inconclusive(banach):
    s = SampleSet.from_points([0.0, 0.01])
    v = check_meir_keeler(banach.space, banach.map, [0.5], None, s)
    assert v.status == INCONCLUSIVE
    assert v.params["per_epsilon"][0]["reason"] == "no sampled pair in any band"


def test_epsilons_validated(banach, grid_banach):
    with pytest.raises(ArgumentError):
        check_meir_keeler(banach.space, banach.map, [], None, grid_banach)
    with pytest.raises(ArgumentError):
        check_meir_keeler(banach.space, banach.map, [0.1, -1], None, grid_banach)


def test_delta_schedule():
    assert DeltaSchedule(1.0, 0.5, 3).deltas(0.2).tolist() == [0.2, 0.1, 0.05]
    with pytest.raises(ArgumentError):
        DeltaSchedule(ratio=1.0)


# --- Leader -----------------------------------------------------------------

@pytest.mark.parametrize("eps, r, delta", [(0.1, 3, 1.25), (0.05, 4, 1.975), (0.25, 2, 0.875), (0.5, 2, 1.75)])
def test_piecewise_certificate_formula(eps, r, delta):
    got_r, got_delta = piecewise_leader_certificate(eps)
    assert got_r == r and got_delta == pytest.approx(delta, abs=1e-15)
    assert 1 / (4 * 3 ** (r - 1)) < eps / 2 <= 1 / (4 * 3 ** (r - 2))


def test_leader_piecewise_with_hint(piecewise, grid_pw):
    v = check_leader(piecewise.space, piecewise.map, [0.1], None, 10, grid_pw,
                     hint=piecewise_leader_certificate)
    c = v.certificate_for(0.1)
    assert v.status == CERTIFIED
    assert (c.r, c.delta, c.source) == (3, 1.25, "hint")


def test_leader_schedule_certificate_holds_on_samples(piecewise, grid_pw):
    v = check_leader(piecewise.space, piecewise.map, [0.1, 0.25], None, 10, grid_pw)
    assert v.status == CERTIFIED
    d = piecewise.space.dist(grid_pw.x, grid_pw.y)
    for c in v.certificates:
        tx = piecewise.map.iterate(grid_pw.x, c.r)
        ty = piecewise.map.iterate(grid_pw.y, c.r)
        # window edge carries the tau_eq margin, like the checker
        window = d < c.epsilon + c.delta - piecewise.space.tau_eq
        assert np.all(piecewise.space.dist(tx, ty)[window] < c.epsilon)


def test_leader_never_falsifies_identity():
    space = BMetricSpace(DomainDescriptor.interval(0, 1), DistanceSpec("abs"))
    v = check_leader(space, SelfMap("identity", space.domain), [0.1], None, 5,
                     sample_pairs(space.domain, "grid", 21))
    assert v.status == INCONCLUSIVE and v.witness is None


def test_leader_budget(banach, grid_banach):
    with pytest.raises(ArgumentError):
        check_leader(banach.space, banach.map, [0.1], None, 20, grid_banach, max_iter=10)


def test_leader_candidate_order():
    sched = DeltaSchedule(1.0, 0.5, 2)
    got = list(leader_candidates(0.1, 2, sched, hint=lambda e: (2, 0.3)))
    assert got[0] == (2, 0.3, "hint")
    assert [(r, d) for r, d, _ in got[1:]] == [(1, 0.1), (1, 0.05), (2, 0.1), (2, 0.05)]


# --- Matkowski / Boyd-Wong --------------------------------------------------

def test_matkowski_banach(banach, grid_banach):
    assert check_matkowski(banach.space, banach.map, PhiSpec("t/2"), grid_banach).status == CERTIFIED


def test_matkowski_phi_not_below_identity(banach, grid_banach):
    v = check_matkowski(banach.space, banach.map, PhiSpec("t"), grid_banach)
    assert v.status == FALSIFIED and v.witness.kind == "phi_below_identity"
    assert replay_witness(banach.space, banach.map, v, phi=PhiSpec("t"))


def test_matkowski_phi_not_monotone(banach, grid_banach):
    phi = PhiSpec("piecewise(t < 0.5 : t/2 ; t/4)")
    v = check_matkowski(banach.space, banach.map, phi, grid_banach)
    assert v.status == FALSIFIED and v.witness.kind == "phi_monotone"
    assert v.witness.t == 0.5
    assert replay_witness(banach.space, banach.map, v, phi=phi)


def test_matkowski_decay_audit(banach, grid_banach):
    v = check_matkowski(banach.space, banach.map, PhiSpec("t/2"), grid_banach, iter_depth=5)
    assert v.status == FALSIFIED and v.witness.kind == "phi_decay"


def test_matkowski_sample_violation(piecewise, grid_pw):
    v = check_matkowski(piecewise.space, piecewise.map, PhiSpec("t/2"), grid_pw)
    assert v.status == FALSIFIED and v.witness.kind == "pair"
    assert replay_witness(piecewise.space, piecewise.map, v, phi=PhiSpec("t/2"))


def test_boyd_wong_right_jump_fails(banach, grid_banach):
    phi = PhiSpec("piecewise(t <= 0.5 : t/4 ; t/2)")
    v = check_boyd_wong(banach.space, banach.map, phi, grid_banach)
    assert v.status == FALSIFIED and v.witness.kind == "semicontinuity"
    assert v.witness.t == 0.5 and v.witness.bound == 0.125
    assert replay_witness(banach.space, banach.map, v, phi=phi)


def test_boyd_wong_right_continuous_jump_passes_audit(banach, grid_banach):
    # upper semicontinuous from the right; fails only on samples below 1/2
    v = check_boyd_wong(banach.space, banach.map, PhiSpec("piecewise(t < 0.5 : t/4 ; t/2)"), grid_banach)
    assert v.status == FALSIFIED and v.witness.kind == "pair" and v.witness.d_before < 0.5


def test_boyd_wong_banach(banach, grid_banach):
    assert check_boyd_wong(banach.space, banach.map, PhiSpec("t/2"), grid_banach).status == CERTIFIED


# --- Geraghty ---------------------------------------------------------------

def test_geraghty_banach(banach, grid_banach):
    assert check_geraghty(banach.space, banach.map, AlphaSpec("1/2"), grid_banach).status == CERTIFIED


def test_geraghty_alpha_out_of_range(banach, grid_banach):
    with pytest.raises(AuditError) as info:
        check_geraghty(banach.space, banach.map, AlphaSpec("1"), grid_banach)
    assert info.value.value == 1.0


def test_geraghty_limit_audit(banach, grid_banach):
    # alpha -> 1 as t -> 1/2, so alpha(s_n) -> 1 along s_n = 1/2 + 1/n
    alpha = AlphaSpec("1 - ((t - 0.5)^2 + 1e-12)/10")
    v = check_geraghty(banach.space, banach.map, alpha, grid_banach)
    assert v.status == FALSIFIED and v.witness.kind == "limit"
    assert v.witness.t == pytest.approx(0.5, abs=0.01)
    assert replay_witness(banach.space, banach.map, v, alpha=alpha)


def test_geraghty_type_ii_needs_decreasing_probes(banach, grid_banach):
    with pytest.raises(ArgumentError):
        check_geraghty(banach.space, banach.map, AlphaSpec("1/2", "type_II"), grid_banach,
                       probe_sequences=[np.array([0.1, 0.2])])


def test_geraghty_type_ii_default_probes(banach, grid_banach):
    v = check_geraghty(banach.space, banach.map, AlphaSpec("1/2", "type_II"), grid_banach)
    assert v.status == CERTIFIED


# --- classify ---------------------------------------------------------------

def test_classify_banach(banach, grid_banach):
    placement = classify(banach.space, banach.map, ClassifyConfig(grid_banach))
    assert list(placement.verdicts) == list(cl.CLASS_ORDER)
    assert set(placement.certified) == set(cl.CLASS_ORDER)
    assert placement.faults == ()
    assert placement.orbit.status == "bounded_so_far"


def test_classify_piecewise(piecewise, grid_pw):
    placement = classify(piecewise.space, piecewise.map,
                         ClassifyConfig(grid_pw, leader_hint=piecewise.leader_hint))
    assert placement.certified == ["leader"]
    assert placement.status("nonexpansive_leader") == FALSIFIED
    assert placement.faults == ()
    for v in placement.verdicts.values():
        if v.status == FALSIFIED:
            assert replay_witness(piecewise.space, piecewise.map, v, PhiSpec("t/2"), AlphaSpec("1/2"))


def test_classify_reports_alpha_range_as_falsified(banach, grid_banach):
    placement = classify(banach.space, banach.map, ClassifyConfig(grid_banach, alpha="1"))
    assert placement.verdicts["geraghty"].witness.kind == "alpha_range"


def test_classify_flags_consistency_fault(banach, grid_banach, monkeypatch):
    fake = ClassVerdict("meir_keeler", FALSIFIED,
                        Witness("pair", x=0.0, y=1.0, epsilon=1.0, r=1, d_before=1.0, d_after=0.5))
    monkeypatch.setattr(cl, "check_meir_keeler", lambda *a, **k: fake)
    placement = classify(banach.space, banach.map, ClassifyConfig(grid_banach))
    faults = {(f["certified"], f["falsified"]) for f in placement.faults}
    assert ("boyd_wong", "meir_keeler") in faults
    # the fabricated witness does not survive replay
    assert all(f["witness_reproduced"] is False for f in placement.faults)
