import math

import numpy as np
import pytest

from avgsmooth import (
    WeightedSample,
    ambient_cover_bound,
    build_space,
    distance_additive_term,
    empirical_cover_bound,
    empirical_cover_estimate,
    eps0_from,
    generalization_bound,
    lip_cover_bound,
    sample_weak_class,
    tv_bound,
    weak_strong_log_check,
)
from avgsmooth.bounds import BoundReport
from avgsmooth.errors import InvalidParameter
from avgsmooth.slope import profile


def test_lip_cover_values():
    assert lip_cover_bound(8.0, 1.0, 1.0).value == 0.0
    assert lip_cover_bound(8.0, 1.0, 1.0).clamped
    rep = lip_cover_bound(0.5, 1.0, 1.0)
    assert rep.value == pytest.approx(32.0 * math.log(16.0))
    assert rep.value == pytest.approx(88.7228, abs=1e-3)
    assert not rep.clamped
    # diam enters through the base ratio
    assert lip_cover_bound(0.5, 1.0, 1.0, diam=2.0).value == pytest.approx(
        64.0 * math.log(16.0)
    )


def test_lip_cover_monotone_in_t():
    t = 4.0
    while t > 1e-3:
        assert lip_cover_bound(t / 2, 1.0, 2.0).value >= lip_cover_bound(t, 1.0, 2.0).value
        t /= 2


def test_ambient_cover_values():
    assert ambient_cover_bound(16.0, 1.0, 1.0).clamped
    rep = ambient_cover_bound(0.5, 1.0, 1.0)
    assert rep.value == pytest.approx(1024.0 * math.log(32.0))
    assert rep.value == pytest.approx(3548.91, abs=1e-2)
    with pytest.raises(InvalidParameter):
        ambient_cover_bound(0.5, 1.0, 1.0, diam=2.0)


def test_empirical_cover_values():
    assert empirical_cover_bound(2.0, 0.5, 1.0, 1.0).value == 0.0  # alpha*eps0 = 1
    rep = empirical_cover_bound(1.0, 0.5, 1.0, 1.0)
    assert rep.value == pytest.approx(8.0 * math.log(2.0))
    assert rep.value == pytest.approx(5.545, abs=1e-3)


def test_eps0_closed_form():
    assert eps0_from(10**8, 1.0, 1.0) == pytest.approx(0.1)
    # plugging the resolution through the cover bound stays finite
    rep = empirical_cover_bound(1.0, eps0_from(10**8, 1.0, 1.0), 1.0, 1.0)
    assert math.isfinite(rep.value) and rep.value > 0


def test_distance_additive_hand_sum():
    n, L, d, delta = 256, 1.0, 1.0, 0.05
    by_hand = (
        25.0 * 256.0 ** (-0.25)
        + 15.0 * 256.0 ** (-0.125)
        + (6.0 + 2.0**0.25) * 256.0 ** (-0.125)
        + (162.0 / 256.0 * math.log(40.0)) ** 0.25
    )
    assert distance_additive_term(n, L, d, delta).value == pytest.approx(by_hand)


def test_distance_additive_ladder_and_dominance():
    vals = [distance_additive_term(10**k, 1.0, 1.0, 0.05).value for k in range(2, 7)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    # for large n the sqrt(L) n^(-1/8d) term is the biggest of the four
    n = 10**6
    mid = 15.0 * n ** (-0.125)
    assert mid > 25.0 * n ** (-0.25)
    assert mid > (6.0 + 2.0**0.25) * n ** (-0.125)
    assert mid > (162.0 / n * math.log(40.0)) ** 0.25


def test_generalization_third_term_frozen():
    full = generalization_bound(100, 1.0, 1.0, 0.05).value
    first_two = 1.0 / 100.0 ** (1.0 / 8.0) + math.sqrt(2.0) / 100.0 ** (5.0 / 16.0)
    third = full - first_two
    assert third == pytest.approx(3.0 * math.sqrt(math.log(40.0) / 200.0), abs=1e-12)
    assert third == pytest.approx(0.4074305, abs=1e-6)


def test_generalization_direct_sum_and_kinds():
    n, L, d, delta = 10**4, 4.0, 1.0, 0.05
    by_hand = (
        math.sqrt(4.0) / (10**4) ** 0.125
        + math.sqrt(2.0) / (10**4) ** 0.3125
        + 3.0 * math.sqrt(math.log(40.0) / (2.0 * 10**4))
    )
    rep = generalization_bound(n, L, d, delta, kind="regression")
    assert rep.value == pytest.approx(by_hand)
    same = generalization_bound(n, L, d, delta, kind="classification")
    assert same.value == rep.value
    ladder = [generalization_bound(10**k, 4.0, 1.0, 0.05).value for k in (2, 3, 4)]
    assert ladder[0] > ladder[1] > ladder[2]
    with pytest.raises(InvalidParameter):
        generalization_bound(n, L, d, delta, kind="ranking")


def test_tv_bound_frozen_and_vacuous():
    rep = tv_bound(4, 100, 0.05)
    assert rep.value == pytest.approx(0.2 + math.sqrt(0.02 * math.log(40.0)))
    assert rep.value == pytest.approx(0.47162, abs=1e-5)
    assert rep.notes == ""
    vac = tv_bound(100, 100, 0.05)
    assert vac.value >= 1.0
    assert "vacuous" in vac.notes


def test_tv_bound_monte_carlo(rng):
    pi = np.array([0.4, 0.3, 0.2, 0.1])
    n = 100
    bound = tv_bound(4, n, 0.05).value
    hits = 0
    trials = 1000
    for _ in range(trials):
        counts = rng.multinomial(n, pi)
        l1 = float(np.abs(counts / n - pi).sum())
        hits += l1 <= bound
    assert hits / trials >= 0.95


def test_weak_strong_log_frozen_example():
    lhs, rhs = weak_strong_log_check([1.0, 2.0, 4.0, 8.0], [0.25] * 4)
    assert lhs == pytest.approx(3.75)
    # weak mean: max over the sorted tail masses is 8 * 0.25 = 4 * 0.5 = 2
    assert rhs == pytest.approx(2.0 * 2.0 * math.log(4.0))
    assert rhs == pytest.approx(5.545, abs=1e-3)
    assert lhs <= rhs


def test_weak_strong_point_mass_degenerates():
    lhs, rhs = weak_strong_log_check([0.7], [1.0])
    assert lhs == pytest.approx(0.7)
    assert rhs == 0.0  # log(1/p*) vanishes; the inequality genuinely fails


def test_weak_strong_fuzz(rng):
    for _ in range(500):
        k = int(rng.integers(2, 12))
        v = rng.uniform(0.0, 10.0, size=k)
        w = rng.uniform(0.05, 1.0, size=k)
        w /= w.sum()
        lhs, rhs = weak_strong_log_check(v, w)
        assert lhs <= rhs + 1e-9


def test_weak_strong_input_validation():
    with pytest.raises(InvalidParameter):
        weak_strong_log_check([-1.0, 2.0], [0.5, 0.5])
    with pytest.raises(InvalidParameter):
        weak_strong_log_check([1.0, 2.0], [0.7, 0.7])


def test_bound_report_rejects_negative():
    with pytest.raises(InvalidParameter):
        BoundReport("broken", value=-0.5)
    rep = lip_cover_bound(0.5, 1.0, 1.0)
    assert float(rep) == rep.value


def test_cover_estimate_degenerate_banks():
    space = build_space(coords=np.linspace(0, 1, 8)[:, None])
    sample = WeightedSample(space)
    same = [np.full(8, 0.3)] * 5
    assert empirical_cover_estimate(same, sample, 0.1) == 1
    consts = [np.zeros(8), np.ones(8)]
    assert empirical_cover_estimate(consts, sample, 0.4) == 2
    assert empirical_cover_estimate(consts, sample, 1.5) == 1
    assert empirical_cover_estimate([], sample, 0.4) == 0


def test_sampled_weak_class_members_qualify():
    space = build_space(coords=np.linspace(0, 1, 64)[:, None])
    sample = WeightedSample(space)
    bank = sample_weak_class(space, sample.weights, L=4.0, count=40, seed=2)
    assert len(bank) == 40
    for f in bank:
        assert np.all(f >= 0.0) and np.all(f <= 1.0)
        assert profile(sample, f).weak_mean <= 4.0


def test_cover_estimate_dominated_by_ambient_bound():
    space = build_space(coords=np.linspace(0, 1, 64)[:, None])
    sample = WeightedSample(space)
    bank = sample_weak_class(space, sample.weights, L=4.0, count=120, seed=7)
    for t in (0.2, 0.3):
        est = empirical_cover_estimate(bank, sample, t)
        assert math.log(max(est, 1)) <= ambient_cover_bound(t, 4.0, 1.0).value
