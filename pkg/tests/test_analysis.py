import math
import statistics
import time
import warnings

import mpmath
import numpy as np
import pytest

from supermult.analysis import (
    DomainWarning,
    closed_form_nu_p,
    crossover_certified,
    crossover_predicate,
    lemma1_lower_bound,
    lemma2_bound,
    lemma2_consistency,
    min_output_renyi,
    n_haar,
    overlap_identity,
    rank_necessity_check,
    scaling_experiment,
    violation_report,
)
from supermult.channels import (
    RandomUnitaryChannel,
    conjugate,
    identity_channel,
    random_unitary_channel,
    werner_holevo,
    weyl_channel,
)
from supermult.linalg import ResourceError, haar_unitary, max_entangled_state, schatten_norm
from supermult.optimize import OptimizerConfig, certify_epsilon, maximize_output_pnorm
from supermult.rng import SeededRng

FAST = OptimizerConfig(num_starts=4, seed=3)


def brute_overlap(ruc):
    """<Phi|omega|Phi> straight from the definition: sum over all n^2 Kraus pairs."""
    d, n = ruc.dim, ruc.n
    phi = max_entangled_state(d)
    total = 0.0
    for v in ruc.unitaries:
        for w in ruc.unitaries:
            vec = np.kron(v, w.conj()) @ phi
            total += abs(np.vdot(phi, vec)) ** 2
    return total / n**2


# --- Lemma 1 -----------------------------------------------------------------------


def test_lemma1_single_unitary():
    ch = RandomUnitaryChannel([haar_unitary(4, SeededRng(1))])
    r = lemma1_lower_bound(ch, 3)
    assert r.overlap == pytest.approx(1, abs=1e-12)
    assert r.pnorm == pytest.approx(1, abs=1e-12)
    assert r.holds


def test_lemma1_weyl_qubit():
    r = lemma1_lower_bound(weyl_channel(2), 2)
    assert r.overlap == pytest.approx(0.25, abs=1e-12)
    assert r.pnorm == pytest.approx(0.5, abs=1e-12)
    assert r.pnorm >= r.bound and r.holds


def test_lemma1_haar_identity_against_brute_force():
    ch = random_unitary_channel(8, 16, 4)
    r = lemma1_lower_bound(ch, 5)
    assert r.overlap >= 1 / 16
    assert abs(r.overlap_identity - brute_overlap(ch)) <= 1e-12
    assert abs(r.overlap - r.overlap_identity) <= 1e-9
    assert r.pnorm >= r.lambda_max >= r.overlap - 1e-12


def test_lemma1_omega_is_a_state():
    from supermult.channels import tensor_output_pure

    ch = random_unitary_channel(3, 5, 2)
    omega = tensor_output_pure(ch, conjugate(ch), max_entangled_state(3))
    assert abs(np.trace(omega) - 1) <= 1e-12
    assert np.linalg.eigvalsh(omega).min() >= -1e-12
    assert lemma1_lower_bound(ch, 2).pnorm == pytest.approx(schatten_norm(omega, 2), abs=1e-12)


def test_lemma1_guard():
    with pytest.raises(ResourceError):
        lemma1_lower_bound(RandomUnitaryChannel([np.eye(65)]), 2)


# --- Lemma 2 -----------------------------------------------------------------------


def test_lemma2_bound_examples():
    assert lemma2_bound(0, 4, 2) == pytest.approx(0.5)
    for d in (2, 5, 9):
        for p in (1.5, 4.0, math.inf):
            assert lemma2_bound(0, d, p) == pytest.approx(schatten_norm(np.eye(d) / d, p), rel=1e-12)
    assert lemma2_bound(0.5, 100, 3) == pytest.approx(0.060822, abs=1e-6)
    assert lemma2_bound(0.5, 100, 3) == pytest.approx(0.015 ** (2 / 3), rel=1e-14)


def test_lemma2_bound_is_max_of_capped_spectra():
    # oracle: a spectrum in [0, (1+eps)/d] summing to one, filled greedily, has the largest p-norm;
    # the bound is reached when d/(1+eps) is an integer and dominates otherwise
    rng = np.random.default_rng(5)
    d, eps, p = 6, 0.5, 3.0
    cap = (1 + eps) / d
    bound = lemma2_bound(eps, d, p)
    for _ in range(2000):
        w = rng.dirichlet(np.ones(d))
        if w.max() <= cap:
            assert np.sum(w**p) ** (1 / p) <= bound + 1e-12
    greedy = np.array([cap] * 4)
    assert np.sum(greedy**p) ** (1 / p) == pytest.approx(bound)


def test_n_haar_examples():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DomainWarning)
        assert n_haar(1, 0.5) == 0
        assert n_haar(100, 0.5) == 246838
    with pytest.warns(DomainWarning):
        n_haar(10, 0.5)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            n_haar(50, bad)


def test_n_haar_monotone_in_eps():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DomainWarning)
        vals = [n_haar(40, e) for e in np.linspace(0.05, 0.95, 19)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_lemma2_consistency_equality_cases():
    r = lemma2_consistency(weyl_channel(4), 3, FAST)
    assert r.nu_hat == pytest.approx(4 ** (-2 / 3), abs=1e-9)
    assert abs(r.nu_hat - r.bound) <= 1e-9 and r.holds
    single = RandomUnitaryChannel([haar_unitary(4, SeededRng(6))])
    r = lemma2_consistency(single, 3, FAST)
    assert r.nu_hat == pytest.approx(1, abs=1e-9)
    assert r.bound == pytest.approx(1, abs=1e-9) and r.holds
    assert "not prove" in r.note


def test_lemma2_consistency_haar():
    for s in range(10):
        r = lemma2_consistency(random_unitary_channel(16, 256, s), 5, FAST)
        assert r.holds, r


# --- violation reports ------------------------------------------------------------------


def test_violation_identity_gap_zero():
    rep = violation_report(identity_channel(2), identity_channel(2), 3, "max_entangled", FAST)
    assert rep.gap == pytest.approx(0, abs=1e-12)
    assert not rep.certified


def test_violation_werner_holevo_p5():
    ch = werner_holevo(3)
    rep = violation_report(ch, ch, 5, "max_entangled", FAST)
    assert rep.gap > 0
    assert rep.tensor_exact and rep.certified
    assert rep.nu1_upper == pytest.approx(2 ** (1 / 5 - 1))
    assert rep.product == pytest.approx(rep.nu1_hat * rep.nu2_hat, abs=1e-12)


def test_violation_werner_holevo_tensor_spectrum():
    # (N (x) N)(Phi_3) has spectrum {1/3, 1/12 x 8}; check the exact tensor value against it
    ch = werner_holevo(3)
    for p in (2.0, 4.79, 7.0):
        rep = violation_report(ch, ch, p, "max_entangled", FAST)
        want = ((1 / 3) ** p + 8 * (1 / 12) ** p) ** (1 / p)
        assert rep.tensor_lower == pytest.approx(want, rel=1e-12)


def test_violation_lemma1_consistency():
    for s in range(3):
        ch = random_unitary_channel(4, 6, s)
        rep = violation_report(ch, conjugate(ch), 5, "max_entangled", FAST)
        assert rep.tensor_lower >= 1 / 6 - 1e-10


def test_violation_optimize_witness_trivial_direction():
    for s in range(4):
        c1 = random_unitary_channel(2, 2 + s % 2, s)
        c2 = random_unitary_channel(2, 3, 10 + s)
        rep = violation_report(c1, c2, 3, "optimize", FAST)
        assert rep.tensor_lower >= rep.product - 1e-6
        assert rep.method == "optimize"


def test_violation_rejects_unknown_witness_and_mismatch():
    with pytest.raises(ValueError):
        violation_report(identity_channel(2), identity_channel(2), 3, "bogus", FAST)
    with pytest.raises(ValueError):
        violation_report(identity_channel(2), identity_channel(3), 3, "max_entangled", FAST)


def test_closed_forms():
    assert closed_form_nu_p(werner_holevo(4), 2) == pytest.approx(3 ** -0.5)
    assert closed_form_nu_p(weyl_channel(3), math.inf) == pytest.approx(1 / 3)
    assert closed_form_nu_p(random_unitary_channel(3, 2, 0), 2) is None
    assert closed_form_nu_p(conjugate(werner_holevo(3)), 5) == pytest.approx(2 ** -0.8)


# --- crossover ---------------------------------------------------------------------


def oracle_predicate(d, p, eps):
    with mpmath.workdps(100):
        e = mpmath.mpf(eps)
        n = mpmath.ceil(134 / e**2 * d * mpmath.log(d))
        return bool(((1 + e) / d) ** (2 - mpmath.mpf(2) / p) < 1 / n)


def test_crossover_p2_never():
    for eps in (0.1, 0.5, 0.9):
        r = crossover_certified(2.0, eps)
        assert not r.crossed and r.d_star is None
        assert "n >= d" in r.reason


def test_crossover_p3_regression():
    r = crossover_certified(3.0, 0.9)
    assert r.crossed
    assert r.d_star == 1278161902051
    assert not oracle_predicate(r.d_star - 1, 3.0, 0.9)
    assert oracle_predicate(r.d_star, 3.0, 0.9)


def test_crossover_small_d_false():
    assert not crossover_predicate(100, 3, 0.9)
    assert not oracle_predicate(100, 3, 0.9)


def test_crossover_monotone_in_p():
    ds = [crossover_certified(p, 0.5).d_star for p in (2.5, 3, 4, 6)]
    assert all(b <= a for a, b in zip(ds, ds[1:]))


def test_crossover_bad_eps():
    with pytest.raises(ValueError):
        crossover_certified(3, 1.2)


# --- Renyi, rank, scaling ---------------------------------------------------------------


def test_min_output_renyi_examples():
    for d in (2, 3):
        assert min_output_renyi(weyl_channel(d), 3, FAST).value == pytest.approx(math.log2(d), abs=1e-9)
    assert min_output_renyi(identity_channel(3), 2, FAST).value == pytest.approx(0, abs=1e-12)
    r = min_output_renyi(werner_holevo(3), 5, FAST)
    assert r.value == pytest.approx(1.0, abs=1e-9)
    assert r.is_upper_bound


def test_rank_check_examples():
    r = rank_necessity_check(random_unitary_channel(4, 2, 0), FAST)
    assert r.claim_triggered and r.claim_holds
    assert r.eps_hat >= 1 - 1e-9 and r.rank_bound_holds
    r = rank_necessity_check(weyl_channel(2), FAST)
    assert not r.claim_triggered and r.claim_holds
    r = rank_necessity_check(RandomUnitaryChannel([haar_unitary(8, SeededRng(2))]), FAST)
    assert r.eps_hat == pytest.approx(7, abs=1e-9)


def test_scaling_examples():
    recs = scaling_experiment([8], [2.0, 8.0], 2.0, [0, 1, 0], FAST)
    assert [(r.multiplier, r.seed) for r in recs] == [(2.0, 0), (2.0, 0), (2.0, 1), (8.0, 0), (8.0, 0), (8.0, 1)]
    assert recs[0].eps_hat == recs[1].eps_hat
    assert recs[0].n == math.ceil(2 * 8 * math.log(8))
    with pytest.raises(ResourceError):
        scaling_experiment([65], [2.0], 2.0, [0], FAST)


def test_scaling_d2_cell_versus_weyl():
    recs = scaling_experiment([8], [64 / (8 * math.log(8))], 2.0, list(range(5)), FAST)
    assert all(r.n == 64 for r in recs)
    assert min(r.eps_hat for r in recs) > 1e-3
    assert certify_epsilon(weyl_channel(8), FAST).eps_hat <= 1e-9


def test_scaling_median_decreases():
    t0 = time.perf_counter()
    recs = scaling_experiment([16], [2.0, 8.0, 32.0], 2.0, list(range(5)), FAST)
    med = [statistics.median(r.eps_hat for r in recs if r.multiplier == m) for m in (2.0, 8.0, 32.0)]
    assert med[0] > med[1] > med[2]
    assert time.perf_counter() - t0 < 120
