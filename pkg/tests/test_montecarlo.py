import json
import math

import numpy as np
import pytest

from jointsparse.bounds import a_l_constant, bernstein_tail
from jointsparse.ensembles import dirac_fourier
from jointsparse.montecarlo import (
    ConfigError,
    ExperimentConfig,
    PhaseCurve,
    binomial_se,
    draw_instance,
    empirical_al,
    empirical_bernstein_tail,
    phase_curve,
    preset,
    run_trial,
)
from jointsparse.montecarlo import _matrix_for_trial


def small_config(**kw):
    base = dict(ensemble="Spherical", n=12, N=30, k_grid=(1, 3, 5), L_grid=(1, 3),
                model="model1", trials=6, base_seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


# ----- configuration ----------------------------------------------------------

@pytest.mark.parametrize("bad", [dict(k_grid=()), dict(L_grid=()), dict(trials=0),
                                 dict(algorithms=("lasso",)), dict(model="model3"),
                                 dict(k_grid=(40,)), dict(L_grid=(0,)), dict(algorithms=())])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        small_config(**bad).validate()


def test_config_round_trip_and_digest():
    c = small_config()
    d = c.to_dict()
    assert ExperimentConfig.from_dict(json.loads(json.dumps(d))) == c
    assert c.digest() == ExperimentConfig.from_dict(d).digest()
    assert c.digest() != small_config(trials=7).digest()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"bogus": 1})


def test_presets():
    f1, f2, f3 = preset("fig1"), preset("fig2"), preset("fig3")
    assert (f1.ensemble, f1.n, f1.n_columns, f1.model, f1.L_grid) == ("Spherical", 32, 256, "model1", (1, 2, 4))
    assert set(f1.algorithms) == {"l21", "thresh", "somp"}
    assert (f2.ensemble, f2.n_columns, f2.model) == ("DiracFourier", 64, "model2")
    assert (f3.ensemble, f3.n, f3.n_columns, set(f3.algorithms)) == ("AlltopGabor", 29, 841, {"l21", "somp"})
    assert f1.trials == 100 and f1.redraw_matrix
    for f in (f1, f2, f3):
        f.validate()


# ----- trials -----------------------------------------------------------------

def test_instance_draw_model_properties():
    A = dirac_fourier(8).entries
    X, S = draw_instance(A, "model2", 3, 4, seed=1)
    assert len(S) == 3
    assert np.count_nonzero(np.linalg.norm(X, axis=1)) == 3
    assert np.any(X.imag != 0)
    X1, _ = draw_instance(A, "model1", 3, 4, seed=1)
    assert np.all(X1.imag == 0)


def test_supports_are_uniform():
    A = np.eye(6)
    counts = np.zeros(6)
    for s in range(3000):
        _, S = draw_instance(A, "model2", 2, 1, seed=s)
        counts[list(S)] += 1
    np.testing.assert_allclose(counts / 3000, 1 / 3, atol=0.04)


def test_run_trial_zero_k_success():
    r = run_trial(dirac_fourier(8), 0, 2, "somp", 123, small_config())
    assert r.success and r.support_match and r.relative_error == 0.0


@pytest.mark.parametrize("alg", ["l21", "thresh", "somp"])
def test_run_trial_identity_always_succeeds(alg):
    cfg = small_config()
    for seed in range(5):
        r = run_trial(np.eye(10), 4, 2, alg, seed, cfg)
        assert r.success


def test_run_trial_deterministic():
    cfg = small_config()
    A = dirac_fourier(16)
    assert run_trial(A, 4, 2, "l21", 99, cfg) == run_trial(A, 4, 2, "l21", 99, cfg)


def test_run_trial_records_errors_as_failures():
    cfg = small_config()
    # rank-one matrix makes every least-squares step on two columns fail
    A = np.tile(np.array([[1.0], [0.0], [0.0]]), (1, 6))
    r = run_trial(A, 2, 1, "thresh", 3, cfg)
    assert not r.success and not r.support_match


def test_trial_success_definition():
    cfg = small_config()
    A = dirac_fourier(16)
    for seed in range(20):
        r = run_trial(A, 6, 1, "thresh", seed, cfg)
        assert r.success == (r.relative_error <= cfg.success_threshold and r.support_match)


# ----- phase curves -------------------------------------------------------------

def test_phase_curve_shape_and_csv():
    cfg = small_config()
    pc = phase_curve(cfg, keep_records=True)
    assert len(pc.records) == 3 * 2 * 3 * 6
    text = pc.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "ensemble,n,N,model,algorithm,k,L,trials,successes,rate"
    assert len(lines) == 1 + 3 * 2 * 3
    for (alg, k, L), (s, t) in pc.counts.items():
        assert t == 6 and 0 <= s <= t and 0 <= pc.rate(alg, k, L) <= 1
    back = PhaseCurve.from_csv(text)
    assert back.counts == pc.counts and back.to_csv() == text
    assert all(json.loads(l)["trial"] >= 0 for l in pc.records_jsonl().splitlines())


def test_phase_curve_deterministic_across_workers():
    cfg = small_config(trials=4)
    serial = phase_curve(cfg, workers=1, keep_records=True)
    parallel = phase_curve(cfg, workers=2, chunk_size=3, keep_records=True)
    again = phase_curve(cfg, workers=1, chunk_size=5)
    assert serial.to_csv() == parallel.to_csv() == again.to_csv()
    assert serial.records_jsonl() == parallel.records_jsonl()


def test_matrix_policy():
    fixed, redraw = small_config(redraw_matrix=False), small_config()
    A1, s1 = _matrix_for_trial(fixed, 1)
    A2, s2 = _matrix_for_trial(fixed, 2)
    assert A1 is A2 and s1 is s2
    B1, _ = _matrix_for_trial(redraw, 1)
    B2, _ = _matrix_for_trial(redraw, 2)
    assert not np.array_equal(B1.entries, B2.entries)
    df = small_config(ensemble="DiracFourier", n=8, N=None)
    assert _matrix_for_trial(df, 1)[0] is _matrix_for_trial(df, 2)[0]
    a = phase_curve(small_config(redraw_matrix=False, trials=3))
    assert a.to_csv() == phase_curve(small_config(redraw_matrix=False, trials=3)).to_csv()


def test_rates_roughly_decrease_in_k():
    cfg = ExperimentConfig(ensemble="DiracFourier", n=16, k_grid=(1, 3, 5, 7, 9), L_grid=(1, 4),
                           model="model2", trials=30, base_seed=3)
    pc = phase_curve(cfg)
    for alg in cfg.algorithms:
        for L in cfg.L_grid:
            r = pc.rates(alg, L)
            assert all(b <= a + 0.1 for a, b in zip(r, r[1:]))


def test_thresholding_below_other_algorithms_dirac_fourier():
    cfg = ExperimentConfig(ensemble="DiracFourier", n=32, k_grid=(2, 6, 10, 14), L_grid=(1, 4),
                           model="model2", trials=30, base_seed=11)
    pc = phase_curve(cfg)
    for k in cfg.k_grid:
        for L in cfg.L_grid:
            best = max(pc.rate("l21", k, L), pc.rate("somp", k, L))
            assert pc.rate("thresh", k, L) <= best + 0.1


# ----- empirical oracles ----------------------------------------------------------

def test_empirical_bernstein_extremes():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(8)
    assert empirical_bernstein_tail(a, 4, 10.0, 10**5, seed=1) == 0.0
    e = np.zeros(8)
    e[3] = -2.5
    assert empirical_bernstein_tail(e, 3, 1.0001, 10**4, seed=2) == 0.0
    with pytest.raises(ValueError):
        empirical_bernstein_tail(a, 2, 1.0, 100, seed=0)


def test_empirical_bernstein_below_bound_quick():
    rng = np.random.default_rng(4)
    a = rng.standard_normal(8)
    for L in (1, 2, 4):
        for u in (1.5, 2.0):
            for cplx in (False, True):
                f = empirical_bernstein_tail(a, L, u, 20000, seed=L, complex_model=cplx)
                p = bernstein_tail(u, L, cplx)
                assert f <= p + 3 * binomial_se(p, 20000)


def test_empirical_al():
    m, se = empirical_al(1, 10**5, seed=0)
    assert abs(m - math.sqrt(2 / math.pi)) <= 3 * se
    for L in (2, 4, 16):
        m, se = empirical_al(L, 10**5, seed=L)
        assert abs(m - a_l_constant(L)) <= 3 * se
        assert 0.797 <= m / math.sqrt(L) <= 1.0
    with pytest.raises(ValueError):
        empirical_al(3, 50, 0)


def test_l21_bound_validation_on_larger_dirac_fourier():
    # every 2-sparse support of DF64 has max ||A_S^+ a_l||_2 well below 1/4,
    # so the qualifying set is non-empty here even though it is empty for DF16
    from jointsparse.bounds import l21_failure_bound
    from jointsparse.montecarlo import validate_l21_bound

    A = dirac_fourier(64)
    trials = 150
    for L in (1, 2):
        out = validate_l21_bound(A, 2, L, 0.25, trials, seed=L)
        assert out["qualifying"] == trials
        bound = min(l21_failure_bound(128, L, 0.25).failure_probability, 1.0)
        assert out["frequency"] <= bound + 3 * binomial_se(bound, trials)
