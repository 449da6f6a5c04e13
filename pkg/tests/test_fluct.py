import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symgue.core import DomainError, EnsembleSpec, SampleSizeError, SymmetryClass
from symgue.fluct import (C_case3, CoincidentPointError, S_goe, S_gue, covariance_from_series,
                          ks_distance, mc_covariance, mc_mean, mc_run, theory_correlator,
                          tr_g2_limit, variance_slope)
from symgue.laws import semicircle_cdf, semicircle_stieltjes


def f_sc_imag_axis(y):
    # independent closed form of the semicircle transform at z = iy
    return 0.5j * (np.sqrt(y * y + 4) - y)


def s_goe_oracle(y1, y2):
    f1, f2 = f_sc_imag_axis(y1), f_sc_imag_axis(y2)
    slope = (f1 - f2) / (1j * (y1 - y2))
    return 2 / ((1 - f1 ** 2) * (1 - f2 ** 2)) * slope ** 2


def test_correlator_values():
    assert S_goe(2j, 3j) == pytest.approx(0.019419, abs=5e-7)
    assert S_goe(2j, 3j) == pytest.approx(s_goe_oracle(2, 3), abs=1e-14)
    assert S_gue(2j, 3j) == pytest.approx(0.0097095, abs=5e-7)
    assert S_goe(2j, 2j) == pytest.approx(0.03125, abs=1e-12)
    assert C_case3(1j, 2j) == pytest.approx(0.4285065, abs=5e-7)
    assert C_case3(2j, 3j) == pytest.approx(0.324114, abs=5e-7)


def test_confluent_limit_is_continuous():
    assert abs(S_goe(2j, 2j + 1e-5) - S_goe(2j, 2j)) < 1e-6


def test_case3_correlator_rejects_coincident_points():
    with pytest.raises(CoincidentPointError):
        C_case3(1j, 1j)
    with pytest.raises(DomainError):
        S_goe(1.0, 2j)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 5), st.floats(-3, 3), st.floats(0.2, 5))
def test_correlator_symmetry(x1, y1, x2, y2):
    z1, z2 = complex(x1, y1), complex(x2, y2)
    assert abs(S_goe(z1, z2) - S_goe(z2, z1)) <= 1e-12 * max(1, abs(S_goe(z1, z2)))
    assert abs(S_goe(z1.conjugate(), z2.conjugate()) - np.conj(S_goe(z1, z2))) <= 1e-12 * max(
        1, abs(S_goe(z1, z2)))


def test_tr_g2_limit_is_derivative():
    z, h = 0.5 + 1.5j, 1e-6
    numeric = (semicircle_stieltjes(z + h) - semicircle_stieltjes(z - h)) / (2 * h)
    assert abs(tr_g2_limit("semicircle", z) - numeric) < 1e-8
    assert tr_g2_limit("semicircle", z, as_printed=True) != pytest.approx(numeric)
    with pytest.raises(ValueError):
        tr_g2_limit("mp", z)


def test_theory_mapping():
    assert theory_correlator("Flip1", 2j, 3j)[1:] == ("derived-closed-form", True)
    assert theory_correlator("Quarter4", 2j, 3j)[0] == S_gue(2j, 3j)
    assert theory_correlator("RowMirror3", 2j, 3j)[1:] == ("paper-printed", False)


def test_ks_distance_examples():
    assert ks_distance([0.0], lambda x: np.clip((x + 1) / 2, 0, 1)) == pytest.approx(0.5)
    x = np.sort(np.random.default_rng(0).uniform(-2, 2, 10))
    ours = ks_distance(x, lambda t: (t + 2) / 4)
    i = np.arange(1, 11)
    f = (x + 2) / 4
    assert ours == pytest.approx(max(np.max(i / 10 - f), np.max(f - (i - 1) / 10)))
    with pytest.raises(DomainError):
        ks_distance([1.0, 0.0], semicircle_cdf)


def test_ks_distance_with_atom():
    # half the sample at an atom of mass 1/2, the rest spread uniformly
    cdf = lambda t: np.where(t >= 0, 0.5, 0.0) + 0.5 * np.clip(t, 0, 1)
    x = np.sort(np.concatenate([np.zeros(500), (np.arange(500) + 0.5) / 500]))
    assert ks_distance(x, cdf, atoms=[(0.0, 0.5)]) <= 1e-3


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10), st.lists(st.integers(1, 8), min_size=3, max_size=6, unique=True))
def test_variance_slope_planted(c, exps):
    sizes = [2 ** e for e in exps]
    assert variance_slope(sizes, [c / s ** 2 for s in sizes]) == pytest.approx(-2, abs=1e-9)


def test_variance_slope_errors():
    with pytest.raises(SampleSizeError):
        variance_slope([2, 4], [1, 1])
    with pytest.raises(DomainError):
        variance_slope([2, 4, 8], [1, 0, 1])


def test_covariance_jackknife_matches_brute_force():
    g = np.random.default_rng(1)
    x = g.normal(size=40) + 1j * g.normal(size=40)
    y = 0.5 * x + g.normal(size=40)
    est = covariance_from_series(x, y)
    cov = lambda a, b: np.mean(a * b) - a.mean() * b.mean()
    loo = np.array([cov(np.delete(x, i), np.delete(y, i)) for i in range(40)])
    se = np.sqrt(39 / 40 * np.sum(np.abs(loo - loo.mean()) ** 2))
    assert est.value == pytest.approx(cov(x, y), abs=1e-14)
    assert est.stderr == pytest.approx(se, rel=1e-10)
    with pytest.raises(SampleSizeError):
        covariance_from_series(x[:10], y[:10])


def test_mc_run_independent_of_threads():
    spec = EnsembleSpec("Flip1", 8, 3)
    a = mc_run(spec, [2j], 20, extras=("atoms", "max_abs"), threads=1)
    b = mc_run(spec, [2j], 20, extras=("atoms", "max_abs"), threads=4)
    assert [r.g_values for r in a] == [r.g_values for r in b]
    assert [r.extras for r in a] == [r.extras for r in b]


def test_mc_run_validation():
    spec = EnsembleSpec("Plain", 4, 1)
    with pytest.raises(DomainError):
        mc_run(spec, [1.0], 5)
    with pytest.raises(SampleSizeError):
        mc_run(spec, [1j], 1)
    with pytest.raises(ValueError):
        mc_run(spec, [1j], 5, extras=("bogus",))


def test_mc_mean_tracks_semicircle():
    recs = mc_run(EnsembleSpec("Plain", 64, 2), [2j], 40)
    est = mc_mean(recs, 2j)
    assert abs(est.value - semicircle_stieltjes(2j)) < 0.01
    assert 0 < est.stderr.imag < 0.01
    cov = mc_covariance(recs, 2j, 2j)
    assert cov.replicates == 40


@pytest.mark.parametrize("symmetry", ["Plain", "Flip1"])
def test_small_scale_correlator(symmetry):
    # 2n = 32, 3000 replicates: (2n)^2 F within 25% of the limit
    recs = mc_run(EnsembleSpec(symmetry, 16, 7), [2j, 3j], 3000)
    cov = mc_covariance(recs, 2j, 3j)
    theory = theory_correlator(symmetry, 2j, 3j)[0]
    assert abs(32 ** 2 * cov.value - theory) < 0.25 * abs(theory)


def test_quarter4_follows_block_decomposition():
    from symgue.lab.experiments import quarter4_block_correlator
    assert quarter4_block_correlator(2j, 3j) == pytest.approx(0.0130513, abs=1e-6)
    recs = mc_run(EnsembleSpec("Quarter4", 32, 7), [2j, 3j], 10000)
    cov = mc_covariance(recs, 2j, 3j)
    est = 64 ** 2 * cov.value
    assert abs(est - quarter4_block_correlator(2j, 3j)) < 4 * 64 ** 2 * cov.stderr
    assert abs(est - S_gue(2j, 3j)) > 4 * 64 ** 2 * cov.stderr
