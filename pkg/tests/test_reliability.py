from math import comb, isclose, sqrt

import numpy as np
import pytest

from ftmm.schemes import FailurePattern, build_scheme, is_decodable
from ftmm.reliability import (
    CURVE_CSV_HEADER,
    FC_CSV_HEADER,
    ReliabilityProfile,
    census_profile,
    curve,
    curve_csv_rows,
    default_grid,
    failure_pattern_stream,
    fc_csv_rows,
    fc_replication_closed_form,
    grid_points,
    p_fail_monte_carlo,
    p_fail_theoretical,
    profile_for,
    replication_profile,
)


# --- closed form ------------------------------------------------------------

def test_closed_form_single_copy_is_binomial():
    # with one copy any failure is fatal, so FC(k) = C(7, k)
    for k in range(8):
        want = comb(7, k) if k >= 1 else 0
        assert fc_replication_closed_form(1, k) == want


@pytest.mark.parametrize("k,want", [(0, 0), (1, 0), (2, 7), (3, 84), (14, 1)])
def test_closed_form_two_copy_spots(k, want):
    assert fc_replication_closed_form(2, k) == want


def test_closed_form_three_copy_floor():
    assert fc_replication_closed_form(3, 2) == 0
    assert fc_replication_closed_form(3, 3) == 7
    assert fc_replication_closed_form(3, 21) == 1


def test_closed_form_validation():
    with pytest.raises(ValueError):
        fc_replication_closed_form(0, 1)
    with pytest.raises(ValueError):
        fc_replication_closed_form(2, 15)
    with pytest.raises(ValueError):
        fc_replication_closed_form(2, -1)


# --- profiles ---------------------------------------------------------------

def test_profile_sources():
    assert profile_for(build_scheme("strassen_2copy")).source == "closed_form"
    assert profile_for(build_scheme("hybrid_sw")).source == "exhaustive"
    prof = replication_profile("strassen", 2)
    assert prof.scheme_id == "strassen_2copy" and prof.M == 14
    with pytest.raises(ValueError):
        ReliabilityProfile("x", 7, (0,) * 5, "exhaustive")


def test_profile_closed_form_equals_census_two_copy():
    scheme = build_scheme("strassen_2copy")
    assert replication_profile("strassen", 2).fc == census_profile(scheme).fc


# --- theory evaluation ------------------------------------------------------

def test_theory_endpoints():
    for kind in ("strassen_1copy", "hybrid_sw", "hybrid_sw_2psmm"):
        prof = profile_for(build_scheme(kind))
        assert p_fail_theoretical(prof, 0.0) == 0.0
        assert isclose(p_fail_theoretical(prof, 1.0), 1.0, abs_tol=0)


def test_theory_single_copy_binomial_identity():
    """Sum over FC(k)=C(7,k) telescopes to 1 - (1-p)^7."""
    prof = profile_for(build_scheme("strassen_1copy"))
    for p in np.linspace(0.001, 0.999, 37):
        want = 1.0 - (1.0 - p) ** 7
        assert abs(p_fail_theoretical(prof, float(p)) - want) < 1e-12


def test_theory_matches_direct_pattern_sum():
    # independent recount: exact probability mass of undecodable patterns
    scheme = build_scheme("strassen_1copy")
    p = 0.17
    want = 0.0
    for mask in range(1 << scheme.M):
        pat = FailurePattern.from_mask(mask)
        if not is_decodable(scheme, pat):
            k = pat.size()
            want += p ** k * (1 - p) ** (scheme.M - k)
    got = p_fail_theoretical(profile_for(scheme), p)
    assert abs(got - want) < 1e-12


def test_theory_validates_pe():
    prof = profile_for(build_scheme("strassen_1copy"))
    with pytest.raises(ValueError):
        p_fail_theoretical(prof, -0.1)
    with pytest.raises(ValueError):
        p_fail_theoretical(prof, 1.5)


# --- Monte Carlo ------------------------------------------------------------

def test_stream_deterministic_and_chunk_stable(hybrid):
    a = np.concatenate(list(failure_pattern_stream(hybrid, 0.3, 6000, seed=9)))
    b = np.concatenate(list(failure_pattern_stream(hybrid, 0.3, 9000, seed=9)))
    assert a.shape == (6000, hybrid.M)
    assert (a == b[:6000]).all()
    c = np.concatenate(list(failure_pattern_stream(hybrid, 0.3, 6000, seed=10)))
    assert (a != c).any()


def test_stream_keyed_by_scheme_and_pe(hybrid, psmm2):
    a = next(failure_pattern_stream(hybrid, 0.3, 100, seed=0))
    b = next(failure_pattern_stream(psmm2, 0.3, 100, seed=0))
    assert (a != b[:, :hybrid.M]).any()
    d = next(failure_pattern_stream(hybrid, 0.31, 100, seed=0))
    assert (a != d).any()


def test_stream_validation(hybrid):
    with pytest.raises(ValueError):
        next(failure_pattern_stream(hybrid, 0.1, 10, seed=-1))
    with pytest.raises(ValueError):
        next(failure_pattern_stream(hybrid, 0.1, 0, seed=0))


def test_mc_deterministic(psmm2):
    a = p_fail_monte_carlo(psmm2, 0.2, 5000, seed=3)
    b = p_fail_monte_carlo(psmm2, 0.2, 5000, seed=3)
    assert a == b
    assert 0.0 <= a[0] <= 1.0 and a[1] >= 0.0


def test_mc_agrees_with_theory(hybrid):
    trials = 20_000
    est, err = p_fail_monte_carlo(hybrid, 0.3, trials, seed=1)
    th = p_fail_theoretical(profile_for(hybrid), 0.3)
    sigma = max(err, sqrt(th * (1 - th) / trials))
    assert abs(est - th) <= 4 * sigma


def test_mc_extremes(hybrid):
    assert p_fail_monte_carlo(hybrid, 0.0, 1000, seed=0) == (0.0, 0.0)
    assert p_fail_monte_carlo(hybrid, 1.0, 1000, seed=0)[0] == 1.0


# --- curves -----------------------------------------------------------------

def test_default_grid_shape():
    g = default_grid()
    assert len(g) == 21
    assert isclose(g[0], 1e-3) and isclose(g[-1], 0.5)
    assert (np.diff(g) > 0).all()


def test_grid_points_validation():
    with pytest.raises(ValueError):
        grid_points(0.5, 0.1, 5)
    with pytest.raises(ValueError):
        grid_points(0.0, 0.1, 5)
    with pytest.raises(ValueError):
        grid_points(0.1, 0.2, 0)


def test_curve_rows_and_monotonicity():
    schemes = [build_scheme("strassen_1copy"), build_scheme("hybrid_sw")]
    out = curve(schemes, grid=[0.01, 0.1, 0.3], trials=2000, seed=2)
    assert [c.scheme_id for c in out] == ["strassen_1copy", "hybrid_sw"]
    for c in out:
        assert len(c.rows) == 3
        theory = [r.p_f_theory for r in c.rows]
        assert theory == sorted(theory)        # more noise, more failures
        for r in c.rows:
            assert r.trials == 2000 and r.seed == 2


def test_csv_exports():
    assert CURVE_CSV_HEADER == ("scheme", "M", "p_e", "p_f_theory",
                                "p_f_mc", "stderr", "trials", "seed")
    assert FC_CSV_HEADER == ("scheme", "k", "fc", "binom_M_k")
    out = curve([build_scheme("strassen_1copy")], grid=[0.1], trials=100, seed=0)
    rows = curve_csv_rows(out)
    assert rows[0] == CURVE_CSV_HEADER
    assert rows[1][0] == "strassen_1copy" and rows[1][1] == "7"
    assert rows[1][3] == "0.5217031"           # 1 - 0.9^7, %.12g format
    fc_rows = fc_csv_rows(replication_profile("strassen", 2))
    assert fc_rows[0] == FC_CSV_HEADER
    assert fc_rows[3] == ("strassen_2copy", "2", "7", "91")
