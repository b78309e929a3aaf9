import csv
import math

import numpy as np
import pytest

from numerov_wave.analysis import (
    ErrorTable,
    MeshSearch,
    brute_force_search,
    check_cfl_uniform,
    check_family_condition,
    error_table,
    family_run,
    growth_curve,
    kappa_pr_experiment,
    nodal_error,
    practical_rate,
)
from numerov_wave.errors import MeshError
from numerov_wave.mesh import CRITICAL_STEPS, critical_mesh, uniform_mesh
from numerov_wave.modal import kappa0
from numerov_wave.scheme import SchemeConfig, run
from numerov_wave.spectral import Classification, generalized_spectrum


def test_practical_rate_known_values():
    assert practical_rate(39.9225, 609643, 4, 6) == pytest.approx(4.817, abs=5e-4)


def test_practical_rate_equal_errors():
    assert practical_rate(3.0, 3.0, 1, 2) == 0.0


@pytest.mark.parametrize("args", [(0.0, 1.0, 1, 2), (1.0, -1.0, 1, 2), (1.0, 2.0, 2, 2)])
def test_practical_rate_rejects(args):
    with pytest.raises(ValueError):
        practical_rate(*args)


def test_error_table_first_cell():
    table = error_table(critical_mesh(), [20], 0.01, [2.0])
    row = table.get(20, 2.0)
    assert row.M * row.tau == pytest.approx(2.0, abs=1e-14)
    assert row.M == 4000
    assert row.error == pytest.approx(1.443e-4, rel=2e-3)


def test_error_table_csv(tmp_path):
    table = ErrorTable()
    table.rows.extend(family_run(critical_mesh(), 2, [0.5, 1.0], tau=0.005))
    path = tmp_path / "t.csv"
    table.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["K", "T", "tau", "M", "error"]
    assert len(rows) == 3
    with pytest.raises(KeyError):
        table.get(3, 1.0)


def test_uniform_base_converges():
    table = error_table(uniform_mesh(1, 10), [1, 2, 4, 8], 0.05, [1.0])
    errs = [table.get(K, 1.0).error for K in (1, 2, 4, 8)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3


def test_error_table_workers_match_serial():
    kwargs = dict(Ks=[2, 4], tau_of_K=0.01, Ts=[0.5])
    serial = error_table(critical_mesh(), **kwargs)
    parallel = error_table(critical_mesh(), workers=2, **kwargs)
    assert [r.error for r in serial.rows] == [r.error for r in parallel.rows]


def test_family_run_argument_checks():
    with pytest.raises(ValueError):
        family_run(critical_mesh(), 2, [1.0])
    with pytest.raises(ValueError):
        family_run(critical_mesh(), 2, [1.0], tau=0.01, M=100)
    with pytest.raises(ValueError):
        family_run(critical_mesh(), 2, [0.35, 1.0], M=10)


def test_saturated_run_reports_inf():
    rows = family_run(uniform_mesh(1, 10), 1, [200.0], tau=0.2)
    assert rows[0].error == math.inf


def test_nodal_error_includes_boundaries():
    mesh = uniform_mesh(1, 4)
    exact = lambda x, t: x * (1 - x) + (x == 1.0) * 0.5  # noqa: E731
    v = mesh.interior * (1 - mesh.interior)
    assert nodal_error(v, mesh, exact, 0.0) == pytest.approx(0.5)


@pytest.mark.slow
@pytest.mark.parametrize("mode", ["fixed-M", "fixed-tau"])
def test_kappa_pr_modes(mode):
    rep = kappa_pr_experiment(critical_mesh(), K=20, M=14400, mode=mode)
    assert rep.kappa0 == pytest.approx(4.579, abs=1e-3)
    assert 4.3 <= rep.kappa_pr <= 5.3
    if mode == "fixed-tau":
        assert rep.rows[0].tau == rep.rows[1].tau
    else:
        assert rep.rows[0].M == rep.rows[1].M == 14400


def test_kappa_pr_unknown_mode():
    with pytest.raises(ValueError):
        kappa_pr_experiment(critical_mesh(), K=2, M=10, mode="fixed-h")


def test_cfl_zero_margin():
    rep = check_cfl_uniform(uniform_mesh(1, 100), 1.0, 0.009, math.sqrt(0.19))
    assert rep.passed
    assert abs(rep.ratio_margin) <= 1e-12
    assert rep.eig_passed and rep.eig_margin > 0


def test_cfl_courant_one_fails():
    for eps0 in (1e-3, 0.5, 0.99):
        assert not check_cfl_uniform(uniform_mesh(1, 50), 1.0, 0.02, eps0).passed


def test_cfl_forms_agree_in_the_limit():
    gaps = []
    for N in (10, 100, 1000):
        rep = check_cfl_uniform(uniform_mesh(1, N), 1.0, 0.9 / N, 0.3)
        gaps.append(abs(rep.ratio_margin - rep.eig_margin))
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-4


def test_cfl_rejections():
    with pytest.raises(MeshError):
        check_cfl_uniform(critical_mesh(), 1.0, 1e-3, 0.5)
    with pytest.raises(ValueError):
        check_cfl_uniform(uniform_mesh(1, 10), 1.0, 1e-3, 1.0)


def test_family_condition_boundary():
    base = critical_mesh()
    spec = generalized_spectrum(base)
    k = kappa0(spec.pairs[0].lam * 400)
    lam_i = abs(spec.pairs[0].lam.imag)
    tau_star = 4.5 * k * (1 / 280) ** 2 / (lam_i * (1 / 14) ** 2)
    rep = check_family_condition(base, 20, tau_star, k, base_spectrum=spec)
    assert rep.tau_bound == pytest.approx(tau_star, rel=1e-12)
    assert abs(rep.margin) <= 1e-12 * rep.rhs
    assert check_family_condition(base, 20, 0.99 * tau_star, k, base_spectrum=spec).passed
    assert not check_family_condition(base, 20, 1.01 * tau_star, k, base_spectrum=spec).passed
    assert rep.tau_bound_over_hmin_sq == pytest.approx(tau_star / (1 / (51 * 20)) ** 2)


def test_family_condition_vacuous_on_uniform():
    assert check_family_condition(uniform_mesh(1, 6), 10, 1e-3, 0.0).vacuous


def test_family_condition_quadruples_with_K():
    base = critical_mesh()
    spec = generalized_spectrum(base)
    a = check_family_condition(base, 10, 1e-4, 1.0, base_spectrum=spec)
    b = check_family_condition(base, 20, 1e-4, 1.0, base_spectrum=spec)
    assert b.lhs == pytest.approx(4 * a.lhs)


def test_search_finds_injected_critical_mesh():
    search = MeshSearch([2], include=[CRITICAL_STEPS])
    hits = list(search)
    assert search.complete
    assert [h.steps for h in hits] == [CRITICAL_STEPS]
    h = hits[0]
    assert h.classification is Classification.COMPLEX_PRESENT
    assert h.verified and h.oracle_defect <= 1e-6
    assert h.max_residual <= 1e-8
    assert h.kappa0 == pytest.approx(0.2289, abs=1e-4)


def test_search_deduplicates_mirror_images():
    search = MeshSearch([2], include=[tuple(reversed(CRITICAL_STEPS)), CRITICAL_STEPS])
    assert len(list(search)) == 1


def test_search_small_sizes_all_real():
    search = brute_force_search(range(2, 5), alphabet=range(1, 7), budget=None)
    assert list(search) == []
    assert search.complete
    # gcd-1 vectors (Moebius count) plus palindromes, halved for mirror pairs
    assert search.visited == (23 + 1) // 2 + (181 + 23) // 2 + (1199 + 23) // 2


def test_search_uniform_candidates_are_real():
    search = MeshSearch([6], alphabet=[1], budget=None)
    assert list(search) == [] and search.visited == 1


def test_search_budget_flags_incomplete(tmp_path):
    search = MeshSearch(range(2, 8), budget=50)
    list(search)
    assert search.visited == 50 and not search.complete
    search.to_csv(tmp_path / "s.csv")
    assert open(tmp_path / "s.csv").readline().strip() == "steps,denominator,re_lambda,im_lambda,kappa0"


def test_search_hit_at_six_intervals():
    hits = []
    search = MeshSearch([6], budget=None)
    for rep in search:
        hits.append(rep)
        if len(hits) == 3:
            break
    for rep in hits:
        assert rep.verified and rep.max_residual <= 1e-8
        assert abs(rep.dominant.imag) > 0


def test_search_rejects_bad_ranges():
    with pytest.raises(ValueError):
        MeshSearch([15])
    with pytest.raises(ValueError):
        MeshSearch([4], alphabet=[0, 1])


def test_growth_curve():
    mesh = uniform_mesh(1, 8)
    res = run(np.ones(7), np.zeros(7), mesh, SchemeConfig(1.0, 0.01, 10))
    curve = growth_curve(res, every=5)
    assert [t for t, _ in curve] == pytest.approx([0.0, 0.05, 0.1])
    assert curve[0][1] == pytest.approx(math.sqrt(7 / 8))
