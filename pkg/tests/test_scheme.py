import csv
import math

import numpy as np
import pytest
from corpus import corpus

from numerov_wave.mesh import critical_mesh, uniform_mesh
from numerov_wave.modal import ModalParams, amplification, modal_recursion
from numerov_wave.operators import assemble_lambda, assemble_sN, inner_product
from numerov_wave.reference import bump
from numerov_wave.scheme import (
    SchemeConfig,
    WaveState,
    compute_u1N,
    energy_history,
    first_step,
    run,
    step,
)
from numerov_wave.spectral import generalized_spectrum, uniform_lambda_max

CORPUS = corpus()


def test_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(a=0.0, tau=1e-3, M=10)
    with pytest.raises(ValueError):
        SchemeConfig(a=1.0, tau=-1e-3, M=10)
    with pytest.raises(ValueError):
        SchemeConfig(a=1.0, tau=1e-3, M=0)
    with pytest.raises(ValueError):
        SchemeConfig(a=1.0, tau=1e-3, M=10, sigma=math.inf)


def test_for_time_reaches_T_exactly():
    cfg = SchemeConfig.for_time(2.0, 0.01 / 60)
    assert cfg.M == 12000 and cfg.M * cfg.tau == pytest.approx(2.0, abs=1e-15)
    cfg = SchemeConfig.for_time(1.0, 0.3)
    assert cfg.M == 4 and cfg.tau == 0.25


def test_u1N_zero():
    mesh = critical_mesh()
    assert np.array_equal(compute_u1N(np.zeros(13), mesh, SchemeConfig(1.0, 1e-3, 1)), np.zeros(13))


def test_u1N_uniform_identity():
    mesh = uniform_mesh(1, 16)
    cfg = SchemeConfig(a=1.3, tau=0.01, M=1, sigma=1 / 6)
    u1 = np.sin(3 * mesh.interior)
    L = assemble_lambda(mesh).to_dense()
    expected = (np.eye(15) + (1 / 16**2 + cfg.tau**2 * cfg.a**2) / 12 * L) @ u1
    assert np.allclose(compute_u1N(u1, mesh, cfg), expected, atol=1e-13)


def test_u1N_linear():
    mesh = critical_mesh()
    cfg = SchemeConfig(1.0, 1e-3, 1)
    rng = np.random.default_rng(0)
    u, w = rng.standard_normal((2, 13))
    assert np.allclose(compute_u1N(2 * u - w, mesh, cfg), 2 * compute_u1N(u, mesh, cfg) - compute_u1N(w, mesh, cfg))


def test_first_step_zero():
    state = first_step(np.zeros(13), np.zeros(13), critical_mesh(), SchemeConfig(1.0, 1e-3, 1))
    assert state.m == 1 and np.array_equal(state.v_curr, np.zeros(13))


@pytest.mark.parametrize("index", [0, 1, 5, 12])
def test_first_step_on_eigenvector(index):
    mesh = critical_mesh()
    cfg = SchemeConfig(1.0, 1e-3, 1)
    pair = generalized_spectrum(mesh).pairs[index]
    c0 = 0.8 - 0.3j
    state = first_step(c0 * pair.vector, np.zeros(13, dtype=complex), mesh, cfg)
    mu = amplification(ModalParams(pair.lam, cfg.tau)).mu
    assert np.allclose(state.v_curr, c0 * mu * pair.vector, atol=1e-12)
    # real part of complex data evolves as the real part
    real_state = first_step((c0 * pair.vector).real, np.zeros(13), mesh, cfg)
    assert np.allclose(real_state.v_curr, (c0 * mu * pair.vector).real, atol=1e-12)


def test_first_step_consistency_with_velocity():
    mesh = uniform_mesh(1, 40)
    x = mesh.interior
    u0, u1 = np.sin(np.pi * x), np.sin(2 * np.pi * x)
    gaps = []
    for tau in (1e-2, 5e-3, 2.5e-3):
        cfg = SchemeConfig(1.0, tau, 1)
        v1 = first_step(u0, compute_u1N(u1, mesh, cfg), mesh, cfg).v_curr
        gaps.append(np.max(np.abs((v1 - u0) / tau - u1)))
    assert gaps[-1] < gaps[0] / 3


def test_step_zero_and_precondition():
    mesh = critical_mesh()
    cfg = SchemeConfig(1.0, 1e-3, 5)
    z = np.zeros(13)
    assert np.array_equal(step(WaveState(z, z, 3), mesh, cfg).v_curr, z)
    with pytest.raises(ValueError):
        step(WaveState(z, z, 0), mesh, cfg)


def test_time_reversal():
    mesh = critical_mesh()
    cfg = SchemeConfig(1.0, 1e-3, 50)
    res = run(bump(mesh.interior), np.zeros(13), mesh, cfg, [49e-3], record=False)
    v49, v50 = res.snapshots[49], res.snapshots[50]
    back = step(WaveState(v50, v49, 50), mesh, cfg).v_curr
    res48 = run(bump(mesh.interior), np.zeros(13), mesh, cfg, [48e-3], record=False)
    assert np.allclose(back, res48.snapshots[48], rtol=0, atol=1e-10)


def test_run_zero_data():
    mesh = critical_mesh()
    res = run(np.zeros(13), np.zeros(13), mesh, SchemeConfig(1.0, 1e-3, 200))
    assert np.all(res.final.v_curr == 0)
    assert np.all(res.history["l2h"] == 0) and np.all(res.history["dirichlet"] == 0)


def test_run_linear_in_data():
    mesh = critical_mesh()
    cfg = SchemeConfig(1.0, 1e-3, 300)
    rng = np.random.default_rng(4)
    a0, a1, b0, b1 = rng.standard_normal((4, 13))
    ra = run(a0, a1, mesh, cfg, record=False).final.v_curr
    rb = run(b0, b1, mesh, cfg, record=False).final.v_curr
    rab = run(2 * a0 - b0, 2 * a1 - b1, mesh, cfg, record=False).final.v_curr
    assert np.allclose(rab, 2 * ra - rb, atol=1e-10)


def test_run_snapshots_and_exports(tmp_path):
    mesh = uniform_mesh(1, 10)
    cfg = SchemeConfig(1.0, 0.01, 20)
    res = run(bump(mesh.interior), np.zeros(9), mesh, cfg, [0.1])
    assert sorted(res.snapshots) == [0, 10, 20]
    assert np.array_equal(res.snapshot_at(0.1), res.snapshots[10])
    assert len(res.times) == 21
    res.write_snapshots(tmp_path / "s.csv")
    res.write_history(tmp_path / "h.csv")
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert rows[0] == ["m", "t", "x", "v"] and len(rows) == 1 + 3 * 11
    hist = list(csv.reader(open(tmp_path / "h.csv")))
    assert len(hist) == 22
    with pytest.raises(ValueError):
        run(np.zeros(9), np.zeros(9), mesh, cfg, [1.0])


def test_run_saturates_instead_of_overflowing():
    mesh = uniform_mesh(1, 32)
    tau = math.sqrt(6 * 1.5 / uniform_lambda_max(1.0, 32))
    res = run(bump(mesh.interior), np.zeros(31), mesh, SchemeConfig(1.0, tau, 100_000))
    assert res.saturated
    assert res.final.m < 100_000
    assert len(res.history["l2h"]) == res.final.m


def _modal_gap(mesh, sigma, c=0.5, tau=1e-3, steps=1000):
    spec = generalized_spectrum(mesh)
    sN = assemble_sN(mesh)
    cfg = SchemeConfig(1.0, tau, steps, sigma)
    worst = 0.0
    for p in spec.pairs:
        res = run(p.vector, None, mesh, cfg, u1N=c * sN.apply(p.vector), record=False)
        y = modal_recursion(ModalParams(p.lam, tau, 1.0, sigma), 1.0, tau * c, steps)
        ref = p.vector * y.explicit[-1]
        env = np.max(np.abs(y.explicit))
        diff = res.final.v_curr - ref
        worst = max(worst, math.sqrt(np.real(inner_product(diff, diff, mesh))) / env)
    return worst


@pytest.mark.parametrize("sigma", [1 / 12, 1 / 6])
@pytest.mark.parametrize("name", sorted(CORPUS))
def test_modal_equivalence_corpus(name, sigma):
    assert _modal_gap(CORPUS[name], sigma) <= 1e-6


def _uniform_cfl_run(N, eps0_sq, steps=10_000, seed=0):
    mesh = uniform_mesh(1, N)
    h = 1.0 / N
    tau = h * math.sqrt(1 - eps0_sq)
    rng = np.random.default_rng(seed)
    x = mesh.interior
    # random smooth data: a few low sine modes
    k = np.arange(1, 6)
    v0 = np.sin(np.pi * np.outer(x, k)) @ rng.standard_normal(5)
    u1 = np.sin(np.pi * np.outer(x, k)) @ rng.standard_normal(5)
    return run(v0, u1, mesh, SchemeConfig(1.0, tau, steps))


@pytest.mark.parametrize("N", [32, 64])
def test_energy_bounds_under_cfl(N):
    eps0_sq = 0.19
    res = _uniform_cfl_run(N, eps0_sq)
    hist = energy_history(res, math.sqrt(eps0_sq))
    assert hist.strong_holds and hist.weak_holds
    assert np.all(res.history["l2h"] <= hist.weak_rhs / math.sqrt(eps0_sq) * math.sqrt(1.5))


def test_energy_history_zero_data():
    mesh = uniform_mesh(1, 16)
    res = run(np.zeros(15), np.zeros(15), mesh, SchemeConfig(1.0, 0.01, 50))
    hist = energy_history(res, 0.5)
    assert hist.strong_rhs == 0 and hist.weak_rhs == 0
    assert np.all(np.nan_to_num(hist.strong_lhs) == 0) and np.all(np.nan_to_num(hist.weak_lhs) == 0)


def test_energy_history_needs_record():
    mesh = uniform_mesh(1, 8)
    res = run(np.ones(7), np.zeros(7), mesh, SchemeConfig(1.0, 0.01, 5), record=False)
    with pytest.raises(ValueError):
        energy_history(res, 0.5)


def test_energy_sN_terms_unavailable_on_critical_mesh():
    mesh = critical_mesh()
    res = run(bump(mesh.interior), np.zeros(13), mesh, SchemeConfig(1.0, 1e-3, 20))
    hist = energy_history(res, 0.5)
    assert np.all(np.isnan(hist.weak_lhs))
    assert np.all(np.isfinite(hist.dirichlet_avg_sq[:-1]))
