import csv
import math

import numpy as np
import pytest
from corpus import corpus

from numerov_wave._qr import francis_eigenvalues, hessenberg
from numerov_wave.errors import ConvergenceError
from numerov_wave.mesh import Mesh, MeshFamilySpec, critical_mesh, extend_mesh, uniform_mesh
from numerov_wave.spectral import (
    Classification,
    charpoly_roots_oracle,
    classify,
    generalized_eigenvalues,
    generalized_spectrum,
    match_spectra,
    pencil_residual,
    uniform_lambda_max,
    verify_scaling,
)
from numerov_wave.operators import inner_product

CORPUS = corpus()


def test_critical_spectrum():
    spec = generalized_spectrum(critical_mesh())
    assert len(spec.pairs) == 13
    top, partner = spec.pairs[0].lam, spec.pairs[1].lam
    assert top.real == pytest.approx(3529.9, abs=0.05)
    assert top.imag == pytest.approx(27.2044, abs=5e-4)
    assert partner == top.conjugate()
    assert all(p.lam.imag == 0 and p.lam.real > 0 for p in spec.pairs[2:])
    assert spec.classification is Classification.COMPLEX_PRESENT
    assert [p.lam for p in spec.dominant] == [top, partner]


@pytest.mark.parametrize("N", [4, 8, 16, 32, 64])
def test_uniform_lambda_max_closed_form(N):
    ev = generalized_eigenvalues(uniform_mesh(1, N))
    lam_max = float(max(ev.real))
    assert lam_max == pytest.approx(uniform_lambda_max(1.0, N), rel=1e-12)
    assert lam_max < 6 * N**2


def test_uniform_two_intervals():
    assert generalized_eigenvalues(uniform_mesh(1, 2))[0] == pytest.approx(9.6)
    spec = generalized_spectrum(uniform_mesh(1, 2))
    assert spec.pairs[0].lam == pytest.approx(9.6)
    assert spec.pairs[0].vector[0] == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("N", range(2, 65))
def test_uniform_meshes_all_real(N):
    assert classify(generalized_eigenvalues(uniform_mesh(1, N))) is Classification.ALL_REAL


def test_two_interval_meshes_all_real():
    for steps in [(1, 2), (1, 5), (3, 7)]:
        assert classify(generalized_eigenvalues(Mesh(steps, sum(steps)))) is Classification.ALL_REAL


def test_lowest_eigenvalue_near_pi_squared():
    ev = generalized_eigenvalues(uniform_mesh(1, 64))
    assert min(ev.real) == pytest.approx(math.pi**2, rel=1e-6)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_corpus_invariants(name):
    mesh = CORPUS[name]
    spec = generalized_spectrum(mesh)
    ev = spec.eigenvalues
    assert len(ev) == mesh.N - 1
    # conjugate symmetry as a multiset
    assert match_spectra(ev, np.conj(ev)) <= 1e-9
    for p in spec.pairs:
        assert p.relative_residual <= 1e-8
        assert math.sqrt(np.real(inner_product(p.vector, p.vector, mesh))) == pytest.approx(1.0)
        k = int(np.argmax(np.abs(p.vector)))
        assert p.vector[k].real > 0 and p.vector[k].imag == 0


@pytest.mark.parametrize("name", sorted(n for n, m in CORPUS.items() if m.N <= 14))
def test_oracle_matches(name):
    mesh = CORPUS[name]
    assert match_spectra(generalized_eigenvalues(mesh), charpoly_roots_oracle(mesh)) <= 1e-6


def test_oracle_small_cases():
    assert charpoly_roots_oracle(uniform_mesh(1, 2))[0] == pytest.approx(9.6)
    roots = charpoly_roots_oracle(uniform_mesh(1, 4))
    assert np.all(roots.imag == 0) and np.all(roots.real > 0)


def test_oracle_rejects_large_meshes():
    with pytest.raises(ValueError):
        charpoly_roots_oracle(uniform_mesh(1, 17))


def test_classify_threshold():
    assert classify(np.array([100 + 1e-7j])) is Classification.ALL_REAL
    assert classify(np.array([100 + 1e-5j])) is Classification.COMPLEX_PRESENT
    assert classify(np.array([100 + 1e-5j]), tol_imag=1e-6) is Classification.ALL_REAL


def test_scaling_identity():
    rep = verify_scaling(critical_mesh(), 1)
    assert rep.eigenvalue_defect == 0.0


def test_scaling_critical_two():
    base = critical_mesh()
    rep = verify_scaling(base, 2)
    assert rep.eigenvalue_defect <= 1e-8 and rep.eigenvector_residual <= 1e-8
    ev = generalized_eigenvalues(extend_mesh(MeshFamilySpec(base, 2)))
    assert np.min(np.abs(ev - 4 * generalized_eigenvalues(base)[0])) <= 1e-8 * abs(ev[0])


def test_scaling_uniform_base():
    ev = generalized_eigenvalues(extend_mesh(MeshFamilySpec(uniform_mesh(1, 2), 5)))
    assert np.min(np.abs(ev - 240.0)) <= 1e-9 * 240


def test_pencil_residual_detects_wrong_pair():
    spec = generalized_spectrum(critical_mesh())
    p = spec.pairs[3]
    assert pencil_residual(critical_mesh(), p.lam * 1.01, p.vector) > 1e-3 * abs(p.lam)


def test_spectrum_csv_and_summary(tmp_path):
    spec = generalized_spectrum(critical_mesh())
    path = tmp_path / "s.csv"
    spec.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["index", "re", "im", "residual"]
    assert len(rows) == 14
    assert complex(float(rows[1][1]), float(rows[1][2])) == spec.pairs[0].lam
    s = spec.summary()
    assert s.startswith("COMPLEX_PRESENT") and "3529.9 ± 27.2044i" in s


@pytest.mark.parametrize("seed", range(6))
def test_francis_matches_reference_eigenvalues(seed):
    rng = np.random.default_rng(seed)
    n = 5 + 5 * seed
    A = rng.standard_normal((n, n))
    H = hessenberg(A)
    assert np.allclose(np.tril(H, -2), 0)
    ours = francis_eigenvalues(H)
    assert match_spectra(ours, np.linalg.eigvals(A)) <= 1e-10


def test_francis_budget_exhaustion():
    rng = np.random.default_rng(0)
    H = hessenberg(rng.standard_normal((12, 12)))
    with pytest.raises(ConvergenceError):
        francis_eigenvalues(H, max_sweeps=1)
