"""Fixed mesh corpus shared by the spectral, modal and acceptance tests."""

from __future__ import annotations

import numpy as np

from numerov_wave.mesh import Mesh, MeshFamilySpec, critical_mesh, extend_mesh, uniform_mesh

# integer step vectors on [0, 1] found by the exhaustive search at N0 = 6
SMALL_CRITICAL = [
    (1, 3, 5, 1, 3, 4),
    (1, 3, 6, 1, 3, 3),
    (2, 1, 5, 3, 1, 3),
    (2, 3, 3, 6, 1, 3),
]


def random_meshes(count: int = 5, seed: int = 20240517, n_max: int = 14) -> list[Mesh]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(4, n_max + 1))
        steps = tuple(int(s) for s in rng.integers(1, 7, size=n))
        if len(set(steps)) == 1:
            continue
        out.append(Mesh(steps, sum(steps)))
    return out


def corpus() -> dict[str, Mesh]:
    meshes = {"critical": critical_mesh()}
    for n in (2, 3, 5, 8, 14):
        meshes[f"uniform{n}"] = uniform_mesh(1, n)
    meshes["uniform7_X2"] = uniform_mesh(2, 7)
    for steps in SMALL_CRITICAL:
        meshes["small" + "".join(map(str, steps))] = Mesh(steps, sum(steps))
    meshes["small_family2"] = extend_mesh(MeshFamilySpec(Mesh(SMALL_CRITICAL[0], 17), 2))
    for i, m in enumerate(random_meshes()):
        meshes[f"random{i}"] = m
    return meshes
