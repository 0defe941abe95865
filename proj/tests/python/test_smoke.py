import numpy as np
import pytest

import adiaspec

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def test_lists_seven_experiments():
    names = adiaspec.list_experiments()
    assert len(names) == 7
    assert "kubo" in names


def test_filter_map_inverts_commutator():
    rng = np.random.default_rng(3)
    e = np.concatenate([[-1.0], rng.uniform(0.0, 2.0, 7)])
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    h = q @ np.diag(e) @ q.conj().T
    p, gap, _ = adiaspec.patch_projector(h, 1)
    assert gap >= 1.0
    b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    b = b + b.conj().T
    a = p @ b @ (np.eye(8) - p) + (np.eye(8) - p) @ b @ p
    ia = adiaspec.filter_map(h, a, 0.5)
    assert np.linalg.norm(a + 1j * (h @ ia - ia @ h), 2) < 1e-10


def test_two_level_kubo():
    assert adiaspec.kubo(-Z, X, X) == pytest.approx(-1.0, abs=1e-12)
    r = adiaspec.kubo_time_integral(-Z, X, X, [0.05, 0.025, 0.0125])
    assert abs(r["extrapolated"] + 1.0) < 1e-6


def test_flow_generator_two_level():
    path = adiaspec.Path("free:0.2:1.1", "linear", 1)
    k = adiaspec.flow_generator(path, 0.3)
    assert np.allclose(k, -0.45 * Y, atol=1e-12)


def test_evolution_keeps_norm():
    path = adiaspec.Path("tfim:2:1.5", "smoothstart", 3)
    _, v = np.linalg.eigh(path.hamiltonian(0.0))
    states = adiaspec.evolve_state(path, 0.1, v[:, 0], [0.0, 0.5, 1.0])
    assert states.shape == (3, 8)
    assert np.allclose(np.linalg.norm(states, axis=1), 1.0, atol=1e-10)


def test_errors_map_to_python_exceptions():
    with pytest.raises(adiaspec.ConfigError):
        adiaspec.run_experiment({"experiment": "nope"})
    path = adiaspec.Path("rotising:0.2:1.2", "linear", 4)
    with pytest.raises(adiaspec.GapError):
        adiaspec.flow_generator(path, 0.5, 1)


def test_run_experiment_small():
    r = adiaspec.run_experiment({"experiment": "product-oracle", "grids": {"L": [1, 2], "s": [0, 1]}})
    assert r["pass"]
    assert r["columns"]
    assert r["summary"]["max_difference"] <= 1e-12
