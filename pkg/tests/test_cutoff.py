import numpy as np
import pytest

from kimuralab.cutoff import build_cutoff_sequence, build_partition, cutoff_growth, step
from kimuralab.geometry import SpatialPoint


@pytest.fixture
def seq():
    return build_cutoff_sequence(SpatialPoint((1.0,), (0.0,)), r=0.2, T0=0.4, T=1.0, N_max=4)


def test_step_limits():
    s = np.linspace(-1, 2, 301)
    v = step(s)
    assert np.all(v[s <= 0] == 0) and np.all(v[s >= 1] == 1)
    assert np.all(np.diff(v) >= 0)
    assert step(0.5) == pytest.approx(0.5)


def test_plateau_and_support(seq, rng):
    c = seq.center
    for N in range(4):
        assert seq.evaluate(N, seq.T, c) == pytest.approx(1.0, abs=1e-12)
        d = rng.normal(size=(500, 2))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        inside = c + d * rng.uniform(0, seq.radius(N), size=(500, 1))
        outside = c + d * rng.uniform(seq.radius(N + 1), 3, size=(500, 1))
        np.testing.assert_allclose(seq.evaluate(N, seq.T, inside), 1.0, atol=1e-12)
        np.testing.assert_allclose(seq.evaluate(N, seq.T, outside), 0.0, atol=1e-12)
        assert seq.evaluate(N, seq.time(N + 1) - 1e-3, c) == 0.0
        assert seq.evaluate(N, seq.time(N), c) == pytest.approx(1.0, abs=1e-12)


def test_nested(seq):
    X = np.stack(np.meshgrid(np.linspace(0.4, 1.6, 41), np.linspace(-0.6, 0.6, 41), indexing="ij"), -1)
    for N in range(3):
        # phi_{N+1} = 1 on the support of phi_N
        big = seq.evaluate(N + 1, 0.8, X)
        small = seq.evaluate(N, 0.8, X)
        assert np.all(big[small > 0] == pytest.approx(1.0, abs=1e-12))


def test_invalid_sequence():
    with pytest.raises(ValueError):
        build_cutoff_sequence(SpatialPoint((1.0,)), r=0.0, T0=0.4, T=1.0)
    with pytest.raises(ValueError):
        build_cutoff_sequence(SpatialPoint((1.0,)), r=0.1, T0=1.0, T=1.0)


def test_growth_fit():
    seq = build_cutoff_sequence(SpatialPoint((3.0,)), r=0.05, T0=0.5, T=1.0, N_max=6)
    rep = cutoff_growth(seq)
    assert rep["rho"] == 8.0
    assert rep["residual"] <= 0.10


@pytest.mark.parametrize("n,m", [(1, 0), (1, 1), (2, 0)])
def test_partition_of_unity(n, m, rng):
    P = build_partition(0.15, n, m, x_max=2.0, y_max=1.0)
    X = np.concatenate([rng.uniform(0, 2, size=(1000, n)), rng.uniform(-1, 1, size=(1000, m))], axis=1)
    phi = P.phi_matrix(X)
    np.testing.assert_allclose(phi.sum(axis=-1), 1.0, atol=1e-12)
    psi = P.psi_matrix(X)
    np.testing.assert_allclose(psi * phi, phi, atol=1e-12)
    assert P.overlap(X) <= P.overlap_bound
    for N, mb in enumerate(P.members[1:], start=1):
        far = np.linalg.norm(X - mb.center, axis=1) > P.r
        assert np.all(phi[far, N] == 0.0)
        assert all(mb.center[i - 1] <= 0.75 for i in mb.region)
    assert np.all(phi[X[:, :n].min(axis=1) < 1.0, 0] == 0.0)


def test_partition_radius_limit():
    with pytest.raises(ValueError):
        build_partition(0.25, 1, 0)
