import numpy as np
import pytest

from fptlevy import (
    Exponential,
    FdConfig,
    LsbmSpec,
    McConfig,
    ResolutionError,
    VarianceGamma,
    fd_first_passage,
    mc_first_passage,
)
from fptlevy.ioutil import read_csv_columns
from fptlevy.oracles import transition_row, write_fd_csv, write_mc_csv


def _centered_grid(n, X):
    dx = 2 * X / n
    return (np.arange(n) - n // 2) * dx


def test_transition_row_normalized(set1):
    row = transition_row(set1, 0.1, _centered_grid(1000, 10.0))
    assert float(row.sum()) == 1.0
    assert np.all(row >= 0)


def test_transition_row_symmetric_without_drift():
    lsbm = LsbmSpec(beta=0.0, subordinator=VarianceGamma(nu=1.0))
    n = 1000
    row = transition_row(lsbm, 0.1, _centered_grid(n, 10.0))
    err = max(abs(row[n // 2 + k] - row[n // 2 - k]) for k in range(1, n // 2))
    assert err <= 1e-12


def test_transition_row_first_moment(set1):
    x = _centered_grid(1000, 10.0)
    row = transition_row(set1, 0.1, x)
    mean = float((row * x).sum())
    assert mean == pytest.approx(0.2 * 0.1, rel=0.02)


def test_transition_row_validation(set1):
    with pytest.raises(ValueError):
        transition_row(set1, 0.0, _centered_grid(100, 10.0))
    with pytest.raises(ValueError):
        transition_row(set1, 0.1, _centered_grid(6, 10.0))
    with pytest.raises(ValueError):
        transition_row(set1, 0.1, _centered_grid(101, 10.0))
    with pytest.raises(ValueError):
        transition_row(set1, 0.1, _centered_grid(100, 10.0) + 0.03)
    with pytest.raises(ValueError):
        transition_row(set1, 0.1, np.geomspace(0.1, 10.0, 100))


def test_transition_row_coarse_grid_rejected():
    # the step law is a sharp Gaussian centered mid-cell: inversion rings
    lsbm = LsbmSpec(beta=50.0, subordinator=Exponential(a=1.0, b=1.0, c=1e-9))
    with pytest.raises(ResolutionError):
        transition_row(lsbm, 0.01, _centered_grid(16, 8.0))


def test_fd_config_validation():
    FdConfig(n_t=8, n_x=8, X=5.0)
    with pytest.raises(ValueError):
        FdConfig(n_t=4)
    with pytest.raises(ValueError):
        FdConfig(n_x=7)
    with pytest.raises(ValueError):
        FdConfig(n_x=9)  # odd
    with pytest.raises(ValueError):
        FdConfig(X=0.0)


def test_mc_config_validation():
    McConfig(n_paths=1, dt_sim=0.1, seed=0, horizon=1.0, n_buckets=1)
    with pytest.raises(ValueError):
        McConfig(n_paths=0)
    with pytest.raises(ValueError):
        McConfig(dt_sim=0.0)
    with pytest.raises(ValueError):
        McConfig(horizon=-1.0)
    with pytest.raises(ValueError):
        McConfig(n_buckets=0)


@pytest.fixture(scope="module")
def fd_small(set1):
    return fd_first_passage(set1, 0.5, 5.0, FdConfig(n_t=100, n_x=2000))


def test_fd_survival_monotone(fd_small):
    assert fd_small.survival[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(fd_small.survival) <= 1e-14)
    assert np.all(fd_small.survival >= 0)


def test_fd_density_bounded(fd_small):
    dt = 5.0 / 100
    assert np.all(fd_small.density >= 0)
    assert np.all(fd_small.density <= 1 / dt)
    assert dt * float(fd_small.density.sum()) <= 1 + 1e-6


def test_fd_density_is_survival_increment(fd_small):
    dt = 5.0 / 100
    drops = -np.diff(fd_small.survival) / dt
    assert np.allclose(fd_small.density, drops, atol=1e-14)
    assert fd_small.t[0] == pytest.approx(dt / 2)


def test_fd_x0_outside_grid(set1):
    with pytest.raises(ValueError):
        fd_first_passage(set1, 12.0, 5.0, FdConfig(X=10.0))
    with pytest.raises(ValueError):
        fd_first_passage(set1, 0.0, 5.0)
    with pytest.raises(ValueError):
        fd_first_passage(set1, 0.5, -1.0)


def test_mc_immediate_passage(set1):
    res = mc_first_passage(set1, -0.3, McConfig(n_paths=500, dt_sim=1e-2, seed=1, horizon=1.0, n_buckets=8))
    assert res.n_crossed == res.n_paths
    assert np.all(res.survival == 0.0)


def test_mc_steep_drift_crosses():
    steep = LsbmSpec(beta=-5.0, subordinator=VarianceGamma(nu=1.0))
    res = mc_first_passage(steep, 0.1, McConfig(n_paths=5000, dt_sim=1e-3, seed=7, horizon=5.0, n_buckets=25))
    assert res.n_crossed >= 0.99 * res.n_paths


def test_mc_seed_determinism(set1):
    cfg = McConfig(n_paths=4000, dt_sim=2e-3, seed=42, horizon=2.0, n_buckets=10)
    a = mc_first_passage(set1, 0.5, cfg)
    b = mc_first_passage(set1, 0.5, cfg)
    assert np.array_equal(a.bucket_density, b.bucket_density)
    assert np.array_equal(a.survival, b.survival)
    assert a.n_crossed == b.n_crossed
    c = mc_first_passage(set1, 0.5, McConfig(n_paths=4000, dt_sim=2e-3, seed=43, horizon=2.0, n_buckets=10))
    assert not np.array_equal(a.survival, c.survival)


def test_mc_step_halving_within_two_se(set1):
    coarse = mc_first_passage(set1, 0.5, McConfig(n_paths=20000, dt_sim=2e-3, seed=11, horizon=3.0, n_buckets=12))
    fine = mc_first_passage(set1, 0.5, McConfig(n_paths=20000, dt_sim=1e-3, seed=12, horizon=3.0, n_buckets=12))
    se = np.hypot(coarse.survival_se, fine.survival_se)
    gap = np.abs(coarse.survival - fine.survival)
    assert np.all(gap <= 2 * np.maximum(se, 1e-12))


def test_fd_csv_columns(fd_small, tmp_path):
    path = str(tmp_path / "fd.csv")
    write_fd_csv(fd_small, path)
    cols = read_csv_columns(path)
    assert list(cols) == ["t", "density"]
    assert np.array_equal(cols["t"], fd_small.t)
    assert np.array_equal(cols["density"], fd_small.density)


def test_mc_csv_columns(set1, tmp_path):
    res = mc_first_passage(set1, 0.5, McConfig(n_paths=1000, dt_sim=5e-3, seed=3, horizon=1.0, n_buckets=5))
    path = str(tmp_path / "mc.csv")
    write_mc_csv(res, path)
    cols = read_csv_columns(path)
    assert list(cols) == ["t_bucket", "survival", "stderr"]
    assert np.array_equal(cols["t_bucket"], res.edges)
    assert np.array_equal(cols["survival"], res.survival)
