import warnings

import numpy as np
import pytest

from fptlevy import (
    Exponential,
    KernelTable,
    LsbmSpec,
    NumericalError,
    QuadratureConfig,
    ResolutionError,
    SpaceTimeGrid,
    build_kernel_table,
    contraction_estimate,
    fd_first_passage,
    iterate,
    l1_distance,
    write_marginals_csv,
)
from fptlevy.ioutil import read_csv_columns


def test_grid_quadratic_law_nodes():
    g = SpaceTimeGrid.build(T=5.0, n_t=50, X=10.0, n_x=10)
    assert np.allclose(g.x_nodes, 10.0 * (np.arange(1, 11) / 10.0) ** 2)
    assert g.dt == 0.1
    assert g.t_mid[0] == 0.05 and g.t_mid[-1] == pytest.approx(4.95)


def test_grid_linear_law_nodes():
    g = SpaceTimeGrid.build(T=1.0, n_t=4, X=2.0, n_x=4, law="linear")
    assert np.allclose(g.x_nodes, [0.25, 0.75, 1.25, 1.75])


def test_grid_axis_layout():
    g = SpaceTimeGrid.build(T=5.0, n_t=10, X=10.0, n_x=5)
    assert np.all(np.diff(g.all_nodes) > 0)
    assert np.allclose(g.x_neg_nodes, -g.x_nodes[::-1])
    w = g.cell_weights
    assert np.all(w > 0)
    # midpoint cells tile [-X, 0] and [0, X]
    assert float(w.sum()) == pytest.approx(2 * g.X, rel=1e-14)
    assert np.allclose(w[: g.n_x], w[g.n_x :][::-1])


def test_grid_anchor_snap():
    g = SpaceTimeGrid.build(T=5.0, n_t=50, X=10.0, n_x=10, anchor=0.5)
    assert 0.5 in g.x_nodes
    assert g.x0_index(0.5) == 1
    with pytest.raises(ValueError):
        g.x0_index(0.55)


def test_grid_anchor_out_of_range():
    with pytest.raises(ValueError):
        SpaceTimeGrid.build(T=5.0, n_t=50, X=10.0, n_x=10, anchor=10.0)
    with pytest.raises(ValueError):
        SpaceTimeGrid.build(T=5.0, n_t=50, X=10.0, n_x=10, anchor=-1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        SpaceTimeGrid.build(T=0.0, n_t=10, X=10.0, n_x=5)
    with pytest.raises(ValueError):
        SpaceTimeGrid.build(T=5.0, n_t=0, X=10.0, n_x=5)
    with pytest.raises(ValueError):
        SpaceTimeGrid.build(T=5.0, n_t=10, X=10.0, n_x=1)
    with pytest.raises(ValueError):
        SpaceTimeGrid.build(T=5.0, n_t=10, X=10.0, n_x=5, law="cubic")
    with pytest.raises(ValueError):
        SpaceTimeGrid(T=5.0, n_t=10, X=10.0, x_nodes=np.array([0.5, 0.2]))


def test_l1_distance_examples(grid50):
    f = np.zeros(grid50.n_t)
    g = np.ones(grid50.n_t)
    assert l1_distance(f, f, grid50) == 0.0
    assert l1_distance(f, g, grid50) == pytest.approx(5.0, rel=1e-14)
    with pytest.raises(ValueError):
        l1_distance(f[:-1], g, grid50)


def _toy_table(seed=3, n_t=64, n_x=3, scale=0.02):
    rng = np.random.default_rng(seed)
    grid = SpaceTimeGrid.build(T=2.0, n_t=n_t, X=1.0, n_x=n_x, law="linear")
    p1 = scale * rng.random((n_x, n_t, 2 * n_x))
    q1 = p1[:, :, :n_x] @ grid.cell_weights[:n_x]
    return KernelTable(grid=grid, p1=p1, q1=q1), grid


def test_fft_convolution_matches_direct():
    # replay the recursion with an explicit O(n_t^2) causal convolution
    table, grid = _toy_table()
    n_t, n_x = grid.n_t, grid.n_x
    dt = grid.dt
    w = grid.cell_weights
    a = table.p1[:, :, n_x:] * w[n_x:][None, None, :]
    p1_neg = table.p1[:, :, :n_x]

    state = p1_neg.copy()
    direct_states = []
    for _ in range(3):
        c = np.zeros_like(state)
        for m in range(n_t):
            for u in range(m + 1):
                c[:, m] += np.einsum("iy,yk->ik", a[:, u], state[:, m - u])
        shifted = np.concatenate((np.zeros((n_x, 1, n_x)), c[:, :-1]), axis=1)
        state = p1_neg + (dt / 2) * (c + shifted)
        direct_states.append(state.copy())

    series = iterate(table, grid, 0, n_iter=4, tol=0.0)
    for it, ref in enumerate(direct_states, start=1):
        assert np.max(np.abs(series.joints[it] - ref[0])) <= 1e-10
        assert np.max(np.abs(series.marginals[it] - ref[0] @ w[:n_x])) <= 1e-10


def test_first_iterate_is_kernel_marginal(table1, grid50):
    i0 = grid50.x0_index(0.5)
    series = iterate(table1, grid50, i0, n_iter=1)
    assert len(series.marginals) == 1
    assert np.array_equal(series.marginals[0], table1.q1[i0])


def test_single_slice_grid_returns_q1_row(set1):
    grid = SpaceTimeGrid.build(T=0.1, n_t=1, X=10.0, n_x=4, anchor=0.5)
    table = build_kernel_table(set1, grid)
    series = iterate(table, grid, grid.x0_index(0.5), n_iter=1)
    assert np.array_equal(series.marginals[0], table.q1[grid.x0_index(0.5)])


def test_absorbed_mass_monotone_and_bounded(table1, table2, grid50):
    i0 = grid50.x0_index(0.5)
    for table in (table1, table2):
        series = iterate(table, grid50, i0, n_iter=8, tol=0.0)
        masses = [grid50.dt * float(m.sum()) for m in series.marginals]
        assert np.all(np.diff(masses) >= -1e-14)
        assert masses[-1] <= 1.0 + 1e-3


def test_convergence_boundary_set2(table2, grid50):
    # change between iterates 5 and 6 sits just above 1e-3; one more
    # iterate crosses it
    i0 = grid50.x0_index(0.5)
    series = iterate(table2, grid50, i0, n_iter=7, tol=0.0)
    assert series.l1_steps[4] < 5e-3
    assert series.l1_steps[5] < 1e-3


def test_step_ratios_contract_set2(table2, grid50):
    i0 = grid50.x0_index(0.5)
    series = iterate(table2, grid50, i0, n_iter=8, tol=0.0)
    steps = series.l1_steps
    for i in range(1, len(steps) - 1):
        assert steps[i + 1] / steps[i] < 0.5
    # geometric bound from the contraction estimate, with slack
    c_hat = series.c_hat + 0.05
    for i in range(2, len(steps)):
        assert steps[i] <= c_hat * steps[i - 1]


def test_tolerance_stop(table2, grid50):
    i0 = grid50.x0_index(0.5)
    series = iterate(table2, grid50, i0, n_iter=64, tol=1e-3)
    assert series.stopped == "tol"
    assert series.l1_steps[-1] < 1e-3
    assert all(s >= 1e-3 for s in series.l1_steps[:-1])
    capped = iterate(table2, grid50, i0, n_iter=3, tol=0.0)
    assert capped.stopped == "cap"
    assert len(capped.marginals) == 3


def test_contraction_estimates(table1, table2, grid50):
    c2 = contraction_estimate(table2, grid50)
    assert 0 <= c2 < 0.5
    c1 = contraction_estimate(table1, grid50)
    assert 0 <= c1 < 1.0


def test_contraction_far_row_small(set1):
    grid = SpaceTimeGrid.build(T=5.0, n_t=25, X=10.0, n_x=6, anchor=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = build_kernel_table(set1, grid)
    i5 = grid.x0_index(5.0)
    w_pos = grid.cell_weights[grid.n_x :]
    mass = grid.dt * float(np.einsum("jk,k->", table.p1[i5, :, grid.n_x :], w_pos))
    assert mass < 0.5


def test_contraction_estimate_rejects_supercritical():
    table, grid = _toy_table(scale=1.0)
    with pytest.raises(ResolutionError):
        contraction_estimate(table, grid)


def test_iterate_validation(table1, grid50):
    i0 = grid50.x0_index(0.5)
    with pytest.raises(ValueError):
        iterate(table1, grid50, i0, n_iter=0)
    with pytest.raises(ValueError):
        iterate(table1, grid50, i0, n_iter=65)
    with pytest.raises(ValueError):
        iterate(table1, grid50, grid50.n_x, n_iter=2)
    with pytest.raises(ValueError):
        iterate(table1, grid50, i0, n_iter=2, tol=-1e-3)
    other = SpaceTimeGrid.build(T=5.0, n_t=50, X=10.0, n_x=12)
    with pytest.raises(ValueError):
        iterate(table1, other, 0, n_iter=2)


def test_iterate_flags_nonfinite(table1, grid50):
    p1_bad = table1.p1.copy()
    p1_bad[0, 0, grid50.n_x + 1] = np.nan
    bad = KernelTable(grid=grid50, p1=p1_bad, q1=table1.q1.copy())
    with pytest.raises(NumericalError) as exc:
        iterate(bad, grid50, 0, n_iter=3, tol=0.0)
    assert exc.value.iteration == 1


def test_table_build_nonnegative(table1):
    assert np.all(table1.p1 >= 0)
    assert np.all(table1.q1 >= 0)


def test_table_mass_advisory(set2, grid50):
    with pytest.warns(UserWarning, match="carries discretized mass"):
        build_kernel_table(set2, grid50)


def test_table_truncation_doubling_stable(set1):
    grid = SpaceTimeGrid.build(T=2.0, n_t=8, X=10.0, n_x=4, anchor=0.5)
    base = build_kernel_table(set1, grid, QuadratureConfig())
    doubled = build_kernel_table(set1, grid, QuadratureConfig(truncation=2e5))
    assert np.max(np.abs(base.p1 - doubled.p1)) <= 1e-6


def test_table_generic_route_smoke():
    lsbm = LsbmSpec(beta=0.2, subordinator=Exponential(a=2.0, b=0.0, c=1.0))
    grid = SpaceTimeGrid.build(T=2.0, n_t=4, X=5.0, n_x=3, anchor=0.5)
    cfg = QuadratureConfig(truncation=1e4, n_points=64)
    with pytest.warns(UserWarning, match="non-VG"):
        table = build_kernel_table(lsbm, grid, cfg)
    assert np.all(table.p1 >= 0)
    series = iterate(table, grid, grid.x0_index(0.5), n_iter=3, tol=0.0)
    assert all(np.all(m >= 0) for m in series.marginals)


def test_table_save_load_roundtrip(tmp_path):
    table, grid = _toy_table()
    path = str(tmp_path / "table.fpt")
    table.save(path)
    back = KernelTable.load(path)
    assert np.array_equal(back.p1, table.p1)
    assert np.array_equal(back.q1, table.q1)
    assert np.array_equal(back.grid.x_nodes, grid.x_nodes)
    assert back.grid.T == grid.T and back.grid.n_t == grid.n_t
    assert back.grid.law == grid.law
    # a loaded table drives the iteration exactly like the original
    a = iterate(table, grid, 0, n_iter=3, tol=0.0)
    b = iterate(back, back.grid, 0, n_iter=3, tol=0.0)
    for x, y in zip(a.marginals, b.marginals):
        assert np.array_equal(x, y)


def test_table_load_rejects_corruption(tmp_path):
    table, _ = _toy_table()
    path = str(tmp_path / "table.fpt")
    table.save(path)
    raw = open(path, "rb").read()

    short = tmp_path / "short.fpt"
    short.write_bytes(raw[:10])
    with pytest.raises(ValueError, match="truncated"):
        KernelTable.load(str(short))

    magic = tmp_path / "magic.fpt"
    magic.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError, match="magic"):
        KernelTable.load(str(magic))

    version = tmp_path / "version.fpt"
    version.write_bytes(raw[:4] + b"\x63\x00\x00\x00" + raw[8:])
    with pytest.raises(ValueError, match="version"):
        KernelTable.load(str(version))

    padded = tmp_path / "padded.fpt"
    padded.write_bytes(raw + b"\x00" * 8)
    with pytest.raises(ValueError, match="bytes"):
        KernelTable.load(str(padded))


def test_thread_count_does_not_change_bits(set1, monkeypatch):
    grid = SpaceTimeGrid.build(T=2.0, n_t=8, X=10.0, n_x=4, anchor=0.5)
    monkeypatch.setenv("FPT_THREADS", "1")
    t1 = build_kernel_table(set1, grid)
    monkeypatch.setenv("FPT_THREADS", "3")
    t3 = build_kernel_table(set1, grid)
    assert np.array_equal(t1.p1, t3.p1)
    assert np.array_equal(t1.q1, t3.q1)


def test_thread_count_rejects_garbage(set1, monkeypatch):
    grid = SpaceTimeGrid.build(T=1.0, n_t=2, X=10.0, n_x=2)
    monkeypatch.setenv("FPT_THREADS", "many")
    with pytest.warns(UserWarning, match="FPT_THREADS"):
        build_kernel_table(set1, grid)


def test_marginals_csv_roundtrip(table1, grid50, tmp_path):
    i0 = grid50.x0_index(0.5)
    series = iterate(table1, grid50, i0, n_iter=3, tol=0.0)
    path = str(tmp_path / "marginals.csv")
    write_marginals_csv(series, grid50, path)
    cols = read_csv_columns(path)
    assert list(cols) == ["t", "p_star_1", "p_star_2", "p_star_3"]
    assert np.array_equal(cols["t"], grid50.t_mid)
    for i, m in enumerate(series.marginals, start=1):
        assert np.array_equal(cols[f"p_star_{i}"], m)


def test_grid_refinement_shifts_less_than_plateau_error(set2, table2, grid50):
    # doubling both grid axes moves the 4th iterate by no more than twice
    # the plateau error left on the coarse grid
    i0 = grid50.x0_index(0.5)
    coarse = iterate(table2, grid50, i0, n_iter=8, tol=0.0)

    fd = fd_first_passage(set2, 0.5, 5.0)
    fd_on_coarse = np.interp(grid50.t_mid, fd.t, fd.density)
    plateau_err = l1_distance(coarse.marginals[-1], fd_on_coarse, grid50)

    fine_grid = SpaceTimeGrid.build(T=5.0, n_t=100, X=10.0, n_x=20, anchor=0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fine_table = build_kernel_table(set2, fine_grid)
    fine = iterate(fine_table, fine_grid, fine_grid.x0_index(0.5), n_iter=4, tol=0.0)
    fine_on_coarse = np.interp(grid50.t_mid, fine_grid.t_mid, fine.marginals[3])
    shift = l1_distance(coarse.marginals[3], fine_on_coarse, grid50)
    assert shift <= 2 * plateau_err
