import numpy as np
import pytest
from hypothesis import given, strategies as st

from scatterbound.forward import (PowerIterationError, SingularSystemError, VIESystem,
                                  cross_section, operator_norm, reference_field,
                                  relative_deviation, sigma_over_wavelength, solve_vie)
from scatterbound.geometry import FieldArray, build_grid, inner, norm
from scatterbound.greens import GreensOperator, assemble, plane_wave, te_self_term
from scatterbound.mie import mie_cross_section

E_REF_DEVIATION_TE = 0.16068150327809133  # TE, 2R = 0.2, chi_bar = 0.5, dx = 1/100


@pytest.fixture(scope="module")
def disc():
    grid = build_grid(1.0, 0.1, 0.01)
    return {pol: (assemble(grid, pol), plane_wave(grid, pol)) for pol in ("TE", "TM")}


@pytest.mark.parametrize("pol", ["TE", "TM"])
def test_zero_contrast(pol, disc):
    G, E_inc = disc[pol]
    sol = solve_vie(G, np.zeros(G.grid.n_pixels), E_inc)
    np.testing.assert_array_equal(sol.field.values, E_inc.values)
    assert sol.cross_section == 0.0


@given(st.floats(-3.0, 5.0))
def test_single_pixel_closed_form(chi):
    grid = build_grid(1.0, 0.5 * 0.01, 0.01, offset=0.0)
    G = assemble(grid, "TE")
    E_inc = plane_wave(grid, "TE")
    sol = solve_vie(G, [chi], E_inc)
    expected = 1.0 / (1.0 - chi * te_self_term(grid.k, grid.spacing))
    assert abs(sol.field.values[0] - expected) <= 1e-12 * abs(expected)


@pytest.mark.parametrize("pol,tol", [("TE", 0.02), ("TM", 0.03)])
def test_disc_matches_series(pol, tol, disc):
    G, E_inc = disc[pol]
    sol = solve_vie(G, np.ones(G.grid.n_pixels), E_inc)
    series = mie_cross_section(0.1, 1.0, 1.0, pol)
    vie = sigma_over_wavelength(G.grid, sol.cross_section)
    assert abs(vie - series.sigma) <= tol * series.sigma
    assert abs(vie - series.sigma_optical_theorem) <= tol * series.sigma
    assert sol.residual <= 1e-10


def test_cross_section_simple_cases():
    grid = build_grid(1.0, 0.05, 0.01)
    E_inc = plane_wave(grid, "TE")
    assert cross_section(E_inc, E_inc * 0) == 0.0
    value = cross_section(E_inc, E_inc * 1j)
    assert value == pytest.approx(2 * grid.n_pixels * grid.cell_area, rel=1e-14)


@pytest.mark.parametrize("pol", ["TE", "TM"])
@given(seed=st.integers(0, 2**31), chi0=st.sampled_from([-2.0, -0.5, 1.0, 3.0]),
       phase=st.floats(0, 2 * np.pi))
def test_solution_invariants(pol, seed, chi0, phase):
    grid = build_grid(1.0, 0.05, 0.02)
    G = assemble(grid, pol)
    E_inc = plane_wave(grid, pol)
    chi = np.random.default_rng(seed).uniform(min(0, chi0), max(0, chi0), grid.n_pixels)
    try:
        sol = solve_vie(G, chi, E_inc)
    except SingularSystemError:
        return
    assert sol.residual <= 1e-10
    np.testing.assert_array_equal(sol.current.values,
                                  np.repeat(chi, G.polarization.ncomp) * sol.field.values)
    # lossless contrast: no negative cross-section beyond roundoff
    assert sol.cross_section >= -1e-8 * norm(E_inc) ** 2
    rotated = solve_vie(G, chi, E_inc * np.exp(1j * phase))
    assert rotated.cross_section == pytest.approx(sol.cross_section, rel=1e-10, abs=1e-14)


def test_singular_system_is_reported():
    grid = build_grid(1.0, 0.03, 0.01)
    G = GreensOperator(grid, assemble(grid, "TE").polarization, np.eye(grid.n_pixels))
    with pytest.raises(SingularSystemError, match="singular"):
        VIESystem(G, np.ones(grid.n_pixels))


def test_reference_field(disc):
    G, E_inc = disc["TE"]
    np.testing.assert_array_equal(reference_field(G, 0.0, E_inc).values, E_inc.values)
    ref = reference_field(G, 0.5, E_inc)
    direct = solve_vie(G, np.full(G.grid.n_pixels, 0.5), E_inc).field
    assert norm(ref - direct) <= 1e-12 * norm(direct)
    assert relative_deviation(ref, E_inc) == pytest.approx(E_REF_DEVIATION_TE, rel=1e-10)


def test_operator_norm_simple():
    assert operator_norm(np.eye(7)) == pytest.approx(1.0, rel=1e-12)
    d = np.ones(9)
    d[0] = 2.0
    assert operator_norm(np.diag(d)) == pytest.approx(2.0, rel=1e-10)


@given(st.integers(0, 2**31))
def test_operator_norm_random_matches_svd(seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
    exact = np.linalg.svd(M, compute_uv=False)[0]
    assert operator_norm(M, max_iter=200000) == pytest.approx(exact, rel=1e-8)
    assert operator_norm(M, method="svd") == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("chi_bar", [0.25, -0.5, 1.0])
def test_operator_norm_on_field_operators(chi_bar):
    # the operator behind alpha_ub, N*d <= 400: power iteration against the full SVD
    grid = build_grid(1.0, 0.1, 0.02)
    G = assemble(grid, "TE")
    system = VIESystem(G, np.full(grid.n_pixels, chi_bar))
    A = np.linalg.solve(system.matrix, G.matrix)
    exact = np.linalg.svd(A, compute_uv=False)[0]
    assert operator_norm(A, max_iter=200000) == pytest.approx(exact, rel=1e-8)
    assert operator_norm(A, method="auto") == pytest.approx(exact, rel=1e-12)


def test_operator_norm_failure_reports_state():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(40, 40))
    with pytest.raises(PowerIterationError) as info:
        operator_norm(M, max_iter=3)
    assert info.value.last_vector.shape == (40,)
    assert np.isfinite(info.value.gap)
    with pytest.raises(ValueError):
        operator_norm(np.ones((3, 4)), method="svd")


def test_inner_weighting_matches_adjoint(rng):
    # G^H is the adjoint under the area-weighted inner product
    grid = build_grid(1.0, 0.05, 0.02)
    G = assemble(grid, "TM")
    n = G.size
    u = FieldArray(grid, "TM", rng.normal(size=n) + 1j * rng.normal(size=n))
    v = FieldArray(grid, "TM", rng.normal(size=n) + 1j * rng.normal(size=n))
    lhs = inner(u.like(G.adjoint @ u.values), v)
    rhs = inner(u, G.apply(v))
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


@pytest.fixture(scope="module")
def refinement():
    from scatterbound.validation import disc_cross_section
    return {pol: [disc_cross_section(pol, 0.1, 1.0, h) for h in (1 / 50, 1 / 100, 1 / 200)]
            for pol in ("TE", "TM")}


@pytest.mark.parametrize("pol", ["TE", "TM"])
def test_refinement_differences_shrink(pol, refinement):
    d = np.abs(np.diff(refinement[pol]))
    assert d[0] >= 1.5 * d[1]


def test_tm_refinement_is_monotone(refinement):
    assert np.all(np.diff(refinement["TM"]) > 0) or np.all(np.diff(refinement["TM"]) < 0)


@pytest.mark.xfail(strict=True, reason="TE staircasing error changes sign between dx = 1/100 "
                   "and 1/200; the differences still shrink ~90x")
def test_te_refinement_is_monotone(refinement):
    steps = np.diff(refinement["TE"])
    assert np.all(steps > 0) or np.all(steps < 0)
