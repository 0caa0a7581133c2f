"""Grid, operator backend, and nonlinear-term tests.

Analytic oracles used below:

* constant-coefficient Dirichlet Laplacian on (0, 1) has the discrete
  sine modes as exact eigenvectors with eigenvalue (4/h^2) sin^2(pi h/2)
  for the lowest mode;
* for b = c*a the assembled matrix has numerical range on the ray of
  angle atan(c), so its stability constant is sqrt(1 + c^2);
* div(cos^4(x) e^{sin x}) with u = sin x on the torus is
  cos^5(x) e^{sin x} - 4 cos^3(x) sin(x) e^{sin x} ... exercised instead
  through a symbolic reference computed with sympy in-test.
"""

import math

import numpy as np
import pytest
import scipy.sparse as sp
import sympy

from imexbdf import operators as ops
from imexbdf.errors import (
    CoercivityError,
    ConfigError,
    DomainError,
    UnsupportedOperationError,
)
from imexbdf.stability import stability_constant


# ---------------------------------------------------------------- grids


def test_dirichlet_grid_nodes_interior_only():
    g = ops.dirichlet_grid((0.0, 1.0), 7)
    h = 1.0 / 8.0
    assert g.h == (h,)
    x = g.axis_nodes(0)
    assert x[0] == pytest.approx(h)
    assert x[-1] == pytest.approx(1.0 - h)
    assert len(x) == 7

def test_periodic_grid_excludes_duplicate_endpoint():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 8)
    x = g.axis_nodes(0)
    assert g.h == (2.0 * np.pi / 8,)
    assert x[0] == 0.0
    assert x[-1] == pytest.approx(2.0 * np.pi - g.h[0])

def test_grid_2d_shapes():
    g = ops.dirichlet_grid(((0.0, 1.0), (0.0, 2.0)), (5, 9))
    assert g.ndim == 2
    assert g.shape == (5, 9)
    assert g.size == 45
    X, Y = g.meshes()
    assert X.shape == (5, 9)
    assert Y[0, 0] == pytest.approx(2.0 / 10.0)

@pytest.mark.parametrize("bad", [3, 1, 0])
def test_grid_rejects_too_few_points(bad):
    with pytest.raises(DomainError):
        ops.dirichlet_grid((0.0, 1.0), bad)

def test_grid_rejects_empty_extent():
    with pytest.raises(DomainError):
        ops.dirichlet_grid((1.0, 1.0), 8)

def test_grid_rejects_unknown_boundary():
    with pytest.raises(DomainError):
        ops.Grid(((0.0, 1.0),), (8,), "neumann")


# ------------------------------------------------- sparse diffusion, 1d


def test_laplacian_sine_mode_eigenvalue():
    # lowest discrete sine mode is an exact eigenvector
    M = 31
    g = ops.dirichlet_grid((0.0, 1.0), M)
    h = g.h[0]
    op = ops.SparseDiffusionOperator(g, 1.0, 0.0)
    x = g.axis_nodes(0)
    mode = np.sin(np.pi * x)
    lam = (4.0 / h**2) * math.sin(math.pi * h / 2.0) ** 2
    out = op.apply(0.0, mode)
    np.testing.assert_allclose(out, lam * mode, rtol=1e-12, atol=1e-10)

def test_laplacian_matrix_is_spd_for_real_coefficient():
    g = ops.dirichlet_grid((0.0, 1.0), 24)
    op = ops.SparseDiffusionOperator(g, lambda x, t: 1.0 + 0.5 * np.sin(3 * x), 0.0)
    A = op.assemble(0.3).toarray()
    np.testing.assert_allclose(A.imag, 0.0, atol=0.0)
    np.testing.assert_allclose(A, A.T, rtol=0.0, atol=1e-14)
    eigs = np.linalg.eigvalsh(A.real)
    assert eigs.min() > 0.0

def test_variable_coefficient_second_order_convergence():
    # apply the operator to a smooth function and compare with the
    # continuous -(a u')' at the nodes; error should drop ~4x per halving
    a_expr = lambda x: 1.0 + 0.3 * np.sin(x)
    ap_expr = lambda x: 0.3 * np.cos(x)
    u_expr = lambda x: np.sin(np.pi * x) * x
    up_expr = lambda x: np.pi * np.cos(np.pi * x) * x + np.sin(np.pi * x)
    upp_expr = lambda x: -np.pi**2 * np.sin(np.pi * x) * x + 2 * np.pi * np.cos(np.pi * x)
    errs = []
    for M in (64, 128, 256):
        g = ops.dirichlet_grid((0.0, 1.0), M)
        op = ops.SparseDiffusionOperator(g, lambda x, t: a_expr(x), 0.0)
        x = g.axis_nodes(0)
        exact = -(ap_expr(x) * up_expr(x) + a_expr(x) * upp_expr(x))
        errs.append(np.max(np.abs(op.apply(0.0, u_expr(x)) - exact)))
    assert errs[0] / errs[1] > 3.5
    assert errs[1] / errs[2] > 3.5

def test_proportional_imaginary_part_hits_sqrt_ratio():
    # b = c*a puts every Rayleigh quotient on the ray of angle atan(c)
    c = 0.7
    g = ops.dirichlet_grid((0.0, 1.0), 40)
    a_fn = lambda x, t: 1.0 + 0.4 * np.cos(2 * x)
    op = ops.SparseDiffusionOperator(g, a_fn, lambda x, t: c * a_fn(x, t))
    A = op.assemble(0.0).toarray()
    lam = stability_constant(A)
    assert lam == pytest.approx(math.sqrt(1.0 + c**2), abs=1e-4)

def test_nonpositive_coefficient_rejected():
    g = ops.dirichlet_grid((0.0, 1.0), 16)
    with pytest.raises(CoercivityError):
        ops.SparseDiffusionOperator(g, lambda x, t: np.cos(4.0 * np.pi * x), 0.0)

def test_shifted_solve_inverts_shifted_matrix():
    g = ops.dirichlet_grid((0.0, 1.0), 32)
    op = ops.SparseDiffusionOperator(g, lambda x, t: 1.0 + 0.2 * x, lambda x, t: 0.1)
    rng = np.random.default_rng(7)
    r = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    sigma = 3.7
    u = op.shifted_solve(0.5, sigma, r)
    residual = sigma * u + op.apply(0.5, u) - r
    assert np.max(np.abs(residual)) < 1e-10 * np.max(np.abs(r))

def test_factorization_cache_reused_when_autonomous():
    g = ops.dirichlet_grid((0.0, 1.0), 16)
    op = ops.SparseDiffusionOperator(g, 2.0, 0.0)
    assert op.autonomous
    r = np.ones(16)
    op.shifted_solve(0.0, 5.0, r)
    count = op.factorization_count
    for t in (0.1, 0.2, 0.3):
        op.shifted_solve(t, 5.0, r)
    assert op.factorization_count == count
    op.shifted_solve(0.4, 6.0, r)  # new shift forces a refactorization
    assert op.factorization_count == count + 1

def test_time_dependent_operator_refactors_per_time():
    g = ops.dirichlet_grid((0.0, 1.0), 16)
    op = ops.SparseDiffusionOperator(g, lambda x, t: 1.0 + 0.5 * np.sin(t), 0.0)
    assert not op.autonomous
    r = np.ones(16)
    op.shifted_solve(0.0, 5.0, r)
    base = op.factorization_count
    op.shifted_solve(0.1, 5.0, r)
    assert op.factorization_count == base + 1
    op.shifted_solve(0.1, 5.0, r)  # same (t, sigma) reuses
    assert op.factorization_count == base + 1

def test_operator_time_continuity():
    g = ops.dirichlet_grid((0.0, 1.0), 20)
    op = ops.SparseDiffusionOperator(g, lambda x, t: 2.0 + np.sin(x + t), 0.0)
    t0 = 0.4
    norm0 = sp.linalg.norm(op.assemble(t0))
    for dt in (1e-2, 1e-3):
        diff = sp.linalg.norm(op.assemble(t0 + dt) - op.assemble(t0))
        assert diff <= 2.0 * dt * norm0

def test_apply_rejects_wrong_shape():
    g = ops.dirichlet_grid((0.0, 1.0), 16)
    op = ops.SparseDiffusionOperator(g, 1.0, 0.0)
    with pytest.raises(DomainError):
        op.apply(0.0, np.ones(17))


# ------------------------------------------------- sparse diffusion, 2d


def test_laplacian_2d_sine_mode():
    g = ops.dirichlet_grid(((0.0, 1.0), (0.0, 1.0)), (15, 15))
    hx, hy = g.h
    op = ops.SparseDiffusionOperator(g, 1.0, 0.0)
    X, Y = g.meshes()
    mode = np.sin(np.pi * X) * np.sin(2 * np.pi * Y)
    lam = (4.0 / hx**2) * math.sin(math.pi * hx / 2) ** 2 + (
        4.0 / hy**2
    ) * math.sin(2 * math.pi * hy / 2) ** 2
    np.testing.assert_allclose(op.apply(0.0, mode), lam * mode, rtol=1e-11, atol=1e-9)

def test_2d_matrix_symmetric_for_real_coefficient():
    g = ops.dirichlet_grid(((0.0, 1.0), (0.0, 2.0)), (6, 8))
    op = ops.SparseDiffusionOperator(
        g, lambda x, y, t: 1.0 + 0.3 * np.sin(x) * np.cos(y), 0.0
    )
    A = op.assemble(0.0).toarray()
    np.testing.assert_allclose(A, A.T, atol=1e-13)
    assert np.linalg.eigvalsh(A.real).min() > 0.0

def test_periodic_1d_constant_mode_in_kernel():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 16)
    op = ops.SparseDiffusionOperator(g, lambda x, t: 1.0 + 0.5 * np.sin(x), 0.0)
    out = op.apply(0.0, np.ones(16))
    assert np.max(np.abs(out)) < 1e-12

def test_periodic_2d_row_sums_vanish():
    g = ops.periodic_grid(((0.0, 1.0), (0.0, 1.0)), (8, 8))
    op = ops.SparseDiffusionOperator(
        g, lambda x, y, t: 1.0 + 0.2 * np.cos(2 * np.pi * x), 0.0
    )
    A = op.assemble(0.0)
    sums = np.asarray(A.sum(axis=1)).ravel()
    assert np.max(np.abs(sums)) < 1e-10


# ------------------------------------------------------------- spectral


def test_spectral_half_laplacian_single_mode():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 32)
    op, _ = ops.assemble_example3(g)
    x = g.axis_nodes(0)
    mode = np.exp(3j * x)
    out = op.apply(0.0, mode)
    np.testing.assert_allclose(out, 3.0 * mode, rtol=1e-12, atol=1e-12)

def test_spectral_symbol_zero_on_constant_mode():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 16)
    op, _ = ops.assemble_example3(g)
    assert op.symbol.ravel()[0] == 0.0
    out = op.apply(0.0, np.full(16, 2.0))
    assert np.max(np.abs(out)) < 1e-14

def test_spectral_biharmonic_symbol_is_squared_laplacian():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 24)
    op4, _ = ops.assemble_example4(g)
    x = g.axis_nodes(0)
    mode = np.exp(2j * x)
    np.testing.assert_allclose(op4.apply(0.0, mode), 16.0 * mode, rtol=1e-12)

def test_spectral_shifted_solve_commutes_with_apply():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 64)
    op, _ = ops.assemble_example3(g)
    rng = np.random.default_rng(11)
    r = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    sigma = 2.5
    u = op.shifted_solve(0.0, sigma, r)
    residual = sigma * u + op.apply(0.0, u) - r
    assert np.max(np.abs(residual)) < 1e-12 * np.max(np.abs(r))

def test_spectral_requires_periodic_grid():
    g = ops.dirichlet_grid((0.0, 1.0), 16)
    with pytest.raises(ConfigError):
        ops.assemble_example3(g)
    with pytest.raises(ConfigError):
        ops.assemble_example4(g)

def test_spectral_rejects_negative_symbol():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 16)
    with pytest.raises(CoercivityError):
        ops.SpectralDiagonalOperator(g, -np.ones(16))

def test_spectral_rejects_complex_symbol():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 16)
    with pytest.raises(UnsupportedOperationError):
        ops.SpectralDiagonalOperator(g, np.ones(16) + 0j)


# ------------------------------------------------------ nonlinear terms


def test_zero_term_and_dropped_parts():
    g = ops.dirichlet_grid((0.0, 1.0), 12)
    _, term = ops.assemble_example1(g, 1.0, 0.0, f=None, g=None)
    out = term.evaluate(0.0, np.random.default_rng(0).standard_normal(12))
    assert np.max(np.abs(out)) == 0.0

def test_cubic_sink_default():
    g = ops.dirichlet_grid((0.0, 1.0), 12)
    _, term = ops.assemble_example1(g, 1.0, 0.0, g=None)
    v = np.linspace(0.1, 0.9, 12)
    np.testing.assert_allclose(term.evaluate(0.0, v), -(v**3), rtol=1e-14)

def test_divergence_of_flux_periodic_oracle():
    # g(u) = e^u with u = sin(x): div g = cos(x) e^{sin x}; centered
    # differences converge at second order on the torus
    errs = []
    for M in (64, 128):
        g = ops.periodic_grid((0.0, 2.0 * np.pi), M)
        x = g.axis_nodes(0)
        term = ops.DivergenceFormTerm(g, f=None, g=lambda v, x_, t: np.exp(v))
        u = np.sin(x)
        exact = np.cos(x) * np.exp(np.sin(x))
        errs.append(np.max(np.abs(term.evaluate(0.0, u) - exact)))
    assert errs[0] / errs[1] > 3.5

def test_divergence_flux_dirichlet_uses_boundary_extension():
    # u vanishing at the boundary: padded values supply g(0) there, so
    # the interior divergence is still second-order accurate
    errs = []
    for M in (63, 127):
        g = ops.dirichlet_grid((0.0, 1.0), M)
        x = g.axis_nodes(0)
        term = ops.DivergenceFormTerm(g, f=None, g=lambda v, x_, t: v**2 / 2.0)
        u = np.sin(np.pi * x)
        exact = np.sin(np.pi * x) * np.pi * np.cos(np.pi * x)
        errs.append(np.max(np.abs(term.evaluate(0.0, u) - exact)))
    assert errs[0] / errs[1] > 3.5

def test_gradient_drag_default_oracle():
    # f(u, p) = -|p|^4 u with u = sin x: exact value -cos^4(x) sin(x)
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 256)
    x = g.axis_nodes(0)
    _, term = ops.assemble_example2(g, 1.0, 0.0)
    u = np.sin(x)
    exact = -np.cos(x) ** 4 * np.sin(x)
    err = np.max(np.abs(term.evaluate(0.0, u) - exact))
    assert err < 5e-3  # centered-difference gradient, second order

def test_gradient_form_one_sided_boundary_converges():
    # Dirichlet: gradient handed to f must be second order including
    # near the boundary
    errs = []
    for M in (63, 127):
        g = ops.dirichlet_grid((0.0, 1.0), M)
        x = g.axis_nodes(0)
        term = ops.GradientFormTerm(g, f=lambda v, p, x_, t: p)
        u = np.sin(np.pi * x)
        exact = np.pi * np.cos(np.pi * x)
        errs.append(np.max(np.abs(term.evaluate(0.0, u) - exact)))
    assert errs[0] / errs[1] > 3.5

def test_pointwise_expm1_default():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 16)
    _, term = ops.assemble_example3(g)
    v = np.linspace(-1.0, 1.0, 16)
    np.testing.assert_allclose(term.evaluate(0.0, v), np.expm1(v), rtol=1e-14)

def test_laplacian_of_double_well_sympy_oracle():
    # B(u) = Laplacian(u^3 - u) with u = sin x, reference via sympy
    xs = sympy.symbols("x")
    expr = sympy.diff(sympy.sin(xs) ** 3 - sympy.sin(xs), xs, 2)
    ref = sympy.lambdify(xs, expr, "numpy")
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 64)
    x = g.axis_nodes(0)
    _, term = ops.assemble_example4(g)
    out = term.evaluate(0.0, np.sin(x))
    np.testing.assert_allclose(out.real, ref(x), atol=1e-10)
    assert np.max(np.abs(out.imag)) < 1e-12

def test_scaled_sum_term_combines_linearly():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 16)
    t1 = ops.PointwiseTerm(g, lambda u: u**3)
    t2 = ops.PointwiseTerm(g, np.expm1)
    combo = ops.ScaledSumTerm([(2.0, t1), (-1.0, t2)])
    v = np.linspace(-0.5, 0.5, 16)
    np.testing.assert_allclose(
        combo.evaluate(0.0, v), 2.0 * v**3 - np.expm1(v), rtol=1e-13
    )

def test_scaled_sum_rejects_empty():
    with pytest.raises(DomainError):
        ops.ScaledSumTerm([])

def test_tube_radius_is_plain_metadata():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 16)
    term = ops.PointwiseTerm(g, np.expm1, tube_radius=0.5)
    assert term.tube_radius == 0.5
    big = np.full(16, 100.0)
    term.evaluate(0.0, big)  # nothing enforces the radius


# ------------------------------------------------------ hermitian parts


def test_hermitian_parts_reassemble_exactly():
    g = ops.dirichlet_grid((0.0, 1.0), 20)
    op = ops.SparseDiffusionOperator(
        g, lambda x, t: 1.0 + 0.3 * x, lambda x, t: 0.5 - 0.2 * x
    )
    sym, skew = ops.hermitian_parts(op, 0.0)
    total = (sym + skew).toarray()
    np.testing.assert_allclose(total, op.assemble(0.0).toarray(), atol=1e-15)
    s = sym.toarray()
    k = skew.toarray()
    np.testing.assert_allclose(s, s.conj().T, atol=1e-15)
    np.testing.assert_allclose(k, -k.conj().T, atol=1e-15)

def test_hermitian_part_positive_definite():
    g = ops.dirichlet_grid((0.0, 1.0), 20)
    op = ops.SparseDiffusionOperator(g, 1.0, 0.8)
    sym, _ = ops.hermitian_parts(op, 0.0)
    assert np.linalg.eigvalsh(sym.toarray()).min() > 0.0

def test_spectral_hermitian_parts_trivial():
    g = ops.periodic_grid((0.0, 2.0 * np.pi), 16)
    op, _ = ops.assemble_example3(g)
    sym, skew = ops.hermitian_parts(op, 0.0)
    np.testing.assert_allclose(sym.diagonal(), op.symbol, atol=0.0)
    assert skew.nnz == 0


# ----------------------------------------- cross-module sanity


def test_stability_constant_bounded_by_coefficient_ratio():
    # matrix constant never exceeds the pointwise coefficient bound
    from imexbdf.stability import coefficient_lambda

    g = ops.dirichlet_grid((0.0, 1.0), 30)
    x = g.axis_nodes(0)
    a_fn = lambda xx, t: 2.0 + np.sin(3 * xx)
    b_fn = lambda xx, t: np.cos(2 * xx)
    op = ops.SparseDiffusionOperator(g, a_fn, b_fn)
    lam_matrix = stability_constant(op.assemble(0.0).toarray())
    mids = np.linspace(0.0, 1.0, 257)
    lam_coeff = coefficient_lambda(a_fn(mids, 0.0), b_fn(mids, 0.0)).value
    assert lam_matrix <= lam_coeff + 1e-3
