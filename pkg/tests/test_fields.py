import numpy as np
import pytest

from sharprem.errors import CollarError, DomainError
from sharprem.grid import GridFunction, build_box_domain, integrate, integrate_values
from sharprem.fields import (
    FDOperators,
    VectorFieldFamily,
    VectorGridFunction,
    apply_field,
    apply_gradient,
    apply_L_power,
    apply_sublaplacian,
    divergence,
    euclidean,
    family_from_tables,
    heisenberg,
)
from sharprem.trials import bump_product, random_bump_product


def test_centered_difference_exact_on_quadratics():
    d = build_box_domain(0.0, 1.0, 65)
    u = GridFunction.from_callable(d, lambda x: x**2)
    g = apply_field(euclidean(1), 0, u)
    x = d.axes()[0]
    assert np.abs((g.values - 2 * x)[d.interior_mask]).max() == 0.0


def test_annihilates_constants_exactly():
    for d, fam in [
        (build_box_domain(0.0, 1.0, 17), euclidean(1)),
        (build_box_domain((0, 0, 0), (1, 1, 1), (9, 9, 9)), heisenberg()),
    ]:
        u = GridFunction(d, np.full(d.shape, 3.7))
        for k in range(fam.n_fields):
            g = apply_field(fam, k, u)
            assert np.abs(g.values).max() == 0.0


def test_heisenberg_on_linear_coordinates():
    d = build_box_domain((0, 0, 0), (1, 1, 1), (9, 9, 9))
    fam = heisenberg()
    X, Y, T = d.meshgrid()
    # X1 t = -y/2 (stencil exact on linears)
    g = apply_field(fam, 0, GridFunction(d, T))
    assert np.abs((g.values + Y / 2)[d.interior_mask]).max() < 1e-14
    # gradient of x is (1, 0)
    gx = apply_gradient(fam, GridFunction(d, X))
    assert np.abs((gx[0].values - 1.0)[d.interior_mask]).max() < 1e-14
    assert np.abs(gx[1].values[d.interior_mask]).max() == 0.0


def test_gradient_converges_second_order_2d():
    # oracle: d/dx sin(pi x) sin(pi y) = pi cos(pi x) sin(pi y)
    errs = []
    for n in (33, 65):
        d = build_box_domain((0, 0), (1, 1), (n, n))
        u = GridFunction.from_callable(d, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
        g = apply_field(euclidean(2), 0, u)
        X, Y = d.meshgrid()
        exact = np.pi * np.cos(np.pi * X) * np.sin(np.pi * Y)
        errs.append(np.abs((g.values - exact)[d.interior_mask]).max())
    assert errs[0] / errs[1] >= 3.0


def test_sublaplacian_converges_second_order_1d():
    errs = []
    for n in (65, 129):
        d = build_box_domain(0.0, 1.0, n)
        u = GridFunction.from_callable(d, lambda x: np.sin(np.pi * x))
        lu = apply_sublaplacian(euclidean(1), u)
        exact = -np.pi**2 * u.values
        deep = d.interior_depth() >= 2
        errs.append(np.abs((lu.values - exact)[deep]).max())
    assert errs[0] / errs[1] >= 3.0


def test_heisenberg_sublaplacian_on_x2_plus_y2():
    # hand expansion: L(x^2 + y^2) = X1(2x) + X2(2y) = 2 + 2 = 4, cross
    # terms vanish because dt u = 0; stencils exact on quadratics
    d = build_box_domain((0, 0, 0), (1, 1, 1), (17, 17, 17))
    u = GridFunction.from_callable(d, lambda x, y, t: x**2 + y**2)
    lu = apply_sublaplacian(heisenberg(), u)
    deep = d.interior_depth() >= 2
    assert np.abs(lu.values[deep] - 4.0).max() < 1e-11


def test_l_power_identity_and_composition():
    d = build_box_domain(0.0, 1.0, 65)
    u = bump_product(d)
    assert np.array_equal(apply_L_power(euclidean(1), u, 0).values, u.values)
    l2 = apply_L_power(euclidean(1), u, 2)
    ll = apply_sublaplacian(euclidean(1), apply_sublaplacian(euclidean(1), u))
    assert np.array_equal(l2.values, ll.values)


def test_l_power_fd_second_order():
    # oracle: L^2 sin(pi x) = pi^4 sin(pi x)
    errs = []
    for n in (129, 257):
        d = build_box_domain(0.0, 1.0, n)
        u = GridFunction.from_callable(d, lambda x: np.sin(np.pi * x))
        l2 = apply_L_power(euclidean(1), u, 2)
        deep = d.interior_depth() >= 4
        exact = np.pi**4 * u.values
        errs.append(np.abs((l2.values - exact)[deep]).max())
    assert errs[0] / errs[1] >= 3.0


def test_divergence_of_zero():
    d = build_box_domain((0, 0), (1, 1), (17, 17))
    F = VectorGridFunction(
        (GridFunction(d, np.zeros(d.shape)), GridFunction(d, np.zeros(d.shape)))
    )
    assert np.abs(divergence(euclidean(2), F).values).max() == 0.0


def test_divergence_theorem_telescopes_exactly(rng):
    # compactly supported components: the flux integral telescopes to zero
    d = build_box_domain(0.0, 1.0, 129)
    f = random_bump_product(d, rng)
    F = VectorGridFunction((f,))
    total = integrate(divergence(euclidean(1), F))
    scale = integrate(GridFunction(d, np.abs(f.values)))
    assert abs(total) <= 1e-13 * max(scale, 1.0)


def test_heisenberg_divergence_telescopes_exactly(rng):
    d = build_box_domain((0, 0, 0), (1, 1, 1), (17, 17, 17))
    F = VectorGridFunction(
        (random_bump_product(d, rng), random_bump_product(d, rng))
    )
    total = integrate(divergence(heisenberg(), F))
    assert abs(total) <= 1e-14


@pytest.mark.parametrize("family_name", ["euclidean", "heisenberg"])
def test_integration_by_parts_coefficient_divergence_free(family_name, rng):
    if family_name == "euclidean":
        d = build_box_domain(0.0, 1.0, 129)
        fam = euclidean(1)
    else:
        d = build_box_domain((0, 0, 0), (1, 1, 1), (17, 17, 17))
        fam = heisenberg()
    ops = FDOperators(d, fam)
    f = random_bump_product(d, rng)
    g = random_bump_product(d, rng)
    nf = np.sqrt(integrate(f * f))
    ng = np.sqrt(integrate(g * g))
    for k in range(fam.n_fields):
        lhs = integrate_values(d, f.values * ops.field_values(k, g.values))
        rhs = integrate_values(d, g.values * ops.field_values(k, f.values))
        assert abs(lhs + rhs) <= 1e-11 * nf * ng


def test_integration_by_parts_with_divergence_correction():
    # X = x d/dx has coefficient divergence 1; the corrected pairing
    # |int f Xg + int g Xf + int f g| must vanish at second order
    fam = VectorFieldFamily("dilation", 1, (((lambda x: x),),))
    errs = []
    for n in (65, 129):
        d = build_box_domain(0.0, 1.0, n)
        ops = FDOperators(d, fam)
        f = bump_product(d)
        g = GridFunction(d, f.values * np.cos(2 * np.pi * d.axes()[0]))
        total = integrate_values(
            d,
            f.values * ops.field_values(0, g.values)
            + g.values * ops.field_values(0, f.values)
            + f.values * g.values,
        )
        errs.append(abs(total))
    assert errs[0] / errs[1] >= 3.0


def test_linearity_machine_precision(rng):
    d = build_box_domain((0, 0), (1, 1), (17, 17))
    ops = FDOperators(d, euclidean(2))
    u = rng.standard_normal(d.shape)
    v = rng.standard_normal(d.shape)
    left = ops.field_values(0, 2.0 * u + 0.5 * v)
    right = 2.0 * ops.field_values(0, u) + 0.5 * ops.field_values(0, v)
    assert np.allclose(left, right, rtol=0, atol=1e-12)


def test_backend_agreement_on_l_power():
    # FD and sine-spectral agree to second order on compactly supported data
    from sharprem.spectral import SpectralOperators

    errs = {1: [], 2: []}
    for n in (65, 129):
        d = build_box_domain(0.0, 1.0, n)
        fd = FDOperators(d, euclidean(1))
        sp = SpectralOperators(d)
        u = bump_product(d)
        for j in (1, 2):
            a = fd.l_power_values(u.values, j)
            b = sp.l_power_values(u.values, j)
            errs[j].append(np.abs(a - b)[d.interior_depth() >= 2 * j].max())
    for j in (1, 2):
        assert errs[j][0] / errs[j][1] >= 3.0


def test_field_index_out_of_range():
    d = build_box_domain(0.0, 1.0, 17)
    u = GridFunction(d, np.zeros(d.shape))
    with pytest.raises(DomainError):
        apply_field(euclidean(1), 1, u)


def test_domain_mismatch_rejected():
    d1 = build_box_domain(0.0, 1.0, 17)
    d2 = build_box_domain(0.0, 1.0, 33)
    ops = FDOperators(d1, euclidean(1))
    with pytest.raises(DomainError):
        ops.field(0, GridFunction(d2, np.zeros(d2.shape)))


def test_collar_contract_enforced_for_tagged_functions():
    d = build_box_domain(0.0, 1.0, 33)
    thin = GridFunction.compactly_supported(d, np.ones(d.shape), collar=1)
    with pytest.raises(CollarError):
        apply_L_power(euclidean(1), thin, 2)


def test_family_from_tables_matches_callable_family():
    d = build_box_domain((0, 0, 0), (1, 1, 1), (9, 9, 9))
    X, Y, T = d.meshgrid()
    tables = [
        (np.ones(d.shape), None, -Y / 2),
        (None, np.ones(d.shape), X / 2),
    ]
    fam = family_from_tables("heisenberg_tabulated", d, tables)
    u = GridFunction(d, np.sin(np.pi * X) * Y * T)
    for k in range(2):
        a = apply_field(fam, k, u)
        b = apply_field(heisenberg(), k, u)
        assert np.allclose(a.values, b.values, rtol=0, atol=1e-13)
