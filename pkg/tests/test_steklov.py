import numpy as np
import pytest

from sharprem.errors import CollarError, DomainError, PositivityError
from sharprem.grid import GridFunction, build_box_domain, integrate_values
from sharprem.fields import FDOperators, euclidean
from sharprem.spectral import SpectralOperators
from sharprem.eigensolve import analytic_box_ground_state, eigenpair_from_values, ground_state
from sharprem.steklov import (
    base_identity,
    even_identity,
    integrated_remainder,
    odd_identity,
    proportionality_defect,
    steklov_constant_check,
)
from sharprem.trials import bump_product, sine_sum

FIVE_MODES = ([1, 2, 3, 4, 5], [0.3, 0.15, 0.1, -0.08, 0.05])


@pytest.fixture(scope="module")
def spectral_setup(interval_257, analytic_pair_257):
    sp = SpectralOperators(interval_257)
    u = sine_sum(interval_257, *FIVE_MODES)
    return interval_257, sp, analytic_pair_257, u


@pytest.mark.parametrize("m,parity", [(1, "even"), (2, "even"), (0, "odd"), (1, "odd")])
def test_spectral_residuals_at_machine_level(spectral_setup, m, parity):
    d, sp, eig, u = spectral_setup
    fn = even_identity if parity == "even" else odd_identity
    rep = fn(u, eig, sp, m)
    assert rep.residual_norm <= 1e-8
    assert rep.excluded_nodes == 0


def test_base_identity_is_odd_m0_term_for_term(spectral_setup):
    d, sp, eig, u = spectral_setup
    a = base_identity(u, eig, sp)
    b = odd_identity(u, eig, sp, 0)
    assert [t.name for t in a.rhs_terms] == [t.name for t in b.rhs_terms]
    assert np.array_equal(a.lhs.values, b.lhs.values)
    for ta, tb in zip(a.rhs_terms, b.rhs_terms):
        assert np.array_equal(ta.values, tb.values)


def test_equality_case_square_terms_vanish(spectral_setup):
    d, sp, eig, _ = spectral_setup
    u = GridFunction(d, 2.0 * eig.eigenfunction.values)
    rep = even_identity(u, eig, sp, 1)
    for t in rep.terms_of_kind("square_X"):
        assert np.abs(t.values).max() < 1e-20
    rem = integrated_remainder(u, eig, sp, 1, "even")
    assert abs(rem.remainder) <= 1e-6 * eig.eigenvalue**2 * 4.0


def test_perturbed_equality_case_strictly_positive(spectral_setup):
    d, sp, eig, _ = spectral_setup
    u = GridFunction(d, eig.eigenfunction.values + 0.1 * np.sin(2 * np.pi * d.axes()[0]))
    for m, parity in [(1, "even"), (0, "odd"), (1, "odd")]:
        rem = integrated_remainder(u, eig, sp, m, parity)
        assert rem.remainder >= 1e-3 * abs(rem.lhs_integral)


def test_fd_residual_second_order(fd_pairs_1d):
    for m, parity in [(1, "even"), (1, "odd")]:
        residuals = []
        for n in (65, 129, 257):
            d, eig = fd_pairs_1d[n]
            fd = FDOperators(d, euclidean(1))
            fn = even_identity if parity == "even" else odd_identity
            residuals.append(fn(bump_product(d), eig, fd, m).residual_norm)
        orders = [np.log2(residuals[i] / residuals[i + 1]) for i in range(2)]
        assert all(1.7 <= o <= 2.3 for o in orders), (parity, m, orders)


def test_richardson_halving_of_base_identity_on_pi_interval():
    # spec-style fixture: interval (0, pi), phi = sin x, lambda = 1
    residuals = []
    for n in (129, 257, 513):
        d = build_box_domain(0.0, np.pi, n)
        ops = FDOperators(d, euclidean(1))
        pair = eigenpair_from_values(d, 1.0, np.sin(d.axes()[0]), ops)
        bump = bump_product(d)
        u = GridFunction(d, np.sin(d.axes()[0]) ** 2 * bump.values, collar=bump.collar)
        residuals.append(base_identity(u, pair, ops).residual_norm)
    for a, b in zip(residuals, residuals[1:]):
        assert a / b >= 3.0


def test_phi_scaling_leaves_terms_bit_identical(spectral_setup):
    d, sp, eig, u = spectral_setup
    rep = even_identity(u, eig, sp, 1)
    for c in (2.0, 0.5, 4.0):  # powers of two scale exactly
        from sharprem.eigensolve import EigenPair

        scaled = EigenPair(
            eig.eigenvalue,
            GridFunction(d, c * eig.eigenfunction.values),
            eig.residual_norm,
            c * eig.positivity_margin,
        )
        rep_c = even_identity(u, scaled, sp, 1)
        for t, tc in zip(rep.rhs_terms, rep_c.rhs_terms):
            assert np.array_equal(t.values, tc.values), t.name


def test_u_scaling_covariance_exact(spectral_setup):
    d, sp, eig, u = spectral_setup
    rep1 = even_identity(u, eig, sp, 1)
    rep2 = even_identity(GridFunction(d, 2.0 * u.values), eig, sp, 1)
    assert np.array_equal(rep2.lhs.values, 4.0 * rep1.lhs.values)
    for t1, t2 in zip(rep1.rhs_terms, rep2.rhs_terms):
        assert np.array_equal(t2.values, 4.0 * t1.values), t1.name
    assert np.array_equal(rep2.residual.values, 4.0 * rep1.residual.values)


def test_square_terms_pointwise_nonnegative(spectral_setup, fd_pairs_1d):
    d, sp, eig, u = spectral_setup
    reports = [even_identity(u, eig, sp, 2), odd_identity(u, eig, sp, 1)]
    dfd, eigfd = fd_pairs_1d[129]
    fd = FDOperators(dfd, euclidean(1))
    reports.append(even_identity(bump_product(dfd), eigfd, fd, 2))
    for rep in reports:
        for t in rep.terms_of_kind("square_L", "square_X"):
            assert t.values.min() >= -1e-12, t.name


def test_inductive_telescoping_structure(spectral_setup):
    # subtracting lambda^2 times the order-1 report from the order-2 report
    # leaves exactly the j=1 block, to machine precision
    d, sp, eig, u = spectral_setup
    lam = eig.eigenvalue
    r1 = even_identity(u, eig, sp, 1)
    r2 = even_identity(u, eig, sp, 2)
    diff_rhs = r2.rhs_sum() - lam**2 * r1.rhs_sum()
    j1 = (
        r2.term("square_L_j1").values
        + r2.term("square_X_j1").values
        + r2.term("divergence_j1").values
    )
    scale = np.abs(r2.rhs_sum()).max()
    assert np.abs(diff_rhs - j1).max() <= 1e-12 * scale
    # j = 0 block of order 2 is bit-exactly lambda^2 times the order-1 block
    for name in ("square_L_j0", "square_X_j0", "divergence_j0"):
        a = r2.term(name).values
        b = r1.term(name).values
        rel = np.abs(a - lam**2 * b).max() / max(np.abs(a).max(), 1e-300)
        assert rel <= 1e-12, name
    # lhs difference reduces to (L^2 u)^2 - lambda^2 (L u)^2
    lhs_expected = sp.l_power_values(u.values, 2) ** 2 - lam**2 * sp.l_power_values(u.values, 1) ** 2
    lhs_expected[~d.interior_mask] = 0.0
    diff_lhs = r2.lhs.values - lam**2 * r1.lhs.values
    assert np.abs(diff_lhs - lhs_expected).max() <= 1e-12 * np.abs(lhs_expected).max()


def test_equality_characterization(spectral_setup):
    d, sp, eig, u = spectral_setup
    u_prop = GridFunction(d, 3.0 * eig.eigenfunction.values)
    assert proportionality_defect(u_prop, eig.eigenfunction) < 1e-12
    rem = integrated_remainder(u_prop, eig, sp, 1, "even")
    assert abs(rem.remainder) < 1e-9 * abs(rem.lhs_integral)
    assert proportionality_defect(u, eig.eigenfunction) > 1e-2
    rem_u = integrated_remainder(u, eig, sp, 1, "even")
    assert rem_u.remainder > 1e-3 * abs(rem_u.lhs_integral)


def test_divergence_totals_zero_for_collared_data(fd_pairs_1d):
    d, eig = fd_pairs_1d[129]
    fd = FDOperators(d, euclidean(1))
    rem = integrated_remainder(bump_product(d), eig, fd, 2, "even")
    scale = max(abs(rem.lhs_integral), abs(rem.scaled_mass))
    assert abs(rem.divergence_total) <= 1e-12 * scale


def test_divergence_totals_converge_without_collar():
    # boundary-vanishing sine data: the flux integral is an honest O(h^3)
    totals = []
    for n in (65, 129, 257):
        d = build_box_domain(0.0, 1.0, n)
        eig = analytic_box_ground_state(d)
        fd = FDOperators(d, euclidean(1))
        u = sine_sum(d, *FIVE_MODES)
        rem = integrated_remainder(u, eig, fd, 1, "even", allow_thin_support=True)
        totals.append(abs(rem.divergence_total))
    orders = [np.log2(totals[i] / totals[i + 1]) for i in range(2)]
    assert all(o >= 1.7 for o in orders), orders


def test_m_limits_per_backend(spectral_setup, fd_pairs_1d):
    d, sp, eig, u = spectral_setup
    with pytest.raises(DomainError):
        even_identity(u, eig, sp, 4)
    dfd, eigfd = fd_pairs_1d[65]
    fd = FDOperators(dfd, euclidean(1))
    with pytest.raises(DomainError):
        even_identity(bump_product(dfd), eigfd, fd, 3)


def test_collar_too_thin_raises(fd_pairs_1d):
    d, eig = fd_pairs_1d[65]
    fd = FDOperators(d, euclidean(1))
    u = sine_sum(d, [1, 2], [1.0, 0.5])  # no collar
    with pytest.raises(CollarError):
        even_identity(u, eig, fd, 2)


def test_positivity_floor_violation_raises(fd_pairs_1d):
    d, eig = fd_pairs_1d[65]
    fd = FDOperators(d, euclidean(1))
    from sharprem.eigensolve import EigenPair

    # a phi that is zero on half the domain cannot support u living there
    bad_phi = np.where(d.axes()[0] < 0.5, np.sin(np.pi * d.axes()[0]), 0.0)
    bad = EigenPair(np.pi**2, GridFunction(d, bad_phi), 1.0, 0.0)
    with pytest.raises(PositivityError):
        base_identity(bump_product(d), bad, fd)


def test_excluded_nodes_reported(fd_pairs_1d):
    # phi dips below the floor at a few nodes away from u's support:
    # evaluation proceeds and reports the exclusions
    d, eig = fd_pairs_1d[129]
    fd = FDOperators(d, euclidean(1))
    from sharprem.eigensolve import EigenPair

    phi = np.sin(np.pi * d.axes()[0]).copy()
    phi[1] = 0.0
    phi[-2] = 0.0
    dipped = EigenPair(np.pi**2, GridFunction(d, phi), 1.0, 0.0)
    rep = base_identity(bump_product(d), dipped, fd)
    assert rep.excluded_nodes == 2


def test_constant_check_sharpness(interval_513, fd_pair_513):
    result = steklov_constant_check(
        interval_513, euclidean(1), fd_pair_513, trials=100, seed=0
    )
    assert result["max_ratio"] <= result["sharp_constant"] + 1e-3
    assert result["ground_state_gap"] <= 1e-3


def test_ground_state_ratio_approaches_inverse_pi():
    # the interior quadrature of |Xu|^2 misses an O(h) boundary strip, so
    # hitting 1/pi to 1e-3 takes a finer grid than the sharpness check
    d = build_box_domain(0.0, 1.0, 2049)
    eig = ground_state(d, euclidean(1))
    result = steklov_constant_check(d, euclidean(1), eig, trials=1, seed=0)
    assert result["ground_state_ratio"] == pytest.approx(1 / np.pi, rel=1e-3)


def test_constant_check_second_mode_ratio(interval_513, fd_pair_513):
    # oracle: ||sin 2 pi x|| / ||(sin 2 pi x)'|| = 1/(2 pi)
    from sharprem.grid import integrate_values as iv

    d = interval_513
    fd = FDOperators(d, euclidean(1))
    u = np.sin(2 * np.pi * d.axes()[0])
    unorm = np.sqrt(iv(d, u**2))
    xnorm = np.sqrt(iv(d, np.sum([g**2 for g in fd.gradient_values(u)], axis=0)))
    assert unorm / xnorm == pytest.approx(1 / (2 * np.pi), rel=1e-2)
    assert unorm / xnorm < 1 / np.pi
