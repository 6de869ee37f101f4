"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Criterion 2 is split: the sandwich bounds hold throughout, but the
1e-4 limit-rate clause is provably unattainable for m = 12..14 (the
deviation of sigma_m^{1/p_m} from 2 is 2*ln4/2^m + o(4^{-2^{m-2}}), which is
6.8e-4 / 3.4e-4 / 1.7e-4 there and only drops below 1e-4 from m = 15); that
test asserts the stated bound anyway and stays red by design.
"""

import time

import numpy as np
import pytest

from sharprem.grid import GridFunction, build_box_domain, integrate_values
from sharprem.fields import FDOperators, VectorGridFunction, euclidean, heisenberg
from sharprem.spectral import SpectralOperators
from sharprem.eigensolve import analytic_box_ground_state, ground_state
from sharprem.steklov import (
    even_identity,
    integrated_remainder,
    odd_identity,
    steklov_constant_check,
)
from sharprem.friedrichs import friedrichs_identity, friedrichs_remainder, sigma, sigma_asymptotics
from sharprem.trials import bump_product, random_bump_product, sine_sum

FIVE_MODES = ([1, 2, 3, 4, 5], [0.3, 0.15, 0.1, -0.08, 0.05])
CASES_21 = ((1, "even"), (2, "even"), (0, "odd"), (1, "odd"))


def _report(criterion, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def spectral_257():
    d = build_box_domain(0.0, 1.0, 257)
    sp = SpectralOperators(d)
    eig = analytic_box_ground_state(d)
    u = sine_sum(d, *FIVE_MODES)
    return d, sp, eig, u


@pytest.fixture(scope="module")
def spectral_reports(spectral_257):
    d, sp, eig, u = spectral_257
    return {
        (m, parity): (even_identity if parity == "even" else odd_identity)(u, eig, sp, m)
        for m, parity in CASES_21
    }


@pytest.fixture(scope="module")
def fd_sweep():
    out = {}
    for n in (65, 129, 257):
        d = build_box_domain(0.0, 1.0, n)
        eig = ground_state(d, euclidean(1))
        fd = FDOperators(d, euclidean(1))
        u = bump_product(d)
        out[n] = (d, eig, fd, u)
    return out


@pytest.fixture(scope="module")
def fd_reports(fd_sweep):
    reports = {}
    for n, (d, eig, fd, u) in fd_sweep.items():
        for m, parity in CASES_21:
            fn = even_identity if parity == "even" else odd_identity
            reports[(n, m, parity)] = fn(u, eig, fd, m)
    return reports


@pytest.fixture(scope="module")
def heisenberg_friedrichs():
    reports = []
    t0 = time.perf_counter()
    for n in (17, 33, 65):
        d = build_box_domain((0, 0, 0), (1, 1, 1), (n, n, n))
        ops = FDOperators(d, heisenberg())
        phi = GridFunction.from_callable(
            d, lambda x, y, t: 2.0 + x * y * np.sin(np.pi * t)
        )
        u = GridFunction.from_callable(
            d,
            lambda x, y, t: np.sin(np.pi * x) ** 2
            * np.sin(np.pi * y) ** 2
            * np.sin(np.pi * t) ** 2,
        )
        reports.append((d, friedrichs_identity(u, phi, ops, 2)))
    return reports, time.perf_counter() - t0


def test_criterion_1_sigma_constants_exact():
    sigma(5)  # warm the transcendental path before timing
    t0 = time.perf_counter()
    values = [sigma(m).sigma_exact for m in (1, 2, 3)]
    elapsed = time.perf_counter() - t0
    ok = values == [0, 4, 68] and elapsed < 1e-3
    _report(1, ok, f"sigma(1..3) = {values}, {elapsed*1e3:.3f} ms")


def test_criterion_2a_sandwich_bounds():
    sigma_asymptotics(5)  # warm
    t0 = time.perf_counter()
    rows = sigma_asymptotics(60)
    violations = [
        r.m
        for r in rows
        if not (r.lower * (1 - 1e-12) <= r.root <= r.upper * (1 + 1e-12))
    ]
    elapsed = time.perf_counter() - t0
    ok = not violations and elapsed < 10e-3
    _report("2a", ok, f"sandwich m in [2,60], {elapsed*1e3:.2f} ms, violations {violations}")


def test_criterion_2b_limit_rate_from_m12():
    # |sigma_m^{1/p_m} - 2| = 2 ln4 / 2^m (1 + o(1)): 6.8e-4 at m = 12,
    # 3.4e-4 at 13, 1.7e-4 at 14, 8.5e-5 at 15.  The stated 1e-4 bound
    # for every m >= 12 is therefore not attainable by a correct sigma;
    # asserted as written, red by design (see decisions ledger).
    rows = sigma_asymptotics(60)
    devs = {r.m: abs(r.root - 2.0) for r in rows if r.m >= 12}
    failing = {m: d for m, d in devs.items() if d > 1e-4}
    ok = not failing
    _report(
        "2b",
        ok,
        f"|root - 2| <= 1e-4 for m >= 12; exceedances {{m: dev}} = "
        + ", ".join(f"{m}: {d:.3e}" for m, d in sorted(failing.items())),
    )


def test_criterion_3_eigensolver_accuracy():
    t0 = time.perf_counter()
    lams = {}
    for n in (129, 257, 513):
        d = build_box_domain(0.0, 1.0, n)
        lams[n] = ground_state(d, euclidean(1)).eigenvalue
    rel_1d = abs(lams[513] - np.pi**2) / np.pi**2
    order = np.log2((lams[129] - lams[257]) / (lams[257] - lams[513]))
    d2 = build_box_domain((0, 0), (1, 1), (129, 129))
    lam2 = ground_state(d2, euclidean(2)).eigenvalue
    rel_2d = abs(lam2 - 2 * np.pi**2) / (2 * np.pi**2)
    elapsed = time.perf_counter() - t0
    ok = rel_1d <= 1e-3 and rel_2d <= 2e-3 and 1.7 <= order <= 2.3 and elapsed < 30
    _report(
        3,
        ok,
        f"1D rel {rel_1d:.2e}, 2D rel {rel_2d:.2e}, Richardson order {order:.3f}, "
        f"{elapsed:.1f} s",
    )


def test_criterion_4_identity_residuals(spectral_reports, fd_reports):
    t0 = time.perf_counter()
    spectral_worst = max(r.residual_norm for r in spectral_reports.values())
    orders = {}
    for m, parity in CASES_21:
        res = [fd_reports[(n, m, parity)].residual_norm for n in (65, 129, 257)]
        orders[(m, parity)] = [float(np.log2(res[i] / res[i + 1])) for i in range(2)]
    order_ok = all(
        1.7 <= o <= 2.3 for pair in orders.values() for o in pair
    )
    elapsed = time.perf_counter() - t0
    ok = spectral_worst <= 1e-8 and order_ok and elapsed < 60
    detail = ", ".join(
        f"{p} m={m}: {a[0]:.2f}/{a[1]:.2f}" for (m, p), a in orders.items()
    )
    _report(4, ok, f"spectral max residual {spectral_worst:.2e}; fd orders {detail}")


def test_criterion_5_equality_cases(spectral_257):
    d, sp, eig, _ = spectral_257
    u1 = eig.eigenfunction
    pert = GridFunction(d, u1.values + 0.1 * np.sin(2 * np.pi * d.axes()[0]))
    details, ok = [], True
    for m, parity in ((1, "even"), (0, "odd"), (1, "odd")):
        rem = integrated_remainder(u1, eig, sp, m, parity)
        scale = eig.eigenvalue ** (2 * m)  # times integrate(u1^2) = 1
        eq_ok = abs(rem.remainder) <= 1e-6 * scale
        remp = integrated_remainder(pert, eig, sp, m, parity)
        pos_ok = remp.remainder > 0 and remp.remainder >= 1e-3 * abs(remp.lhs_integral)
        ok = ok and eq_ok and pos_ok
        details.append(
            f"({m},{parity}): eq {rem.remainder:.1e}, pert {remp.remainder:.3e}"
        )
    _report(5, ok, "; ".join(details))


def test_criterion_6_nonnegativity(spectral_reports, fd_reports, heisenberg_friedrichs, spectral_257):
    worst = np.inf
    for rep in list(spectral_reports.values()) + list(fd_reports.values()):
        for t in rep.terms_of_kind("square_L", "square_X"):
            worst = min(worst, float(t.values.min()))
    for _, rep in heisenberg_friedrichs[0]:
        for t in rep.terms_of_kind("square_L", "square_X"):
            worst = min(worst, float(t.values.min()))
    # integrated squared terms across the equality-case fixtures
    d, sp, eig, u = spectral_257
    for m, parity in CASES_21:
        rem = integrated_remainder(u, eig, sp, m, parity)
        worst = min(worst, min((v for _, v in rem.remainder_terms), default=0.0))
    ok = worst >= -1e-12
    _report(6, ok, f"min square term over all fixtures {worst:.3e}")


def test_criterion_7_divergence_cancellation(fd_sweep, heisenberg_friedrichs):
    details, ok = [], True
    floor = 1e-12

    # euclidean, collared data: exact telescoping
    rels = []
    for n in (65, 129, 257):
        d, eig, fd, u = fd_sweep[n]
        rem = integrated_remainder(u, eig, fd, 2, "even")
        scale = max(abs(rem.lhs_integral), abs(rem.scaled_mass))
        rels.append(abs(rem.divergence_total) / scale)
    ok &= all(r <= 1e-4 for r in rels) and all(r <= floor for r in rels)
    details.append(f"euclid collared rel {max(rels):.1e} (floor)")

    # euclidean, boundary-vanishing sine data: measurable order
    totals, scales = [], []
    for n in (65, 129, 257):
        d = build_box_domain(0.0, 1.0, n)
        eig = analytic_box_ground_state(d)
        fd = FDOperators(d, euclidean(1))
        u = sine_sum(d, *FIVE_MODES)
        rem = integrated_remainder(u, eig, fd, 1, "even", allow_thin_support=True)
        totals.append(abs(rem.divergence_total))
        scales.append(max(abs(rem.lhs_integral), abs(rem.scaled_mass)))
    orders = [float(np.log2(totals[i] / totals[i + 1])) for i in range(2)]
    ok &= all(t <= 1e-4 * s for t, s in zip(totals, scales))
    ok &= all(o >= 1.7 for o in orders)
    details.append(f"euclid sine orders {orders[0]:.2f}/{orders[1]:.2f}")

    # heisenberg: flux of the power formula shrinks (coefficient-divergence-free)
    h_rels, h_totals = [], []
    for d, rep in heisenberg_friedrichs[0]:
        tot = integrate_values(d, rep.term("divergence").values)
        scale = integrate_values(d, np.abs(rep.lhs.values))
        h_rels.append(abs(tot) / scale)
        h_totals.append(abs(tot))
    h_orders = [float(np.log2(h_totals[i] / h_totals[i + 1])) for i in range(2)]
    ok &= all(r <= 1e-4 for r in h_rels)
    ok &= all(o >= 1.7 for o in h_orders) or all(r <= floor for r in h_rels)
    details.append(f"heisenberg rel {max(h_rels):.1e}, orders {h_orders[0]:.1f}/{h_orders[1]:.1f}")

    # heisenberg, collared components: exact telescoping of the raw operator
    d3 = build_box_domain((0, 0, 0), (1, 1, 1), (33, 33, 33))
    oh = FDOperators(d3, heisenberg())
    rng = np.random.default_rng(11)
    F = VectorGridFunction((random_bump_product(d3, rng), random_bump_product(d3, rng)))
    tot = integrate_values(d3, oh.divergence_values([c.values for c in F.components]))
    ref = integrate_values(d3, np.abs(F[0].values) + np.abs(F[1].values))
    ok &= abs(tot) <= floor * max(ref, 1.0)
    details.append(f"heisenberg telescoping {abs(tot):.1e}")

    _report(7, ok, "; ".join(details))


def test_criterion_8_heisenberg_friedrichs(heisenberg_friedrichs):
    reports, elapsed = heisenberg_friedrichs
    residuals = [rep.residual_norm for _, rep in reports]
    orders = [float(np.log2(residuals[i] / residuals[i + 1])) for i in range(2)]
    mean_order = float(np.mean(orders))
    ok = 1.6 <= mean_order <= 2.4 and elapsed < 300
    _report(
        8,
        ok,
        f"residuals {[f'{r:.2e}' for r in residuals]}, orders {orders[0]:.2f}/{orders[1]:.2f} "
        f"(mean {mean_order:.2f}), {elapsed:.1f} s",
    )


def test_criterion_9_negative_gap_flag():
    d = build_box_domain(0.0, 1.0, 513)
    eig = ground_state(d, euclidean(1))
    fd = FDOperators(d, euclidean(1))
    u = bump_product(d)
    details, ok = [], True
    for m, expect_negative in ((2, False), (3, True)):
        rem = friedrichs_remainder(u, eig, fd, m)
        scale = max(abs(rem.lhs_integral), abs(rem.scaled_mass))
        ok &= rem.negative_gap == expect_negative
        ok &= rem.balance_error <= 1e-4 * scale
        details.append(
            f"m={m}: gap {rem.metadata['gap']:+.4f}, flag {rem.negative_gap}, "
            f"balance {rem.balance_error / scale:.1e}"
        )
    _report(9, ok, "; ".join(details))


def test_criterion_10_inductive_telescoping(spectral_257):
    d, sp, eig, u = spectral_257
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
    rel = float(np.abs(diff_rhs - j1).max() / scale)
    ok = rel <= 1e-12
    _report(10, ok, f"report difference vs j=1 block: {rel:.2e} relative")


def test_criterion_11_constant_sharpness():
    d = build_box_domain(0.0, 1.0, 513)
    eig = ground_state(d, euclidean(1))
    result = steklov_constant_check(d, euclidean(1), eig, trials=100, seed=0)
    ok = (
        result["max_ratio"] <= result["sharp_constant"] + 1e-3
        and result["ground_state_gap"] <= 1e-3
    )
    _report(
        11,
        ok,
        f"max ratio {result['max_ratio']:.6f} vs sharp {result['sharp_constant']:.6f}, "
        f"ground-state gap {result['ground_state_gap']:.2e}",
    )
