"""Pinned regression fixtures with golden-value comparison.

Every theorem-level capability is tied to one deterministic fixture.  Each
fixture computes a flat dict of scalar outputs and runs its own invariant
assertions (bounds that must hold regardless of history); the subset of
outputs listed in ``GOLDEN_KEYS`` is additionally compared against the
committed golden file, catching silent numerical drift.  Fixtures share no
state and can run individually.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass, field as dfield
from pathlib import Path

import numpy as np

from .errors import SharpremError
from .grid import GridFunction, build_box_domain, integrate_values
from .fields import FDOperators, euclidean, heisenberg
from .spectral import SpectralOperators
from .eigensolve import analytic_box_ground_state, ground_state
from .steklov import (
    even_identity,
    odd_identity,
    integrated_remainder,
    steklov_constant_check,
)
from .friedrichs import friedrichs_identity, friedrichs_remainder, sigma, sigma_asymptotics
from .trials import bump_product, sine_sum

GOLDEN_RESOURCE = "golden.json"

_FIVE_MODES = ([1, 2, 3, 4, 5], [0.3, 0.15, 0.1, -0.08, 0.05])


def _fx_sigma_constants():
    values, failures = {}, []
    for m, expect in ((1, 0), (2, 4), (3, 68), (4, 16452)):
        par = sigma(m)
        values[f"sigma_{m}"] = par.sigma_exact
        if par.sigma_exact != expect:
            failures.append(f"sigma({m}) = {par.sigma_exact}, expected {expect}")
    rows = sigma_asymptotics(60)
    r20 = next(r for r in rows if r.m == 20)
    values["root_deviation_m20"] = abs(r20.root - 2.0)
    if values["root_deviation_m20"] > 5e-5:
        failures.append("sigma_20^{1/p_20} deviates from 2 beyond 5e-5")
    bad = [
        r.m
        for r in rows
        if not (r.lower * (1 - 1e-12) <= r.root <= r.upper * (1 + 1e-12))
    ]
    values["sandwich_violations"] = len(bad)
    if bad:
        failures.append(f"sandwich violated at m={bad}")
    return values, failures


def _fx_steklov_spectral():
    d = build_box_domain(0.0, 1.0, 257)
    sp = SpectralOperators(d)
    eig = analytic_box_ground_state(d)
    u = sine_sum(d, *_FIVE_MODES)
    values, failures = {}, []
    for m, parity in ((1, "even"), (2, "even"), (0, "odd"), (1, "odd")):
        fn = even_identity if parity == "even" else odd_identity
        rep = fn(u, eig, sp, m)
        key = f"residual_{parity}_m{m}"
        values[key] = rep.residual_norm
        if rep.residual_norm > 1e-8:
            failures.append(f"{key} = {rep.residual_norm:.3e} > 1e-8")
        min_sq = min(
            float(t.values.min()) for t in rep.terms_of_kind("square_L", "square_X")
        )
        if min_sq < -1e-12:
            failures.append(f"negative square term in {parity} m={m}: {min_sq:.3e}")
    return values, failures


def _fx_steklov_fd_orders():
    values, failures = {}, []
    for m, parity in ((1, "even"), (2, "even"), (1, "odd")):
        residuals = []
        for n in (65, 129, 257):
            d = build_box_domain(0.0, 1.0, n)
            eig = ground_state(d, euclidean(1))
            fd = FDOperators(d, euclidean(1))
            fn = even_identity if parity == "even" else odd_identity
            rep = fn(bump_product(d), eig, fd, m)
            residuals.append(rep.residual_norm)
        orders = [math.log2(residuals[i] / residuals[i + 1]) for i in range(2)]
        values[f"residual_{parity}_m{m}_finest"] = residuals[-1]
        values[f"order_{parity}_m{m}"] = orders[-1]
        if not all(1.7 <= o <= 2.3 for o in orders):
            failures.append(f"{parity} m={m} orders {orders} outside [1.7, 2.3]")
    return values, failures


def _fx_equality_cases():
    d = build_box_domain(0.0, 1.0, 257)
    sp = SpectralOperators(d)
    eig = analytic_box_ground_state(d)
    u1 = eig.eigenfunction
    pert = GridFunction(d, u1.values + 0.1 * np.sin(2 * np.pi * d.axes()[0]))
    values, failures = {}, []
    for m, parity in ((1, "even"), (0, "odd"), (1, "odd")):
        rem = integrated_remainder(u1, eig, sp, m, parity)
        scale = eig.eigenvalue ** (2 * m) * 1.0  # integrate(u1^2) = 1
        key = f"equality_{parity}_m{m}"
        values[key] = rem.remainder
        if abs(rem.remainder) > 1e-6 * scale:
            failures.append(f"{key} = {rem.remainder:.3e} beyond 1e-6 relative")
        remp = integrated_remainder(pert, eig, sp, m, parity)
        pkey = f"perturbed_{parity}_m{m}"
        values[pkey] = remp.remainder
        if not remp.remainder >= 1e-3 * abs(remp.lhs_integral):
            failures.append(f"{pkey} not clearly positive")
    return values, failures


def _fx_friedrichs_euclidean():
    values, failures = {}, []
    for m in (1, 2):
        residuals = []
        for n in (65, 129):
            d = build_box_domain(0.0, 1.0, n)
            fd = FDOperators(d, euclidean(1))
            phi = GridFunction.from_callable(d, lambda x: 0.5 + np.sin(np.pi * x))
            rep = friedrichs_identity(bump_product(d), phi, fd, m)
            residuals.append(rep.residual_norm)
        order = math.log2(residuals[0] / residuals[1])
        values[f"residual_m{m}"] = residuals[-1]
        values[f"order_m{m}"] = order
        if not 1.6 <= order <= 2.4:
            failures.append(f"m={m} order {order:.2f} outside [1.6, 2.4]")
    return values, failures


def _fx_friedrichs_heisenberg():
    values, failures = {}, []
    residuals = []
    for n in (17, 33):
        d = build_box_domain((0, 0, 0), (1, 1, 1), (n, n, n))
        oh = FDOperators(d, heisenberg())
        phi = GridFunction.from_callable(
            d, lambda x, y, t: 2.0 + x * y * np.sin(np.pi * t)
        )
        u = GridFunction.from_callable(
            d,
            lambda x, y, t: np.sin(np.pi * x) ** 2
            * np.sin(np.pi * y) ** 2
            * np.sin(np.pi * t) ** 2,
        )
        rep = friedrichs_identity(u, phi, oh, 2)
        residuals.append(rep.residual_norm)
        div = integrate_values(d, rep.term("divergence").values)
        scale = integrate_values(d, np.abs(rep.lhs.values))
        if abs(div) > 1e-4 * scale:
            failures.append(f"n={n} divergence {div:.3e} beyond 1e-4 of scale")
    order = math.log2(residuals[0] / residuals[1])
    values["residual_33"] = residuals[-1]
    values["order"] = order
    if not 1.6 <= order <= 2.4:
        failures.append(f"order {order:.2f} outside [1.6, 2.4]")
    return values, failures


def _fx_friedrichs_signs():
    d = build_box_domain(0.0, 1.0, 513)
    eig = ground_state(d, euclidean(1))
    fd = FDOperators(d, euclidean(1))
    u = bump_product(d)
    values, failures = {}, []
    for m, expect_negative in ((2, False), (3, True)):
        rem = friedrichs_remainder(u, eig, fd, m)
        scale = max(abs(rem.lhs_integral), abs(rem.scaled_mass))
        values[f"gap_m{m}"] = rem.metadata["gap"]
        values[f"balance_rel_m{m}"] = rem.balance_error / scale
        if rem.negative_gap != expect_negative:
            failures.append(f"m={m} negative-gap flag {rem.negative_gap}")
        if rem.balance_error > 1e-4 * scale:
            failures.append(f"m={m} identity does not balance at 1e-4")
    return values, failures


def _fx_eigensolve():
    values, failures = {}, []
    lams = []
    for n in (129, 257, 513):
        d = build_box_domain(0.0, 1.0, n)
        lams.append(ground_state(d, euclidean(1)).eigenvalue)
    values["lambda_1d_513"] = lams[-1]
    rel = abs(lams[-1] - math.pi**2) / math.pi**2
    if rel > 1e-3:
        failures.append(f"1D eigenvalue off by {rel:.2e}")
    ratio = (lams[0] - lams[1]) / (lams[1] - lams[2])
    values["richardson_ratio_1d"] = ratio
    if not 3.5 <= ratio <= 4.5:
        failures.append(f"Richardson ratio {ratio:.2f} outside [3.5, 4.5]")
    d2 = build_box_domain((0, 0), (1, 1), (129, 129))
    lam2 = ground_state(d2, euclidean(2)).eigenvalue
    values["lambda_2d_129"] = lam2
    rel2 = abs(lam2 - 2 * math.pi**2) / (2 * math.pi**2)
    if rel2 > 2e-3:
        failures.append(f"2D eigenvalue off by {rel2:.2e}")
    return values, failures


def _fx_constant_sharpness():
    d = build_box_domain(0.0, 1.0, 513)
    eig = ground_state(d, euclidean(1))
    result = steklov_constant_check(d, euclidean(1), eig, trials=100, seed=0)
    values = {
        "max_ratio": result["max_ratio"],
        "ground_state_ratio": result["ground_state_ratio"],
    }
    failures = []
    if result["max_ratio"] > result["sharp_constant"] + 1e-3:
        failures.append("a trial ratio exceeds the sharp constant")
    if result["ground_state_gap"] > 1e-3:
        failures.append("ground state does not attain the sharp constant")
    return values, failures


FIXTURES = {
    "sigma_constants": _fx_sigma_constants,
    "steklov_spectral": _fx_steklov_spectral,
    "steklov_fd_orders": _fx_steklov_fd_orders,
    "equality_cases": _fx_equality_cases,
    "friedrichs_euclidean": _fx_friedrichs_euclidean,
    "friedrichs_heisenberg": _fx_friedrichs_heisenberg,
    "friedrichs_signs": _fx_friedrichs_signs,
    "eigensolve": _fx_eigensolve,
    "constant_sharpness": _fx_constant_sharpness,
}

# keys compared against the golden file: (rtol, atol)
GOLDEN_KEYS = {
    "sigma_constants": {
        "sigma_1": (0.0, 0.0),
        "sigma_2": (0.0, 0.0),
        "sigma_3": (0.0, 0.0),
        "sigma_4": (0.0, 0.0),
        "root_deviation_m20": (1e-9, 1e-12),
    },
    "steklov_spectral": {
        "residual_even_m1": (0.0, 1e-8),
        "residual_even_m2": (0.0, 1e-8),
        "residual_odd_m0": (0.0, 1e-8),
        "residual_odd_m1": (0.0, 1e-8),
    },
    "steklov_fd_orders": {
        "residual_even_m1_finest": (1e-6, 1e-12),
        "residual_even_m2_finest": (1e-6, 1e-12),
        "residual_odd_m1_finest": (1e-6, 1e-12),
        "order_even_m1": (0.0, 0.05),
        "order_even_m2": (0.0, 0.05),
        "order_odd_m1": (0.0, 0.05),
    },
    "equality_cases": {
        "equality_even_m1": (0.0, 1e-7),
        "equality_odd_m0": (0.0, 1e-7),
        "equality_odd_m1": (0.0, 1e-6),
        "perturbed_even_m1": (1e-9, 1e-12),
        "perturbed_odd_m0": (1e-9, 1e-12),
        "perturbed_odd_m1": (1e-9, 1e-12),
    },
    "friedrichs_euclidean": {
        "residual_m1": (1e-6, 1e-12),
        "residual_m2": (1e-6, 1e-12),
        "order_m1": (0.0, 0.05),
        "order_m2": (0.0, 0.05),
    },
    "friedrichs_heisenberg": {
        "residual_33": (1e-6, 1e-12),
        "order": (0.0, 0.05),
    },
    "friedrichs_signs": {
        "gap_m2": (1e-9, 1e-12),
        "gap_m3": (1e-9, 1e-12),
    },
    "eigensolve": {
        "lambda_1d_513": (1e-9, 1e-12),
        "lambda_2d_129": (1e-9, 1e-12),
        "richardson_ratio_1d": (1e-6, 1e-9),
    },
    "constant_sharpness": {
        "max_ratio": (1e-9, 1e-12),
        "ground_state_ratio": (1e-9, 1e-12),
    },
}


@dataclass
class FixtureResult:
    name: str
    passed: bool
    failures: list = dfield(default_factory=list)
    values: dict = dfield(default_factory=dict)


@dataclass
class RegressionSummary:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self):
        for r in self.results:
            yield f"[{'PASS' if r.passed else 'FAIL'}] {r.name}"
            for f in r.failures:
                yield f"       {f}"


def load_golden(path=None) -> dict:
    if path is not None:
        return json.loads(Path(path).read_text())
    data = importlib.resources.files("sharprem").joinpath("data", GOLDEN_RESOURCE)
    return json.loads(data.read_text())


def _compare_golden(name: str, values: dict, golden: dict) -> list:
    failures = []
    expected = golden.get(name)
    if expected is None:
        return [f"no golden entry for fixture {name}"]
    for key, (rtol, atol) in GOLDEN_KEYS[name].items():
        if key not in values:
            failures.append(f"{name}.{key}: missing from fixture output")
            continue
        if key not in expected:
            failures.append(f"{name}.{key}: missing from golden file")
            continue
        got, want = values[key], expected[key]
        if rtol == 0.0 and atol == 0.0:
            ok = got == want
        else:
            ok = abs(got - want) <= atol + rtol * abs(want)
        if not ok:
            failures.append(f"{name}.{key}: observed {got!r}, golden {want!r}")
    return failures


def regression_suite(golden: dict | None = None, names=None) -> RegressionSummary:
    if golden is None:
        golden = load_golden()
    results = []
    for name in names or FIXTURES:
        values, failures = FIXTURES[name]()
        failures = list(failures) + _compare_golden(name, values, golden)
        results.append(FixtureResult(name, not failures, failures, values))
    return RegressionSummary(results)


def write_golden(path) -> dict:
    """Regenerate the golden file from the current implementation."""
    payload = {}
    for name, fn in FIXTURES.items():
        values, failures = fn()
        if failures:
            raise SharpremError(f"fixture {name} failing, refusing to pin: {failures}")
        payload[name] = {k: values[k] for k in GOLDEN_KEYS[name]}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return payload
