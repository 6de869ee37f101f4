"""Experiment orchestration: configs, refinement sweeps, reports, assertions.

Each theorem maps to one runner producing a JSON report plus, where a sweep
is involved, a CSV convergence table.  A run's exit code is 0 only if every
assertion of the selected theorem's invariant suite holds; assertion
outcomes are part of the report so failures are machine readable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, SharpremError
from .grid import GridDomain, GridFunction, build_box_domain, integrate_values
from .fields import FDOperators, euclidean, heisenberg
from .spectral import SpectralOperators, make_operators
from .eigensolve import analytic_box_ground_state, ground_state, rayleigh_quotient
from .steklov import (
    M_MAX,
    even_identity,
    odd_identity,
    integrated_remainder,
    steklov_constant_check,
)
from .friedrichs import (
    FLOAT_SIGMA_MAX,
    friedrichs_identity,
    friedrichs_remainder,
    sigma,
    sigma_asymptotics,
)
from .trials import bump_from_params, draw_bump_params, draw_sine_params, sine_sum
from . import io as sio

THEOREMS = (
    "steklov_even",
    "steklov_odd",
    "steklov_base",
    "friedrichs",
    "sigma_table",
    "eigensolve",
    "constant_check",
)

ORDER_WINDOWS = {  # acceptance windows for observed convergence orders
    "steklov": (1.7, 2.3),
    "friedrichs": (1.6, 2.4),
}


@dataclass
class ConvergenceRecord:
    h: float
    residual_norm: float
    observed_order: float | None = None


@dataclass
class ExperimentConfig:
    theorem: str
    m: int = 1
    backend: str = "finite_difference"
    family: str = "euclidean"
    lower: tuple = (0.0,)
    upper: tuple = (1.0,)
    points: tuple = (65,)
    mask: str = "box"
    mask_params: dict = field(default_factory=dict)
    phi: str = "eigen"  # friedrichs weight: eigen | manufactured
    family_csv: tuple = ()  # node-sampled coefficient tables, one per field
    refinements: int = 3
    seed: int = 0
    trials: int = 100
    max_m: int = 20
    eigen_tol: float = 1e-10
    spectral_residual_tol: float = 1e-8
    divergence_rel_tol: float = 1e-4

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ConfigError(f"unknown theorem {self.theorem!r}")
        if self.backend in ("fd",):
            self.backend = "finite_difference"
        if self.backend not in ("finite_difference", "spectral"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.family not in ("euclidean", "heisenberg", "custom"):
            raise ConfigError(f"unknown family {self.family!r}")
        if self.family == "custom":
            if not self.family_csv:
                raise ConfigError("family = custom needs family_csv paths")
            if self.refinements != 1:
                raise ConfigError(
                    "node-sampled custom families fix one grid; refinements must be 1"
                )
        if len({len(self.lower), len(self.upper), len(self.points)}) != 1:
            raise ConfigError("lower/upper/points lengths differ")
        if self.backend == "spectral" and (
            self.family != "euclidean" or self.mask != "box"
        ):
            raise ConfigError(
                "spectral backend requires the euclidean family on an unmasked box"
            )
        if self.theorem in ("steklov_even", "steklov_odd"):
            limit = M_MAX[self.backend]
            low = 1 if self.theorem == "steklov_even" else 0
            if not low <= self.m <= limit:
                raise ConfigError(
                    f"{self.theorem} needs {low} <= m <= {limit} on {self.backend}"
                )
        if self.theorem == "friedrichs" and not 1 <= self.m <= FLOAT_SIGMA_MAX:
            raise ConfigError(f"friedrichs needs 1 <= m <= {FLOAT_SIGMA_MAX}")
        if self.refinements < 1:
            raise ConfigError("refinements must be >= 1")
        if self.family == "heisenberg" and len(self.points) != 3:
            raise ConfigError("heisenberg family needs a 3D domain")

    @classmethod
    def from_mapping(cls, cfg: dict) -> "ExperimentConfig":
        def get(key, default=None, cast=str):
            if key not in cfg:
                return default
            try:
                return cast(cfg[key])
            except (TypeError, ValueError) as e:
                raise ConfigError(f"bad value for {key}: {e}") from None

        def tup(key, default, cast=float):
            if key not in cfg:
                return default
            return tuple(cast(v) for v in str(cfg[key]).split(","))

        mask_params = {}
        for k in ("radius", "radius_inner", "radius_outer"):
            if f"mask_{k}" in cfg:
                mask_params[k] = float(cfg[f"mask_{k}"])
        if "mask_center" in cfg:
            mask_params["center"] = tuple(
                float(v) for v in str(cfg["mask_center"]).split(",")
            )
        if "theorem" not in cfg:
            raise ConfigError("config needs a theorem")
        points = tup("points", (65,), int)
        dim = len(points)
        family_csv = ()
        if "family_csv" in cfg:
            family_csv = tuple(p.strip() for p in str(cfg["family_csv"]).split(";"))
        return cls(
            theorem=str(cfg["theorem"]),
            family_csv=family_csv,
            m=get("m", 1, int),
            backend=get("backend", "finite_difference"),
            family=get("family", "euclidean"),
            lower=tup("lower", (0.0,) * dim),
            upper=tup("upper", (1.0,) * dim),
            points=points,
            mask=get("mask", "box"),
            mask_params=mask_params,
            phi=get("phi", "eigen"),
            refinements=get("refinements", 3, int),
            seed=get("seed", 0, int),
            trials=get("trials", 100, int),
            max_m=get("max_m", 20, int),
            eigen_tol=get("eigen_tol", 1e-10, float),
            spectral_residual_tol=get("spectral_residual_tol", 1e-8, float),
            divergence_rel_tol=get("divergence_rel_tol", 1e-4, float),
        )


@dataclass
class RunResult:
    exit_code: int
    report: dict
    artifacts: list


def _family(config: ExperimentConfig):
    dim = len(config.points)
    if config.family == "euclidean":
        return euclidean(dim)
    if config.family == "heisenberg":
        return heisenberg()
    from .fields import family_from_tables
    from .io import read_family_csv

    domain = _domain_at_level(config, 0)
    return family_from_tables("custom", domain, read_family_csv(domain, config.family_csv))


def _domain_at_level(config: ExperimentConfig, level: int) -> GridDomain:
    pts = tuple((n - 1) * 2**level + 1 for n in config.points)
    box = build_box_domain(config.lower, config.upper, pts)
    if config.mask == "box":
        return box
    from .grid import named_mask

    return named_mask(config.mask, box, config.mask_params)


def _eigenpair(config: ExperimentConfig, domain: GridDomain, fields):
    if config.backend == "spectral":
        return analytic_box_ground_state(domain)
    positivity = "boundary_layer" if config.family == "heisenberg" else "require"
    return ground_state(domain, fields, tol=config.eigen_tol, positivity=positivity)


def _trial_function(config: ExperimentConfig, domain: GridDomain, params):
    kind, payload = params
    if kind == "sine":
        return sine_sum(domain, *payload)
    return bump_from_params(domain, payload)


def _draw_trial_params(config: ExperimentConfig):
    # sine sums are reproduced exactly by the spectral backend; composed
    # difference stencils need the honest zero collar of a bump product
    rng = np.random.default_rng(config.seed)
    dim = len(config.points)
    if config.backend == "spectral":
        return ("sine", draw_sine_params(rng, dim, n_modes=(5, 5), max_mode=5))
    nonneg = config.theorem == "friedrichs"
    return ("bump", draw_bump_params(rng, dim, nonnegative=nonneg))


def _orders(residuals):
    out = []
    for a, b in zip(residuals, residuals[1:]):
        out.append(float(np.log2(a / b)) if a > 0 and b > 0 else None)
    return out


class _Assertions:
    def __init__(self):
        self.entries = []

    def check(self, name: str, ok: bool, detail: str = ""):
        self.entries.append({"name": name, "passed": bool(ok), "detail": detail})
        return ok

    @property
    def all_passed(self) -> bool:
        return all(e["passed"] for e in self.entries)


def _manufactured_phi(domain: GridDomain) -> GridFunction:
    dim = domain.dim
    if dim == 3:
        return GridFunction.from_callable(
            domain, lambda x, y, t: 2.0 + x * y * np.sin(np.pi * t)
        )
    if dim == 2:
        return GridFunction.from_callable(domain, lambda x, y: 2.0 + 0.5 * x * y)
    l, u = domain.lower[0], domain.upper[0]
    return GridFunction.from_callable(
        domain, lambda x: 0.5 + np.sin(np.pi * (x - l) / (u - l))
    )


def _smooth_nonneg_trial(domain: GridDomain) -> GridFunction:
    """C-infinity nonnegative trial vanishing on the boundary (power-ready)."""
    vals = np.ones(domain.shape)
    for x, l, u in zip(domain.meshgrid(), domain.lower, domain.upper):
        vals = vals * np.sin(np.pi * (x - l) / (u - l)) ** 2
    return GridFunction(domain, vals)


def run_steklov(config: ExperimentConfig, asserts: _Assertions) -> dict:
    parity = {"steklov_even": "even", "steklov_odd": "odd", "steklov_base": "odd"}[
        config.theorem
    ]
    m = 0 if config.theorem == "steklov_base" else config.m
    fields = _family(config)
    params = _draw_trial_params(config)
    levels = []
    residuals = []
    for level in range(config.refinements):
        domain = _domain_at_level(config, level)
        ops = make_operators(config.backend, domain, fields)
        eig = _eigenpair(config, domain, fields)
        u = _trial_function(config, domain, params)
        fn = even_identity if parity == "even" else odd_identity
        report = fn(u, eig, ops, m)
        rem = integrated_remainder(u, eig, ops, m, parity)
        min_square = min(
            float(t.values.min()) for t in report.terms_of_kind("square_L", "square_X")
        )
        scale = max(abs(rem.lhs_integral), abs(rem.scaled_mass), 1e-300)
        levels.append(
            {
                "points": list(domain.points),
                "h": max(domain.spacing),
                "lambda": eig.eigenvalue,
                "eigen_residual": eig.residual_norm,
                "residual_norm": report.residual_norm,
                "excluded_nodes": report.excluded_nodes,
                "min_square_term": min_square,
                "lhs_integral": rem.lhs_integral,
                "scaled_mass": rem.scaled_mass,
                "remainder": rem.remainder,
                "divergence_total": rem.divergence_total,
                "divergence_rel": abs(rem.divergence_total) / scale,
                "balance_error": rem.balance_error,
                "min_integrated_term": min(
                    (v for _, v in rem.remainder_terms), default=0.0
                ),
            }
        )
        residuals.append(report.residual_norm)
        asserts.check(
            f"nonnegativity_level{level}",
            min_square >= -1e-12 and levels[-1]["min_integrated_term"] >= -1e-12,
            f"min square term {min_square:.3e}",
        )
        asserts.check(
            f"divergence_level{level}",
            abs(rem.divergence_total) <= config.divergence_rel_tol * scale,
            f"|div|={abs(rem.divergence_total):.3e} scale={scale:.3e}",
        )
    orders = _orders(residuals)
    if config.backend == "spectral":
        worst = max(residuals)
        asserts.check(
            "spectral_residual",
            worst <= config.spectral_residual_tol,
            f"max residual {worst:.3e}",
        )
    elif config.refinements >= 3:
        lo, hi = ORDER_WINDOWS["steklov"]
        ok = all(o is not None and lo <= o <= hi for o in orders)
        asserts.check("convergence_order", ok, f"orders {orders}")
    return {"levels": levels, "orders": orders, "parity": parity, "m": m}


def run_friedrichs(config: ExperimentConfig, asserts: _Assertions) -> dict:
    fields = _family(config)
    levels = []
    residuals = []
    for level in range(config.refinements):
        domain = _domain_at_level(config, level)
        ops = make_operators(config.backend, domain, fields)
        entry = {"points": list(domain.points), "h": max(domain.spacing)}
        if config.phi == "manufactured":
            phi = _manufactured_phi(domain)
            u = _smooth_nonneg_trial(domain)
            report = friedrichs_identity(u, phi, ops, config.m)
            div_tot = integrate_values(domain, report.term("divergence").values)
            scale = max(integrate_values(domain, np.abs(report.lhs.values)), 1e-300)
            entry.update(
                residual_norm=report.residual_norm,
                divergence_total=div_tot,
                divergence_rel=abs(div_tot) / scale,
                min_square_term=min(
                    float(t.values.min())
                    for t in report.terms_of_kind("square_L", "square_X")
                ),
                underflow_nodes=report.metadata["underflow_nodes"],
            )
            residuals.append(report.residual_norm)
        else:
            eig = _eigenpair(config, domain, fields)
            rng = np.random.default_rng(config.seed)
            u = bump_from_params(
                domain, draw_bump_params(rng, domain.dim, nonnegative=True)
            )
            rem = friedrichs_remainder(u, eig, ops, config.m)
            scale = max(abs(rem.lhs_integral), abs(rem.scaled_mass), 1e-300)
            entry.update(
                gap=rem.metadata["gap"],
                negative_gap=rem.negative_gap,
                lhs_integral=rem.lhs_integral,
                scaled_mass=rem.scaled_mass,
                remainder=rem.remainder,
                divergence_total=rem.divergence_total,
                balance_error=rem.balance_error,
                balance_rel=rem.balance_error / scale,
                min_integrated_term=min(
                    (v for _, v in rem.remainder_terms), default=0.0
                ),
            )
            residuals.append(rem.balance_error)
            asserts.check(
                f"balance_level{level}",
                rem.balance_error <= 1e-4 * scale,
                f"balance {rem.balance_error:.3e} vs scale {scale:.3e}",
            )
            asserts.check(
                f"gap_flag_level{level}",
                rem.negative_gap == (rem.metadata["gap"] < 0),
                f"gap {rem.metadata['gap']:.4f}",
            )
            asserts.check(
                f"nonnegativity_level{level}",
                entry["min_integrated_term"] >= -1e-12,
                "",
            )
        if config.phi == "manufactured":
            asserts.check(
                f"nonnegativity_level{level}",
                entry["min_square_term"] >= -1e-12,
                "",
            )
            asserts.check(
                f"divergence_level{level}",
                entry["divergence_rel"] <= config.divergence_rel_tol,
                f"divergence_rel {entry['divergence_rel']:.3e}",
            )
        levels.append(entry)
    orders = _orders(residuals) if config.phi == "manufactured" else []
    if config.phi == "manufactured" and config.refinements >= 3:
        lo, hi = ORDER_WINDOWS["friedrichs"]
        mean_order = float(np.mean([o for o in orders if o is not None]))
        asserts.check(
            "convergence_order", lo <= mean_order <= hi, f"mean order {mean_order:.2f}"
        )
    par = sigma(config.m)
    return {
        "levels": levels,
        "orders": orders,
        "m": config.m,
        "p": par.p,
        "sigma": par.sigma,
    }


def run_sigma_table(config: ExperimentConfig, asserts: _Assertions) -> dict:
    rows = sigma_asymptotics(max(config.max_m, 3))
    asserts.check("sigma_1", sigma(1).sigma_exact == 0, "")
    asserts.check("sigma_2", sigma(2).sigma_exact == 4, "")
    asserts.check("sigma_3", sigma(3).sigma_exact == 68, "")
    sandwich_ok = all(r.lower <= r.root * (1 + 1e-12) and r.root <= r.upper * (1 + 1e-12) for r in rows)
    asserts.check("sandwich", sandwich_ok, f"{len(rows)} rows")
    table = [
        {
            "m": 1,
            "p": 2,
            "sigma": 0,
            "log_sigma": None,
            "root": None,
            "lower": None,
            "upper": None,
        }
    ]
    for r in rows:
        # exact integers stay readable through m = 8 (~77 digits); beyond
        # that the log-domain columns carry the information
        exact = sigma(r.m).sigma_exact if r.m <= 8 else None
        table.append(
            {
                "m": r.m,
                "p": r.p,
                "sigma": exact,  # exact integer when representable, else None
                "log_sigma": r.log_sigma,
                "root": r.root,
                "lower": r.lower,
                "upper": r.upper,
            }
        )
    return {"rows": table}


def run_eigensolve(config: ExperimentConfig, asserts: _Assertions) -> dict:
    fields = _family(config)
    domain = _domain_at_level(config, 0)
    eig = _eigenpair(config, domain, fields)
    from .grid import integrate

    norm_err = abs(integrate(eig.eigenfunction * eig.eigenfunction) - 1.0)
    asserts.check(
        "residual", eig.residual_norm <= max(config.eigen_tol, 1e-9) * max(1.0, eig.eigenvalue),
        f"{eig.residual_norm:.3e}",
    )
    asserts.check("normalization", norm_err <= 1e-10, f"{norm_err:.3e}")
    if config.family == "euclidean":
        asserts.check(
            "positivity", eig.positivity_margin > 0, f"{eig.positivity_margin:.3e}"
        )
    report = {
        "lambda": eig.eigenvalue,
        "residual_norm": eig.residual_norm,
        "positivity_margin": eig.positivity_margin,
        "normalization_error": norm_err,
        "points": list(domain.points),
        "_phi": eig.eigenfunction,
    }
    if config.family == "euclidean" and config.mask == "box":
        exact = float(
            sum((np.pi / (u - l)) ** 2 for l, u in zip(domain.lower, domain.upper))
        )
        rel = abs(eig.eigenvalue - exact) / exact
        report["analytic_lambda"] = exact
        report["relative_error"] = rel
        asserts.check("accuracy", rel <= 1e-3, f"rel err {rel:.3e}")
    return report


def run_constant_check(config: ExperimentConfig, asserts: _Assertions) -> dict:
    fields = _family(config)
    domain = _domain_at_level(config, 0)
    eig = _eigenpair(config, domain, fields)
    result = steklov_constant_check(
        domain, fields, eig, trials=config.trials, seed=config.seed
    )
    asserts.check(
        "ratios_below_sharp",
        result["max_ratio"] <= result["sharp_constant"] + 1e-3,
        f"max {result['max_ratio']:.6f} vs {result['sharp_constant']:.6f}",
    )
    asserts.check(
        "ground_state_attains",
        result["ground_state_gap"] <= 1e-3,
        f"gap {result['ground_state_gap']:.2e}",
    )
    return result


def run(config: ExperimentConfig, out_dir=None, quiet: bool = True) -> RunResult:
    asserts = _Assertions()
    runner = {
        "steklov_even": run_steklov,
        "steklov_odd": run_steklov,
        "steklov_base": run_steklov,
        "friedrichs": run_friedrichs,
        "sigma_table": run_sigma_table,
        "eigensolve": run_eigensolve,
        "constant_check": run_constant_check,
    }[config.theorem]
    body = runner(config, asserts)
    phi = body.pop("_phi", None)
    report = {
        "version": __version__,
        "theorem": config.theorem,
        "config": {
            "m": config.m,
            "backend": config.backend,
            "family": config.family,
            "lower": list(config.lower),
            "upper": list(config.upper),
            "points": list(config.points),
            "mask": config.mask,
            "refinements": config.refinements,
            "seed": config.seed,
            "phi": config.phi,
        },
        "result": body,
        "assertions": asserts.entries,
        "passed": asserts.all_passed,
    }
    artifacts = []
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        sio.write_json(out / "report.json", report)
        artifacts.append(str(out / "report.json"))
        if "levels" in body and body.get("orders") is not None:
            records = []
            residuals = [lv.get("residual_norm") for lv in body["levels"]]
            for i, lv in enumerate(body["levels"]):
                if residuals[i] is None:
                    continue
                order = body["orders"][i - 1] if i > 0 and i - 1 < len(body["orders"]) else None
                records.append(
                    ConvergenceRecord(lv["h"], residuals[i], order)
                )
            if records:
                sio.write_convergence_csv(out / "convergence.csv", records)
                artifacts.append(str(out / "convergence.csv"))
        if config.theorem == "sigma_table":
            import csv as _csv

            with open(out / "sigma_table.csv", "w", newline="") as fh:
                writer = _csv.writer(fh)
                writer.writerow(["m", "p", "sigma", "log_sigma", "root", "lower", "upper"])
                def fmt(v):
                    if v is None:
                        return ""
                    return str(v) if isinstance(v, int) else format(v, ".17g")

                for row in body["rows"]:
                    writer.writerow([fmt(row[k]) for k in
                                     ("m", "p", "sigma", "log_sigma", "root", "lower", "upper")])
            artifacts.append(str(out / "sigma_table.csv"))
        if phi is not None:
            sio.write_grid_csv(out / "phi.csv", phi)
            artifacts.append(str(out / "phi.csv"))
    if not quiet:
        state = "PASS" if asserts.all_passed else "FAIL"
        print(f"[{state}] theorem={config.theorem}")
        for e in asserts.entries:
            mark = "ok " if e["passed"] else "FAIL"
            print(f"  {mark} {e['name']} {e['detail']}")
    return RunResult(0 if asserts.all_passed else 1, report, artifacts)
