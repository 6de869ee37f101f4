"""Pointwise and integrated remainder identities of Steklov type.

For a strictly positive eigenfunction phi of the negated sum-of-squares
operator (-L phi = lambda phi), the gap between |L^m u|^2 (even order) or
|X L^m u|^2 (odd order) and the matching power of lambda times u^2 is an
exact sum of manifestly nonnegative squares plus divergence terms.  The
evaluators here build every summand on the grid, by its own code path, and
report the pointwise residual of the whole identity; integrating term by
term yields the remainder form of the corresponding inequality, whose
divergence part cancels for compactly supported data.

Term naming: ``square_L_j{j}`` for |L^{j+1}u + lambda L^j u|^2 blocks,
``square_X_j{j}`` for |X L^j u - (X phi/phi) L^j u|^2 blocks (with
``square_X_lead`` for the leading odd-order block), ``divergence_j{j}`` and
``divergence_final`` for the flux terms.  Positive lambda powers are folded
into the stored term values, so every ``square_*`` grid is pointwise
nonnegative as reported.

Quotient safety: X phi / phi is formed only где phi is above a relative
positivity floor; the few excluded nodes (phi -> 0 at the boundary) are
zeroed in every reported grid and skipped by residual norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CollarError, DomainError, PositivityError
from .grid import GridDomain, GridFunction, integrate_values
from .eigensolve import EigenPair

POSITIVITY_FLOOR = 1e-14

# backend m-limits: composed differences lose the signal in roundoff beyond
# eight derivatives; the spectral backend stays mode-exact through m = 3
M_MAX = {"finite_difference": 2, "spectral": 3}


@dataclass(frozen=True, eq=False)
class IdentityTerm:
    name: str
    kind: str  # square_L | square_X | divergence
    j: int | None
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)


@dataclass(frozen=True, eq=False)
class IdentityReport:
    lhs: GridFunction
    rhs_terms: list
    residual: GridFunction
    residual_norm: float
    excluded_nodes: int
    metadata: dict = field(default_factory=dict)

    def term(self, name: str) -> IdentityTerm:
        for t in self.rhs_terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def terms_of_kind(self, *kinds) -> list:
        return [t for t in self.rhs_terms if t.kind in kinds]

    def rhs_sum(self) -> np.ndarray:
        return np.sum([t.values for t in self.rhs_terms], axis=0)


@dataclass(frozen=True, eq=False)
class RemainderReport:
    lhs_integral: float
    scaled_mass: float
    remainder: float  # lhs_integral - scaled_mass
    remainder_terms: list  # (name, integrated value)
    divergence_total: float
    balance_error: float  # |remainder - (sum terms + divergence_total)|
    negative_gap: bool | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def square_total(self) -> float:
        return float(sum(v for _, v in self.remainder_terms))


def eigen_quotient(ops, phi_values: np.ndarray, floor: float = POSITIVITY_FLOOR):
    """Components of X phi / phi and the mask of nodes where it is formed."""
    domain = ops.domain
    interior = domain.interior_mask
    top = float(np.abs(phi_values[interior]).max()) if interior.any() else 0.0
    if top <= 0.0:
        raise PositivityError("eigenfunction vanishes on the interior")
    valid = interior & (phi_values >= floor * top)
    if not valid.any():
        raise PositivityError("eigenfunction below positivity floor everywhere")
    grad = ops.gradient_values(phi_values)
    q = [np.zeros(domain.shape) for _ in grad]
    for qk, gk in zip(q, grad):
        np.divide(gk, phi_values, out=qk, where=valid)
    return q, valid


def _require_backend_m(ops, m: int):
    limit = M_MAX.get(ops.backend)
    if limit is not None and m > limit:
        raise DomainError(
            f"m={m} exceeds the {ops.backend} backend limit m<={limit}"
        )


def _require_collar(u: GridFunction, needed: int, allow_thin_support: bool):
    """Composed stencils of depth r are exact only over a collar >= r - 1."""
    if needed <= 0 or allow_thin_support:
        return
    measured = u.measured_collar()
    if measured < needed:
        raise CollarError(
            f"support collar {measured} too thin (need >= {needed}); "
            f"pass allow_thin_support=True to evaluate anyway"
        )


def _finalize(domain, lhs, terms, valid, meta) -> IdentityReport:
    invalid = ~valid
    lhs = np.array(lhs)
    lhs[invalid] = 0.0
    clean_terms = []
    for t in terms:
        v = np.array(t.values)
        v[invalid] = 0.0
        clean_terms.append(IdentityTerm(t.name, t.kind, t.j, v))
    residual = lhs - np.sum([t.values for t in clean_terms], axis=0)
    residual[invalid] = 0.0
    norm = float(np.sqrt(np.sum(domain.quadrature_weights * residual**2)))
    excluded = int(np.count_nonzero(domain.interior_mask & invalid))
    meta = dict(meta, excluded_nodes=excluded)
    return IdentityReport(
        lhs=GridFunction(domain, lhs),
        rhs_terms=clean_terms,
        residual=GridFunction(domain, residual),
        residual_norm=norm,
        excluded_nodes=excluded,
        metadata=meta,
    )


def _steklov_terms(u_vals, lam, q, ops, m, parity):
    """Shared construction of all identity summands for one (m, parity)."""
    lpow = [np.array(u_vals)]
    for _ in range(m):
        lpow.append(ops.sublaplacian_values(lpow[-1]))
    grads = {}
    jmax_grad = m - 1 if parity == "even" else m
    for j in range(jmax_grad + 1):
        grads[j] = ops.gradient_values(lpow[j])

    terms = []

    def j_block(j, w_square_l, w_square_x, w_div):
        sq_l = w_square_l * (lpow[j + 1] + lam * lpow[j]) ** 2
        diff = [gk - qk * lpow[j] for gk, qk in zip(grads[j], q)]
        sq_x = w_square_x * np.sum([d**2 for d in diff], axis=0)
        arg = [qk * lpow[j] ** 2 - lpow[j] * gk for gk, qk in zip(grads[j], q)]
        div = w_div * ops.divergence_values(arg)
        terms.append(IdentityTerm(f"square_L_j{j}", "square_L", j, sq_l))
        terms.append(IdentityTerm(f"square_X_j{j}", "square_X", j, sq_x))
        terms.append(IdentityTerm(f"divergence_j{j}", "divergence", j, div))

    if parity == "even":
        lhs = lpow[m] ** 2 - lam ** (2 * m) * u_vals**2
        for j in range(m):
            w = lam ** (2 * (m - 1 - j))
            j_block(j, w, 2.0 * lam ** (2 * (m - 1 - j) + 1),
                    2.0 * lam ** (2 * (m - 1 - j) + 1))
    else:
        lhs = (
            np.sum([g**2 for g in grads[m]], axis=0)
            - lam ** (2 * m + 1) * u_vals**2
        )
        lead = [gk - qk * lpow[m] for gk, qk in zip(grads[m], q)]
        terms.append(
            IdentityTerm(
                "square_X_lead", "square_X", m,
                np.sum([d**2 for d in lead], axis=0),
            )
        )
        for j in range(m):
            j_block(j, lam ** (2 * (m - j) - 1), 2.0 * lam ** (2 * (m - j)),
                    2.0 * lam ** (2 * (m - j)))
        final_arg = [qk * lpow[m] ** 2 for qk in q]
        terms.append(
            IdentityTerm(
                "divergence_final", "divergence", None,
                ops.divergence_values(final_arg),
            )
        )
    return lhs, terms


def _identity(u, eig, ops, m, parity, allow_thin_support):
    if parity == "even" and m < 1:
        raise ValueError("even identities need m >= 1")
    if parity == "odd" and m < 0:
        raise ValueError("odd identities need m >= 0")
    _require_backend_m(ops, m)
    if ops.backend == "finite_difference":
        needed = 2 * m - 1 if parity == "even" else 2 * m
        _require_collar(u, needed, allow_thin_support)
    q, valid = eigen_quotient(ops, eig.eigenfunction.values)
    if np.any(ops.domain.interior_mask & ~valid & (u.values != 0.0)):
        raise PositivityError(
            "eigenfunction is below the positivity floor on the support of u"
        )
    lhs, terms = _steklov_terms(u.values, eig.eigenvalue, q, ops, m, parity)
    meta = {
        "parity": parity,
        "m": m,
        "lambda": eig.eigenvalue,
        "backend": ops.backend,
        "family": ops.family.name,
        "points": list(ops.domain.points),
        "eigen_residual": eig.residual_norm,
    }
    return _finalize(ops.domain, lhs, terms, valid, meta)


def base_identity(u: GridFunction, eig: EigenPair, ops) -> IdentityReport:
    """|Xu|^2 - lambda u^2 = |Xu - (Xphi/phi) u|^2 + X.((Xphi/phi) u^2)."""
    return odd_identity(u, eig, ops, 0)


def even_identity(
    u: GridFunction, eig: EigenPair, ops, m: int, allow_thin_support: bool = False
) -> IdentityReport:
    """|L^m u|^2 - lambda^{2m} u^2 as squares plus divergence terms."""
    return _identity(u, eig, ops, m, "even", allow_thin_support)


def odd_identity(
    u: GridFunction, eig: EigenPair, ops, m: int, allow_thin_support: bool = False
) -> IdentityReport:
    """|X L^m u|^2 - lambda^{2m+1} u^2 as squares plus divergence terms."""
    return _identity(u, eig, ops, m, "odd", allow_thin_support)


def integrated_remainder(
    u: GridFunction,
    eig: EigenPair,
    ops,
    m: int,
    parity: str,
    allow_thin_support: bool = False,
) -> RemainderReport:
    """Integrate the identity term by term (remainder inequality form).

    The left integral and the scaled mass are computed directly from u, not
    from the pointwise report, so agreement of ``remainder`` with the summed
    right side genuinely cross-checks the identity.  On the spectral backend
    the quadratic integrals are evaluated in coefficient space: |X L^m u|^2
    does not vanish on the boundary, and interior node quadrature would
    misstate it by an O(h) boundary strip.
    """
    report = _identity(u, eig, ops, m, parity, allow_thin_support)
    lam = eig.eigenvalue
    domain = ops.domain
    power = 2 * m if parity == "even" else 2 * m + 1

    if ops.backend == "spectral":
        coeffs = ops.coefficients(u.values)
        mu = ops.mode_eigenvalues
        lhs_integral = ops.integral_mode_weighted(coeffs, mu**power)
        mass = ops.integral_mode_weighted(coeffs, 1.0)
    else:
        if parity == "even":
            lhs_vals = ops.l_power_values(u.values, m) ** 2
        else:
            lhs_vals = np.sum(
                [g**2 for g in ops.gradient_values(ops.l_power_values(u.values, m))],
                axis=0,
            )
        lhs_integral = integrate_values(domain, lhs_vals)
        mass = integrate_values(domain, u.values**2)

    scaled_mass = lam**power * mass
    remainder = lhs_integral - scaled_mass

    term_integrals = []
    divergence_total = 0.0
    for t in report.rhs_terms:
        if t.kind == "divergence":
            if ops.backend == "spectral":
                # flux of a sine interpolant: the cosine series of its
                # divergence has no constant mode, so the box integral is
                # exactly zero by construction
                continue
            divergence_total += integrate_values(domain, t.values)
        else:
            term_integrals.append((t.name, integrate_values(domain, t.values)))

    balance = abs(remainder - (sum(v for _, v in term_integrals) + divergence_total))
    meta = dict(report.metadata, residual_norm=report.residual_norm)
    return RemainderReport(
        lhs_integral=lhs_integral,
        scaled_mass=scaled_mass,
        remainder=remainder,
        remainder_terms=term_integrals,
        divergence_total=divergence_total,
        balance_error=balance,
        negative_gap=None,
        metadata=meta,
    )


def proportionality_defect(u: GridFunction, phi: GridFunction) -> float:
    """Weighted spread of u/phi over the interior (0 iff u is a multiple of phi).

    Measured on nodes where phi is above the positivity floor; the ratio's
    weighted standard deviation is normalized by its weighted mean square so
    the defect is scale-free in both arguments.
    """
    domain = u.domain
    interior = domain.interior_mask
    top = float(np.abs(phi.values[interior]).max())
    valid = interior & (phi.values >= POSITIVITY_FLOOR * top)
    w = domain.quadrature_weights[valid]
    r = u.values[valid] / phi.values[valid]
    wsum = w.sum()
    mean = float(np.sum(w * r) / wsum)
    var = float(np.sum(w * (r - mean) ** 2) / wsum)
    msq = float(np.sum(w * r**2) / wsum)
    return float(np.sqrt(var / msq)) if msq > 0 else 0.0


def steklov_constant_check(
    domain: GridDomain,
    fields,
    eig: EigenPair,
    trials: int = 100,
    seed: int = 0,
) -> dict:
    """Sharpness probe for ||u||_2 <= lambda^{-1/2} ||Xu||_2.

    Random boundary-vanishing trial functions can only push the ratio
    ||u||/||Xu|| up to the ground state's value; the report records the
    worst ratio seen, the ground state's own ratio, and the sharp constant.
    """
    from .fields import FDOperators
    from .trials import random_sine_sum, random_bump_product

    if trials < 1:
        raise ValueError("trials must be >= 1")
    ops = FDOperators(domain, fields)
    rng = np.random.default_rng(seed)
    bound = eig.eigenvalue ** -0.5

    def ratio(values):
        unorm = np.sqrt(integrate_values(domain, values**2))
        grad = ops.gradient_values(values)
        xnorm = np.sqrt(
            integrate_values(domain, np.sum([g**2 for g in grad], axis=0))
        )
        return unorm / xnorm

    ratios = []
    euclidean_box = fields.name == "euclidean" and domain.is_box
    for _ in range(trials):
        if euclidean_box:
            trial = random_sine_sum(domain, rng)
        else:
            trial = random_bump_product(domain, rng)
        ratios.append(ratio(trial.values))
    ratios = np.asarray(ratios)
    ground = ratio(eig.eigenfunction.values)
    return {
        "lambda": eig.eigenvalue,
        "sharp_constant": bound,
        "max_ratio": float(ratios.max()),
        "mean_ratio": float(ratios.mean()),
        "ground_state_ratio": float(ground),
        "gap_to_sharp": float(bound - ratios.max()),
        "ground_state_gap": float(abs(bound - ground)),
        "trials": trials,
        "seed": seed,
    }
