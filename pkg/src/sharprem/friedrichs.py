"""Power-of-two Friedrichs representation formulas and sigma arithmetic.

For exponents p_m = 2^m the gap |Xu|^{p_m} + (L phi/phi + sigma_m) u^{p_m}
splits, for ANY strictly positive C^2 weight phi (no eigen-equation
required), into squares of power differences plus one flux term.  The
constants sigma_m = sum_{j<m} 4^{p_j - 1} grow doubly exponentially:
sigma_m ~ 4^{2^{m-1}-1} overflows float64 beyond m = 10, and the limit
sigma_m^{1/p_m} -> 2 is only observable in the log domain, so sigma is
carried as log(sigma) with exact-integer cross-checks where representable.

Integrating the m-th formula with phi the Dirichlet ground state replaces
L phi/phi by -lambda_1 and yields the remainder form of the L^{2^m}
Friedrichs inequality -- remembering that lambda_1 - sigma_m may well be
negative, in which case the identity still balances but bounds nothing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CollarError, DomainError, PositivityError
from .grid import GridFunction, integrate_values
from .eigensolve import EigenPair
from .steklov import (
    IdentityReport,
    IdentityTerm,
    RemainderReport,
    _finalize,
    _require_collar,
    eigen_quotient,
)

LN4 = math.log(4.0)
EXACT_SIGMA_MAX = 20  # exact ints stay cheap through m = 20 (~3e5 digits)
FLOAT_SIGMA_MAX = 10  # sigma_11 ~ 4^1023 overflows float64


def _logsumexp(vals) -> float:
    # the exponents here are strictly increasing and far apart, so the sum
    # is 1 + a fast-decaying tail; plain math beats an array round-trip
    top = max(vals)
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


@dataclass(frozen=True)
class FriedrichsParams:
    """Exponent p = 2^m and log-domain sigma for one order m."""

    m: int
    p: int
    log_sigma: float  # -inf encodes sigma_1 = 0
    sigma_exact: int | None = None

    @property
    def sigma(self) -> float:
        """sigma as a float (inf beyond the representable range)."""
        return math.exp(self.log_sigma) if self.log_sigma > -math.inf else 0.0

    @property
    def root(self) -> float:
        """sigma^{1/p}, the quantity with limit 2."""
        if self.log_sigma == -math.inf:
            return 0.0
        return math.exp(self.log_sigma / self.p)


def sigma(m: int, exact: bool = True) -> FriedrichsParams:
    """Constants of the order-m formula: p_m = 2^m, sigma_m = sum 4^{p_j - 1}.

    ``exact=False`` skips the arbitrary-precision cross-check value, whose
    ~10^5-digit integers dominate the cost of large-m tables.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    p = 2**m
    if m == 1:
        return FriedrichsParams(1, 2, -math.inf, 0)
    exponents = [(2**j - 1) * LN4 for j in range(1, m)]
    log_sig = _logsumexp(exponents)
    sigma_exact = None
    if exact and m <= EXACT_SIGMA_MAX:
        sigma_exact = sum(4 ** (2**j - 1) for j in range(1, m))
    return FriedrichsParams(m, p, log_sig, sigma_exact)


def sigma_bounds(m: int) -> tuple:
    """Sandwich bounds for sigma_m^{1/p_m}: [4^{(p_{m-1}-1)/p_m}, ((m-1)/4)^{1/p_m} 4^{1/2}]."""
    if m < 2:
        raise ValueError("bounds hold for m >= 2")
    p = 2**m
    p_prev = 2 ** (m - 1)
    lower = math.exp(LN4 * (p_prev - 1) / p)
    upper = math.exp(math.log((m - 1) / 4.0) / p + LN4 * p_prev / p)
    return lower, upper


@dataclass(frozen=True)
class SigmaRow:
    m: int
    p: int
    log_sigma: float
    root: float
    lower: float
    upper: float


def sigma_asymptotics(m_max: int) -> list:
    """Table of sigma_m^{1/p_m} against its sandwich for m = 2..m_max."""
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    rows = []
    for m in range(2, m_max + 1):
        par = sigma(m, exact=False)
        lower, upper = sigma_bounds(m)
        root = par.root
        if not (lower * (1 - 1e-12) <= root <= upper * (1 + 1e-12)):
            raise AssertionError(
                f"sigma bounds violated at m={m}: {lower} <= {root} <= {upper}"
            )
        rows.append(SigmaRow(m, par.p, par.log_sigma, root, lower, upper))
    return rows


def _powers_of_u(u_vals: np.ndarray, m: int):
    """u^{p_r} for r = 0..m with underflow accounting."""
    pows = [np.array(u_vals)]
    for _ in range(m):
        pows.append(pows[-1] ** 2)
    underflow = int(np.count_nonzero((u_vals != 0.0) & (pows[m] == 0.0)))
    return pows, underflow


def _friedrichs_terms(u_vals, q, ops, m):
    """Squares and flux of the order-m formula (everything except the lhs)."""
    upow, underflow = _powers_of_u(u_vals, m)
    terms = []
    for j in range(1, m):
        v = upow[m - j - 1]
        grad_v = ops.gradient_values(v)
        p_j = 2**j
        xv_len = np.sum([g**2 for g in grad_v], axis=0) ** (p_j / 2)
        t = (xv_len - 2.0 ** (p_j - 1) * upow[m - 1]) ** 2
        terms.append(IdentityTerm(f"square_X_pow_j{j}", "square_X", j, t))
    w = upow[m - 1]
    grad_w = ops.gradient_values(w)
    phi_sq = np.sum([(g - qk * w) ** 2 for g, qk in zip(grad_w, q)], axis=0)
    terms.append(IdentityTerm("square_X_phi", "square_X", None, phi_sq))
    flux = ops.divergence_values([qk * upow[m] for qk in q])
    terms.append(IdentityTerm("divergence", "divergence", None, flux))
    return upow, terms, underflow


def _sanitize_u(u: GridFunction, ops, m: int, allow_thin_support: bool):
    notices = []
    u_vals = u.values
    if np.any(u_vals[ops.domain.interior_mask] < 0.0):
        warnings.warn(
            "friedrichs evaluators take u >= 0; substituting |u|", stacklevel=3
        )
        u_vals = np.abs(u_vals)
        notices.append("substituted |u| for signed input")
    if ops.backend == "finite_difference":
        # all u-compositions are depth 1, but (L phi/phi) u^{p_m} touches the
        # depth-2 garbage of L phi; for p_m >= 4 the power of a
        # boundary-vanishing u crushes it below the h^2 signal, for m = 1 it
        # does not, so only m = 1 needs an honest two-node collar
        _require_collar(u, 2 if m == 1 else 0, allow_thin_support)
    return u_vals, notices


def friedrichs_identity(
    u: GridFunction,
    phi: GridFunction,
    ops,
    m: int,
    allow_thin_support: bool = False,
) -> IdentityReport:
    """Pointwise order-m formula for an arbitrary positive weight phi."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > FLOAT_SIGMA_MAX:
        raise DomainError(f"sigma_{m} is not float-representable; m <= {FLOAT_SIGMA_MAX}")
    u_vals, notices = _sanitize_u(u, ops, m, allow_thin_support)
    par = sigma(m)
    q, valid = eigen_quotient(ops, phi.values)
    if np.any(ops.domain.interior_mask & ~valid & (u_vals != 0.0)):
        raise PositivityError("phi is below the positivity floor on the support of u")

    lphi = ops.sublaplacian_values(phi.values)
    lq = np.zeros(ops.domain.shape)
    np.divide(lphi, phi.values, out=lq, where=valid)

    upow, terms, underflow = _friedrichs_terms(u_vals, q, ops, m)
    grad_u = ops.gradient_values(u_vals)
    xu_len = np.sum([g**2 for g in grad_u], axis=0) ** (par.p / 2)
    lhs = xu_len + (lq + par.sigma) * upow[m]

    meta = {
        "kind": "friedrichs_identity",
        "m": m,
        "p": par.p,
        "sigma": par.sigma,
        "backend": ops.backend,
        "family": ops.family.name,
        "points": list(ops.domain.points),
        "underflow_nodes": underflow,
        "notices": notices,
    }
    return _finalize(ops.domain, lhs, terms, valid, meta)


def friedrichs_remainder(
    u: GridFunction,
    eig: EigenPair,
    ops,
    m: int,
    allow_thin_support: bool = False,
) -> RemainderReport:
    """Integrated form with the ground state: the L^{2^m} remainder.

    Reports the sign of lambda_1 - sigma_m; a negative gap means the
    identity balances but implies no Friedrichs inequality.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > FLOAT_SIGMA_MAX:
        raise DomainError(f"sigma_{m} is not float-representable; m <= {FLOAT_SIGMA_MAX}")
    u_vals, notices = _sanitize_u(u, ops, m, allow_thin_support)
    par = sigma(m)
    lam = eig.eigenvalue
    gap = lam - par.sigma
    domain = ops.domain

    q, valid = eigen_quotient(ops, eig.eigenfunction.values)
    if np.any(domain.interior_mask & ~valid & (u_vals != 0.0)):
        raise PositivityError("ground state below the positivity floor on supp(u)")
    upow, terms, underflow = _friedrichs_terms(u_vals, q, ops, m)

    invalid = ~valid
    if ops.backend == "spectral" and m == 1:
        coeffs = ops.coefficients(u_vals)
        lhs_integral = ops.integral_mode_weighted(coeffs, ops.mode_eigenvalues)
        mass = ops.integral_mode_weighted(coeffs, 1.0)
    else:
        grad_u = ops.gradient_values(u_vals)
        xu_len = np.sum([g**2 for g in grad_u], axis=0) ** (par.p / 2)
        xu_len[invalid] = 0.0
        lhs_integral = integrate_values(domain, xu_len)
        mass_vals = np.array(upow[m])
        mass_vals[invalid] = 0.0
        mass = integrate_values(domain, mass_vals)
    scaled_mass = gap * mass
    remainder = lhs_integral - scaled_mass

    term_integrals = []
    divergence_total = 0.0
    for t in terms:
        v = np.array(t.values)
        v[invalid] = 0.0
        if t.kind == "divergence":
            if ops.backend == "spectral":
                continue  # exact zero: the flux series has no constant mode
            divergence_total += integrate_values(domain, v)
        else:
            term_integrals.append((t.name, integrate_values(domain, v)))

    balance = abs(remainder - (sum(v for _, v in term_integrals) + divergence_total))
    meta = {
        "kind": "friedrichs_remainder",
        "m": m,
        "p": par.p,
        "sigma": par.sigma,
        "lambda": lam,
        "gap": gap,
        "backend": ops.backend,
        "family": ops.family.name,
        "points": list(domain.points),
        "underflow_nodes": underflow,
        "notices": notices,
        "eigen_residual": eig.residual_norm,
    }
    return RemainderReport(
        lhs_integral=lhs_integral,
        scaled_mass=scaled_mass,
        remainder=remainder,
        remainder_terms=term_integrals,
        divergence_total=divergence_total,
        balance_error=balance,
        negative_gap=bool(gap < 0),
        metadata=meta,
    )
