"""Seeded trial functions for identity fixtures and sharpness probes.

Two families, matching the two operator backends:

* sums of a few low sine modes on a box — vanish on the boundary, are
  reproduced exactly by the sine-spectral backend, and keep Rayleigh
  quotients a safe distance above the ground state;
* products of per-axis polynomial bumps supported on a strict subbox —
  exactly zero outside it, so composed difference stencils of any tested
  depth only ever read honest zeros near the boundary.  The bump is
  ((x-a)(b-x))^8 normalized to unit height, C^7 across the support edge,
  smooth enough for clean second-order convergence of eighth-derivative
  identities.
"""

from __future__ import annotations

import numpy as np

from .grid import GridDomain, GridFunction


def sine_sum(domain: GridDomain, modes, amplitudes) -> GridFunction:
    """sum_k a_k * prod_i sin(k_i pi (x_i - l_i)/ell_i) sampled on the grid."""
    coords = domain.meshgrid()
    vals = np.zeros(domain.shape)
    for k_tuple, amp in zip(modes, amplitudes):
        if np.isscalar(k_tuple):
            k_tuple = (k_tuple,)
        term = np.full(domain.shape, amp)
        for x, k, l, u in zip(coords, k_tuple, domain.lower, domain.upper):
            term = term * np.sin(k * np.pi * (x - l) / (u - l))
        vals += term
    return GridFunction(domain, vals)


def draw_sine_params(
    rng: np.random.Generator,
    dim: int,
    n_modes: tuple = (3, 7),
    max_mode: int = 8,
):
    """3..7 random tensor modes with 1/|k|^2-damped random amplitudes.

    Drawing parameters separately from sampling keeps one trial function
    fixed across a refinement sweep.
    """
    count = int(rng.integers(n_modes[0], n_modes[1] + 1))
    modes, amps = [], []
    for _ in range(count):
        k = tuple(int(rng.integers(1, max_mode + 1)) for _ in range(dim))
        amp = float(rng.uniform(-1.0, 1.0)) / sum(ki**2 for ki in k)
        modes.append(k)
        amps.append(amp)
    return modes, amps


def random_sine_sum(
    domain: GridDomain,
    rng: np.random.Generator,
    n_modes: tuple = (3, 7),
    max_mode: int = 8,
) -> GridFunction:
    modes, amps = draw_sine_params(rng, domain.dim, n_modes, max_mode)
    return sine_sum(domain, modes, amps)


def bump_profile(x: np.ndarray, a: float, b: float, power: int = 8) -> np.ndarray:
    """Unit-height polynomial bump supported exactly on [a, b]."""
    t = (x - a) * (b - x)
    t = np.where(t > 0.0, t, 0.0)
    peak = ((b - a) / 2.0) ** 2
    return (t / peak) ** power


def bump_product(
    domain: GridDomain, margin: float = 0.18, power: int = 8
) -> GridFunction:
    """Product of per-axis bumps on the subbox with relative margin cut off."""
    coords = domain.meshgrid()
    vals = np.ones(domain.shape)
    for x, l, u in zip(coords, domain.lower, domain.upper):
        pad = margin * (u - l)
        vals = vals * bump_profile(x, l + pad, u - pad, power)
    return GridFunction(domain, vals, collar=_collar_of(domain, vals))


def draw_bump_params(
    rng: np.random.Generator,
    dim: int,
    margin: float = 0.15,
    nonnegative: bool = False,
) -> dict:
    return {
        "pads": [margin + 0.05 * float(rng.uniform()) for _ in range(dim)],
        "c0": float(rng.uniform(0.25, 1.0)),
        "c1": float(rng.uniform(-1.0, 1.0)),
        "c2": [float(rng.uniform(-0.5, 0.5)) for _ in range(dim)],
        "nonnegative": nonnegative,
    }


def bump_from_params(domain: GridDomain, params: dict) -> GridFunction:
    """Bump product modulated by a low-order polynomial (params from a draw).

    With ``nonnegative`` the modulation is squared, which keeps the trial a
    legitimate argument for even-power identities.
    """
    coords = domain.meshgrid()
    vals = np.ones(domain.shape)
    mod = np.full(domain.shape, params["c0"])
    for i, (x, l, u) in enumerate(zip(coords, domain.lower, domain.upper)):
        pad = params["pads"][i] * (u - l)
        vals = vals * bump_profile(x, l + pad, u - pad)
        s = (x - l) / (u - l)
        mod = mod + params["c1"] * (s - 0.5) + params["c2"][i] * (s - 0.5) ** 2
    if params.get("nonnegative"):
        mod = mod**2
    vals = vals * mod
    return GridFunction(domain, vals, collar=_collar_of(domain, vals))


def random_bump_product(
    domain: GridDomain,
    rng: np.random.Generator,
    margin: float = 0.15,
    nonnegative: bool = False,
) -> GridFunction:
    return bump_from_params(
        domain, draw_bump_params(rng, domain.dim, margin, nonnegative)
    )


def _collar_of(domain: GridDomain, vals: np.ndarray) -> int:
    nz = vals != 0.0
    if not nz.any():
        return max(domain.points)
    depth = domain.interior_depth()
    return int(depth[nz].min()) - 1
