"""Discretized bounded domains and grid-sampled functions.

A domain is a coordinate box with a uniform tensor grid.  General (curved)
domains are represented by masking: the interior mask marks the nodes
strictly inside, and the quadrature weights are product-trapezoid weights
zeroed outside the interior.  Because functions of interest vanish on the
boundary, dropping the boundary half-weights does not cost accuracy: the
rule stays second order for smooth integrands that vanish on the boundary,
and it makes discrete divergence terms of compactly supported data cancel
by plain telescoping.

Compact support is a grid-level notion here: a function tagged compactly
supported is exactly zero on all non-interior nodes and on a collar of
interior nodes next to them, wide enough that composed difference stencils
never read values that the discretization had to invent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .errors import DomainError

MIN_POINTS = 9


def _as_tuple(x, dim=None, cast=float):
    if np.isscalar(x):
        x = (x,)
    t = tuple(cast(v) for v in x)
    if dim is not None and len(t) != dim:
        raise DomainError(f"expected {dim} per-axis values, got {len(t)}")
    return t


@dataclass(frozen=True, eq=False)
class GridDomain:
    """Rectangular bounding box with interior mask and quadrature weights."""

    lower: tuple
    upper: tuple
    points: tuple
    interior_mask: np.ndarray
    quadrature_weights: np.ndarray
    mask_name: str = "box"

    def __post_init__(self):
        self.interior_mask.setflags(write=False)
        self.quadrature_weights.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def spacing(self) -> tuple:
        return tuple(
            (u - l) / (n - 1) for l, u, n in zip(self.lower, self.upper, self.points)
        )

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def is_box(self) -> bool:
        """True when the interior is exactly the inner block of the box."""
        inner = np.zeros(self.shape, dtype=bool)
        inner[tuple(slice(1, -1) for _ in range(self.dim))] = True
        return bool(np.array_equal(self.interior_mask, inner))

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(l, u, n)
            for l, u, n in zip(self.lower, self.upper, self.points)
        ]

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def interior_depth(self) -> np.ndarray:
        """Per-node number of axis steps to the nearest non-interior node.

        Depth 0 marks non-interior nodes; depth k interior nodes survive k
        erosions with the one-step cross stencil (the reach of one centered
        difference).
        """
        cross = ndimage.generate_binary_structure(self.dim, 1)
        depth = np.zeros(self.shape, dtype=np.int32)
        mask = self.interior_mask.copy()
        while mask.any():
            depth[mask] += 1
            mask = ndimage.binary_erosion(mask, structure=cross, border_value=0)
        return depth

    def same_grid(self, other: "GridDomain") -> bool:
        return (
            self.points == other.points
            and self.lower == other.lower
            and self.upper == other.upper
            and np.array_equal(self.interior_mask, other.interior_mask)
        )


def build_box_domain(lower, upper, points) -> GridDomain:
    """Open coordinate box; interior = all nodes off the bounding box faces."""
    lower = _as_tuple(lower)
    upper = _as_tuple(upper, dim=len(lower))
    points = _as_tuple(points, dim=len(lower), cast=int)
    if not 1 <= len(points) <= 3:
        raise DomainError(f"dimension must be 1, 2 or 3, got {len(points)}")
    for l, u in zip(lower, upper):
        if not u > l:
            raise DomainError(f"degenerate axis: upper {u} <= lower {l}")
    for n in points:
        if n < MIN_POINTS:
            raise DomainError(f"too few points: {n} < {MIN_POINTS}")

    mask = np.zeros(points, dtype=bool)
    mask[tuple(slice(1, -1) for _ in points)] = True
    weights = _interior_weights(lower, upper, points, mask)
    return GridDomain(lower, upper, points, mask, weights, mask_name="box")


def build_masked_domain(box: GridDomain, indicator: Callable, name: str = "custom") -> GridDomain:
    """Restrict a box's interior by a pointwise indicator on coordinates.

    ``indicator`` receives the dim coordinate arrays and returns a boolean
    array; the new interior is the box interior intersected with it.
    """
    coords = box.meshgrid()
    keep = np.asarray(indicator(*coords), dtype=bool)
    if keep.shape != box.shape:
        raise DomainError("indicator returned wrong shape")
    mask = box.interior_mask & keep
    if not mask.any():
        raise DomainError("empty interior after masking")
    weights = _interior_weights(box.lower, box.upper, box.points, mask)
    return GridDomain(box.lower, box.upper, box.points, mask, weights, mask_name=name)


def _interior_weights(lower, upper, points, mask):
    # product-trapezoid weights; interior nodes never sit on a box face, so
    # the surviving weight is the full cell volume at every interior node
    w = np.zeros(points, dtype=float)
    cell = np.prod([(u - l) / (n - 1) for l, u, n in zip(lower, upper, points)])
    w[mask] = cell
    return w


def named_mask(name: str, box: GridDomain, params: dict | None = None) -> GridDomain:
    """Build one of the named masked domains: box, disk, annulus."""
    params = dict(params or {})
    if name == "box":
        return box
    center = params.get("center")
    if center is None:
        center = tuple((l + u) / 2 for l, u in zip(box.lower, box.upper))
    center = _as_tuple(center, dim=box.dim)
    half = min((u - l) / 2 for l, u in zip(box.lower, box.upper))
    if name == "disk":
        radius = float(params.get("radius", 0.9 * half))
        return build_masked_domain(
            box,
            lambda *xs: sum((x - c) ** 2 for x, c in zip(xs, center)) < radius**2,
            name="disk",
        )
    if name == "annulus":
        r_out = float(params.get("radius_outer", 0.9 * half))
        r_in = float(params.get("radius_inner", 0.45 * half))
        return build_masked_domain(
            box,
            lambda *xs: (
                (sum((x - c) ** 2 for x, c in zip(xs, center)) < r_out**2)
                & (sum((x - c) ** 2 for x, c in zip(xs, center)) > r_in**2)
            ),
            name="annulus",
        )
    raise DomainError(f"unknown mask name: {name!r}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values sampled on a GridDomain.

    ``collar`` is None for general functions.  A non-None collar tags the
    function as compactly supported: zero on non-interior nodes and on all
    interior nodes of depth <= collar.
    """

    domain: GridDomain
    values: np.ndarray
    collar: int | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.shape != self.domain.shape:
            raise DomainError(
                f"values shape {v.shape} does not match grid {self.domain.shape}"
            )
        object.__setattr__(self, "values", v)
        v.setflags(write=False)

    @classmethod
    def from_callable(cls, domain: GridDomain, f: Callable) -> "GridFunction":
        return cls(domain, np.asarray(f(*domain.meshgrid()), dtype=float))

    @classmethod
    def compactly_supported(
        cls, domain: GridDomain, values: np.ndarray, collar: int = 1
    ) -> "GridFunction":
        """Zero everything at depth <= collar and tag the result."""
        v = np.array(values, dtype=float)
        v[domain.interior_depth() <= collar] = 0.0
        return cls(domain, v, collar=collar)

    def measured_collar(self) -> int:
        """Widest collar the actual zero pattern supports (capped at grid size).

        Values below 1e-13 of the peak count as zeros: sampling functions
        like sin(k pi x) at the far box face leaves k*eps dust there.
        """
        top = float(np.abs(self.values).max())
        nz = np.abs(self.values) > 1e-13 * top
        if not nz.any():
            return max(self.domain.points)
        depth = self.domain.interior_depth()
        return int(depth[nz].min()) - 1

    def __add__(self, other):
        return GridFunction(self.domain, self.values + _vals(other))

    def __sub__(self, other):
        return GridFunction(self.domain, self.values - _vals(other))

    def __mul__(self, other):
        return GridFunction(self.domain, self.values * _vals(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.domain, -self.values)


def _vals(x):
    return x.values if isinstance(x, GridFunction) else x


def integrate(f: GridFunction) -> float:
    """Quadrature of f over the domain interior (realizes the volume form)."""
    return float(np.sum(f.domain.quadrature_weights * f.values))


def integrate_values(domain: GridDomain, values: np.ndarray) -> float:
    return float(np.sum(domain.quadrature_weights * values))


def weighted_norm(domain: GridDomain, values: np.ndarray) -> float:
    """Quadrature-weighted 2-norm of nodal values."""
    return float(np.sqrt(np.sum(domain.quadrature_weights * values**2)))
