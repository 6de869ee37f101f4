"""Families of first-order vector fields and their finite-difference action.

A family is N operators X_k = sum_i a_{k,i}(x) d/dx_i.  The associated
sum-of-squares operator applies each X_k twice and adds the results; it is
deliberately composed from first-order applications rather than fused into
a second-order stencil, so that the Euclidean and Heisenberg cases run
through identical code.  Differences are centered and second order; outputs
are zero on non-interior nodes, never one-sided.  Consequently a composed
application of depth r is exact-in-stencil only for functions whose support
collar is at least r: the zeros it reads near the boundary must be honest
zeros of the data.

Built-in families:

* ``euclidean(dim)``      X_k = d/dx_k, so the operator is the Laplacian.
* ``heisenberg()``        X_1 = dx - (y/2) dt, X_2 = dy + (x/2) dt on R^3,
                          the canonical step-2 Hormander family.  Each
                          coefficient is constant along its differentiation
                          axis, which makes discrete divergence terms of
                          compactly supported data telescope to zero exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import accumulate_axis_diff
from .errors import CollarError, DomainError
from .grid import GridDomain, GridFunction

# coefficient spec per field: tuple over axes, entries are float scalars,
# callables of the coordinates, or None for an absent term


@dataclass(frozen=True, eq=False)
class VectorFieldFamily:
    name: str
    dim: int
    coefficients: tuple  # coefficients[k][i]

    @property
    def n_fields(self) -> int:
        return len(self.coefficients)

    def coefficient_arrays(self, domain: GridDomain) -> list:
        """Evaluate every coefficient on the grid (scalars stay scalars)."""
        if domain.dim != self.dim:
            raise DomainError(
                f"family {self.name!r} is {self.dim}-dimensional, domain is {domain.dim}"
            )
        coords = domain.meshgrid()
        out = []
        for k in range(self.n_fields):
            row = []
            for i in range(self.dim):
                c = self.coefficients[k][i]
                if c is None or isinstance(c, (int, float)):
                    row.append(None if c is None else float(c))
                else:
                    arr = np.ascontiguousarray(
                        np.broadcast_to(c(*coords), domain.shape), dtype=float
                    )
                    if not np.all(np.isfinite(arr)):
                        raise DomainError(
                            f"coefficient a[{k},{i}] of {self.name!r} is not finite"
                        )
                    row.append(arr)
            out.append(tuple(row))
        return out


def euclidean(dim: int) -> VectorFieldFamily:
    coeffs = tuple(
        tuple(1.0 if i == k else None for i in range(dim)) for k in range(dim)
    )
    return VectorFieldFamily("euclidean", dim, coeffs)


def heisenberg() -> VectorFieldFamily:
    x1 = (1.0, None, lambda x, y, t: -y / 2.0)
    x2 = (None, 1.0, lambda x, y, t: x / 2.0)
    return VectorFieldFamily("heisenberg", 3, (x1, x2))


def family_from_tables(name: str, domain: GridDomain, tables) -> VectorFieldFamily:
    """Custom family from node-sampled coefficient arrays.

    ``tables[k][i]`` is an array of the grid shape (or None); arrays are
    captured by closure so the family can be re-evaluated on the same grid.
    """
    coeffs = []
    for row in tables:
        entries = []
        for arr in row:
            if arr is None:
                entries.append(None)
            else:
                a = np.asarray(arr, dtype=float)
                if a.shape != domain.shape:
                    raise DomainError("coefficient table shape does not match grid")
                entries.append(lambda *xs, _a=a: _a)
        coeffs.append(tuple(entries))
    return VectorFieldFamily(name, domain.dim, tuple(coeffs))


@dataclass(frozen=True, eq=False)
class VectorGridFunction:
    """One GridFunction per field of a family, on a common domain."""

    components: tuple

    def __post_init__(self):
        d = self.components[0].domain
        for c in self.components[1:]:
            if c.domain is not d and not c.domain.same_grid(d):
                raise DomainError("vector components live on different grids")

    @property
    def domain(self) -> GridDomain:
        return self.components[0].domain

    def __len__(self):
        return len(self.components)

    def __getitem__(self, k):
        return self.components[k]

    def square_length(self) -> np.ndarray:
        """Pointwise |F|^2 = sum_k F_k^2."""
        return np.sum([c.values**2 for c in self.components], axis=0)


class FDOperators:
    """Finite-difference action of one family on one domain.

    Coefficient arrays and the interior mask are evaluated once; all
    applications are pure and reusable across functions on the same grid.
    """

    backend = "finite_difference"

    def __init__(self, domain: GridDomain, family: VectorFieldFamily):
        self.domain = domain
        self.family = family
        self._coeffs = family.coefficient_arrays(domain)
        self._inv2h = tuple(1.0 / (2.0 * h) for h in domain.spacing)
        self._mask = domain.interior_mask

    @property
    def n_fields(self) -> int:
        return self.family.n_fields

    def field_values(self, k: int, values: np.ndarray) -> np.ndarray:
        """X_k applied to raw nodal values; zero on non-interior nodes."""
        if not 0 <= k < self.n_fields:
            raise DomainError(f"field index {k} out of range [0, {self.n_fields})")
        out = np.zeros_like(values)
        for axis, coeff in enumerate(self._coeffs[k]):
            if coeff is None:
                continue
            accumulate_axis_diff(values, coeff, axis, self._inv2h[axis], out)
        out[~self._mask] = 0.0
        return out

    def gradient_values(self, values: np.ndarray) -> list:
        return [self.field_values(k, values) for k in range(self.n_fields)]

    def sublaplacian_values(self, values: np.ndarray) -> np.ndarray:
        out = np.zeros_like(values)
        for k in range(self.n_fields):
            out += self.field_values(k, self.field_values(k, values))
        return out

    def l_power_values(self, values: np.ndarray, j: int) -> np.ndarray:
        if j < 0:
            raise ValueError("power must be >= 0")
        for _ in range(j):
            values = self.sublaplacian_values(values)
        return values

    def divergence_values(self, component_values) -> np.ndarray:
        out = np.zeros_like(component_values[0])
        for k, v in enumerate(component_values):
            out += self.field_values(k, v)
        return out

    # GridFunction-level wrappers

    def field(self, k: int, u: GridFunction) -> GridFunction:
        self._check_domain(u)
        return GridFunction(self.domain, self.field_values(k, u.values))

    def gradient(self, u: GridFunction) -> VectorGridFunction:
        self._check_domain(u)
        return VectorGridFunction(
            tuple(GridFunction(self.domain, v) for v in self.gradient_values(u.values))
        )

    def sublaplacian(self, u: GridFunction) -> GridFunction:
        self._check_domain(u)
        self._check_collar(u, 2)
        return GridFunction(self.domain, self.sublaplacian_values(u.values))

    def l_power(self, u: GridFunction, j: int) -> GridFunction:
        self._check_domain(u)
        self._check_collar(u, 2 * j)
        return GridFunction(self.domain, self.l_power_values(u.values, j))

    def divergence(self, F: VectorGridFunction) -> GridFunction:
        if len(F) != self.n_fields:
            raise DomainError(
                f"vector has {len(F)} components, family has {self.n_fields}"
            )
        self._check_domain(F[0])
        return GridFunction(
            self.domain, self.divergence_values([c.values for c in F.components])
        )

    def _check_domain(self, u: GridFunction):
        if u.domain is not self.domain and not u.domain.same_grid(self.domain):
            raise DomainError("function domain does not match operator domain")

    def _check_collar(self, u: GridFunction, needed: int):
        # only tagged (compactly supported) functions carry the contract
        if u.collar is not None and u.collar < needed:
            raise CollarError(
                f"support collar {u.collar} too thin: operator depth {needed} "
                f"would read invented boundary zeros"
            )


# module-level operation surface

def apply_field(fields: VectorFieldFamily, k: int, u: GridFunction) -> GridFunction:
    """Single component X_k u (centered differences, zero off the interior)."""
    return FDOperators(u.domain, fields).field(k, u)


def apply_gradient(fields: VectorFieldFamily, u: GridFunction) -> VectorGridFunction:
    return FDOperators(u.domain, fields).gradient(u)


def apply_sublaplacian(fields: VectorFieldFamily, u: GridFunction) -> GridFunction:
    return FDOperators(u.domain, fields).sublaplacian(u)


def apply_L_power(fields: VectorFieldFamily, u: GridFunction, j: int) -> GridFunction:
    return FDOperators(u.domain, fields).l_power(u, j)


def divergence(fields: VectorFieldFamily, F: VectorGridFunction) -> GridFunction:
    return FDOperators(F.domain, fields).divergence(F)
