"""Quadrature on the unit round sphere.

The grid is a tensor product of a Gauss-Legendre rule in ``cos(theta)``
with a uniform trapezoid rule in ``phi``.  Such a rule integrates any
polynomial in the ambient coordinates ``(x1, x2, x3)`` restricted to the
sphere exactly (up to roundoff) as long as the total degree does not
exceed ``min(2*n_theta - 1, n_phi - 1)``.

Exact reference values for monomial integrals come from the closed form

    (1/4pi) * int x1^p x2^q x3^r dv
        = (p-1)!! (q-1)!! (r-1)!! / (p+q+r+1)!!   (all exponents even)

and zero whenever any exponent is odd.  The rational factor is kept exact
so that quadrature accuracy can be measured against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "SphereGrid",
    "build_grid",
    "integrate",
    "monomial_integral",
    "poly_integral",
]

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class SphereGrid:
    """Quadrature nodes and weights on the unit sphere.

    Attributes
    ----------
    n_theta, n_phi : int
        Number of colatitude and longitude nodes.
    theta, phi : ndarray, shape (n_nodes,)
        Node angles, flattened theta-major (node k = i_theta * n_phi + j_phi).
    weights : ndarray, shape (n_nodes,)
        Positive quadrature weights summing to 4*pi.
    xyz : ndarray, shape (n_nodes, 3)
        Unit Cartesian coordinates of the nodes.
    """

    n_theta: int
    n_phi: int
    theta: NDArray[np.float64]
    phi: NDArray[np.float64]
    weights: NDArray[np.float64]
    xyz: NDArray[np.float64]

    @property
    def n_nodes(self) -> int:
        return self.n_theta * self.n_phi

    @property
    def exact_degree(self) -> int:
        """Largest polynomial total degree integrated exactly."""
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    @property
    def sin_theta(self) -> NDArray[np.float64]:
        return np.sin(self.theta)


def build_grid(n_theta: int, n_phi: int) -> SphereGrid:
    """Build the product quadrature grid.

    Parameters
    ----------
    n_theta : int
        Gauss-Legendre node count in cos(theta); must be >= 2.
    n_phi : int
        Uniform node count in phi; must be >= 4.

    Returns
    -------
    SphereGrid
    """
    if n_theta < 2:
        raise ValueError(f"n_theta must be >= 2, got {n_theta}")
    if n_phi < 4:
        raise ValueError(f"n_phi must be >= 4, got {n_phi}")

    x, wx = np.polynomial.legendre.leggauss(n_theta)
    # leggauss returns nodes increasing in x = cos(theta); no node hits the
    # poles because the Legendre nodes are interior to (-1, 1).
    theta_1d = np.arccos(x)
    phi_1d = 2.0 * np.pi * np.arange(n_phi) / n_phi
    w_phi = 2.0 * np.pi / n_phi

    theta = np.repeat(theta_1d, n_phi)
    phi = np.tile(phi_1d, n_theta)
    weights = np.repeat(wx * w_phi, n_phi)

    sin_t = np.sin(theta)
    xyz = np.stack(
        [sin_t * np.cos(phi), sin_t * np.sin(phi), np.cos(theta)], axis=1
    )
    return SphereGrid(
        n_theta=n_theta,
        n_phi=n_phi,
        theta=theta,
        phi=phi,
        weights=weights,
        xyz=xyz,
    )


def integrate(grid: SphereGrid, samples: NDArray[np.float64]) -> float:
    """Integrate nodal samples of a function over the sphere.

    Parameters
    ----------
    grid : SphereGrid
    samples : ndarray, shape (n_nodes,)
        Function values at the grid nodes, in grid node order.

    Returns
    -------
    float
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (grid.n_nodes,):
        raise ValueError(
            f"samples has shape {samples.shape}, expected ({grid.n_nodes},)"
        )
    return float(grid.weights @ samples)


def _double_factorial(n: int) -> int:
    """(n)!! for n >= -1, with (-1)!! = 0!! = 1."""
    if n < -1:
        raise ValueError(f"double factorial undefined for {n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def monomial_integral(p: int, q: int, r: int) -> Fraction:
    """Exact sphere integral of x1^p x2^q x3^r as a rational multiple of 4*pi.

    Parameters
    ----------
    p, q, r : int
        Nonnegative exponents.

    Returns
    -------
    Fraction
        The exact value of ``(1/4pi) * int x1^p x2^q x3^r dv``.  Zero when
        any exponent is odd.
    """
    for e in (p, q, r):
        if e < 0 or e != int(e):
            raise ValueError(f"exponents must be nonnegative integers, got {(p, q, r)}")
    if (p % 2) or (q % 2) or (r % 2):
        return Fraction(0)
    num = (
        _double_factorial(p - 1)
        * _double_factorial(q - 1)
        * _double_factorial(r - 1)
    )
    return Fraction(num, _double_factorial(p + q + r + 1))


def poly_integral(terms: list[tuple[float, int, int, int]]) -> float:
    """Integrate a polynomial in ambient coordinates over the sphere.

    Parameters
    ----------
    terms : list of (coefficient, p, q, r)
        The polynomial ``sum c * x1^p x2^q x3^r``.

    Returns
    -------
    float
        The integral, evaluated in double precision at the end; the
        per-monomial rational factors are exact.
    """
    total = 0.0
    for coeff, p, q, r in terms:
        frac = monomial_integral(p, q, r)
        if frac:
            total += float(coeff) * (frac.numerator / frac.denominator)
    return FOUR_PI * total
