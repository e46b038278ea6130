"""Second-variation quadratic form on the round unit sphere.

For a positive mean-curvature field H on the unit sphere (where the
round data have H0 = 2 and the support function weight equals the
metric), the quadratic form under study is

    F_H(eta) = int [ (Lap eta)^2 / H + (1 - H) |grad eta|^2 ] dv,

with polarization Q_H.  At H = H0 the form is nonnegative and its
kernel is spanned by {1, x1, x2, x3}; on that kernel and general H the
form collapses to the closed expression

    F_H(a0 + <a, x>) = |a|^2 int (2 - H) dv + int <a, x>^2 (2 - H)^2 / H dv.

Positivity of F_H over mean-zero directions is decided through the
matrix pencil M v = lambda K v, where M is the Gram matrix of Q_H over
the harmonics of degree l >= 1 and K = diag(l^2 (l+1)^2) is the Gram
matrix of int (Lap eta)^2.  Constants are excluded: both forms vanish
on them identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .harmonics import FieldCoeffs, HarmonicBasis, gradient_dot, index_of, laplacian, synthesize
from .quad import SphereGrid, integrate

__all__ = [
    "MeanCurvatureField",
    "HessianPencil",
    "KernelDecomposition",
    "mean_curvature_field",
    "eval_F",
    "eval_Q",
    "kernel_closed_form",
    "assemble_pencil",
    "min_pencil_eigenvalue",
    "decompose_kernel",
]


@dataclass(frozen=True)
class MeanCurvatureField:
    """Positive mean-curvature samples on a quadrature grid.

    Attributes
    ----------
    grid : SphereGrid
    samples : ndarray, shape (n_nodes,)
        Strictly positive values of H at the nodes.
    inf_h, sup_h : float
        Cached extrema of the samples.
    tag : str
        Optional provenance note (for example the parameters of a
        synthetic family); empty for ad hoc fields.
    """

    grid: SphereGrid
    samples: NDArray[np.float64]
    inf_h: float
    sup_h: float
    tag: str = ""


def mean_curvature_field(
    grid: SphereGrid, samples: NDArray[np.float64], tag: str = ""
) -> MeanCurvatureField:
    """Validate and wrap nodal samples of H."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (grid.n_nodes,):
        raise ValueError(
            f"samples has shape {samples.shape}, expected ({grid.n_nodes},)"
        )
    lo = float(samples.min())
    if not lo > 0.0:
        raise ValueError(f"mean curvature must be positive everywhere; min = {lo}")
    return MeanCurvatureField(
        grid=grid,
        samples=samples,
        inf_h=lo,
        sup_h=float(samples.max()),
        tag=tag,
    )


def constant_field(grid: SphereGrid, value: float) -> MeanCurvatureField:
    """Convenience constructor for H identically equal to ``value``."""
    return mean_curvature_field(grid, np.full(grid.n_nodes, float(value)), tag=f"const={value!r}")


@dataclass(frozen=True)
class HessianPencil:
    """Dense symmetric pencil (M, K) over harmonics of degree >= 1.

    ``M[i, j]`` is the polarized form Q_H on basis pair (i, j); ``kdiag``
    holds the exact diagonal l^2 (l+1)^2 of the comparison form
    int (Lap eta)^2.  Row index order follows the basis with the l=0
    entry removed.
    """

    L: int
    M: NDArray[np.float64]
    kdiag: NDArray[np.float64]
    degrees: NDArray[np.int64]
    orders: NDArray[np.int64]


@dataclass(frozen=True)
class KernelDecomposition:
    """Split of a field into a0 * 1 + <a, x> + (degree >= 2 remainder)."""

    a0: float
    a: NDArray[np.float64]
    eta2: FieldCoeffs


def _check_field(basis: HarmonicBasis, H: MeanCurvatureField) -> None:
    if H.grid is not basis.grid and H.grid.n_nodes != basis.grid.n_nodes:
        raise ValueError("mean curvature field and basis use different grids")


def eval_F(basis: HarmonicBasis, H: MeanCurvatureField, eta: FieldCoeffs) -> float:
    """Evaluate F_H(eta) by spectral differentiation and quadrature."""
    _check_field(basis, H)
    lap = synthesize(basis, laplacian(basis, eta))
    grad2 = gradient_dot(basis, eta, eta)
    return integrate(basis.grid, lap * lap / H.samples + (1.0 - H.samples) * grad2)


def eval_Q(
    basis: HarmonicBasis,
    H: MeanCurvatureField,
    eta1: FieldCoeffs,
    eta2: FieldCoeffs,
) -> float:
    """Polarized form Q_H(eta1, eta2); Q_H(eta, eta) = F_H(eta)."""
    _check_field(basis, H)
    lap1 = synthesize(basis, laplacian(basis, eta1))
    lap2 = synthesize(basis, laplacian(basis, eta2))
    grad12 = gradient_dot(basis, eta1, eta2)
    return integrate(basis.grid, lap1 * lap2 / H.samples + (1.0 - H.samples) * grad12)


def kernel_closed_form(H: MeanCurvatureField, a0: float, a: NDArray[np.float64]) -> float:
    """Closed form of F_H on the span of {1, x1, x2, x3}.

    The constant component a0 is annihilated by the form and does not
    enter the value; it is accepted so kernel decompositions can be fed
    through unchanged.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"a has shape {a.shape}, expected (3,)")
    del a0  # the form vanishes on constants
    grid = H.grid
    deficit = 2.0 - H.samples
    u = grid.xyz @ a
    norm_term = float(a @ a) * integrate(grid, deficit)
    weighted = integrate(grid, u * u * deficit * deficit / H.samples)
    return norm_term + weighted


def assemble_pencil(basis: HarmonicBasis, H: MeanCurvatureField) -> HessianPencil:
    """Assemble the dense pencil (M, K) over degrees l >= 1.

    M is built from the same derivative tables eval_Q uses, as a sum of
    three congruence products, then symmetrized; the recorded asymmetry
    must stay below 1e-12 of the norm.
    """
    _check_field(basis, H)
    grid = basis.grid
    sel = basis.degrees >= 1
    vals = basis.values[sel]
    dth = basis.dtheta[sel]
    dph = basis.dphi[sel]
    mu = basis.eigenvalues[sel]

    w_over_h = grid.weights / H.samples
    w_one_minus = grid.weights * (1.0 - H.samples)
    inv_s2 = 1.0 / grid.sin_theta**2

    lap_tab = vals * mu[:, None]
    M = (lap_tab * w_over_h) @ lap_tab.T
    M += (dth * w_one_minus) @ dth.T
    M += (dph * (w_one_minus * inv_s2)) @ dph.T

    asym = np.abs(M - M.T).max()
    scale = np.abs(M).max()
    if asym > 1e-12 * max(scale, 1.0):
        raise AssertionError(f"pencil assembly asymmetry {asym} exceeds tolerance")
    M = 0.5 * (M + M.T)

    degrees = basis.degrees[sel]
    kdiag = (degrees * (degrees + 1)) ** 2
    return HessianPencil(
        L=basis.L,
        M=M,
        kdiag=kdiag.astype(np.float64),
        degrees=degrees,
        orders=basis.orders[sel],
    )


def min_pencil_eigenvalue(
    pencil: HessianPencil, restrict: bool = False
) -> tuple[float, FieldCoeffs]:
    """Smallest generalized eigenvalue of M v = lambda K v, with witness.

    Parameters
    ----------
    restrict : bool
        When true, restrict to degrees l >= 2 (the orthogonal complement
        of the geometric kernel); otherwise all l >= 1 rows participate.

    Returns
    -------
    (value, witness)
        The minimum Rayleigh quotient F_H(eta) / int (Lap eta)^2 over the
        truncated space and a unit-L2-norm witness with deterministic
        sign (largest-magnitude coefficient positive).  The witness is
        returned as full coefficients with the l = 0 slot zero.
    """
    keep = pencil.degrees >= 2 if restrict else slice(None)
    M = pencil.M[keep][:, keep] if restrict else pencil.M
    k = pencil.kdiag[keep] if restrict else pencil.kdiag

    inv_sqrt_k = 1.0 / np.sqrt(k)
    Mt = M * np.outer(inv_sqrt_k, inv_sqrt_k)
    try:
        evals, evecs = np.linalg.eigh(Mt)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise RuntimeError(f"symmetric eigensolver did not converge: {exc}") from exc
    value = float(evals[0])
    v = evecs[:, 0] * inv_sqrt_k

    n_full = (pencil.L + 1) ** 2
    c = np.zeros(n_full)
    rows = np.arange(1, n_full)
    c[rows[keep] if restrict else rows] = v
    nrm = np.linalg.norm(c)
    c /= nrm
    imax = np.argmax(np.abs(c))
    if c[imax] < 0:
        c = -c
    return value, FieldCoeffs(pencil.L, c)


def decompose_kernel(basis: HarmonicBasis, coeffs: FieldCoeffs) -> KernelDecomposition:
    """Split coefficients into constant, linear, and l >= 2 parts.

    Returns the coefficients of the function written as
    ``a0 + a1 x1 + a2 x2 + a3 x3 + eta2`` with eta2 supported on l >= 2.
    """
    if coeffs.L != basis.L:
        raise ValueError(
            f"coefficients truncated at L={coeffs.L}, basis built for L={basis.L}"
        )
    c = coeffs.c
    a0 = float(c[0] / math.sqrt(4.0 * math.pi))
    scale = math.sqrt(3.0 / (4.0 * math.pi))
    a = np.array(
        [
            scale * c[index_of(1, 1)],
            scale * c[index_of(1, -1)],
            scale * c[index_of(1, 0)],
        ]
    )
    c2 = c.copy()
    c2[:4] = 0.0
    return KernelDecomposition(a0=a0, a=a, eta2=FieldCoeffs(coeffs.L, c2))
