"""Leading-order energy form G for quartic curvature perturbations.

For a traceless triple lam = (lam1, lam2, lam3) and a unit direction a,
set phi = sum lam_i x_i^2 and eta1 = <a, x>.  The degree-four term of
the energy along the perturbation family is the functional

    G(eta2) = 4 pi (1/30 - bbar) sum lam_i^2
              + (1/2) int eta1^2 phi^2 dv
              - 2 int phi [ Lap(eta1) Lap(eta2) / 4 + <grad eta1, grad eta2> ] dv
              + int [ (Lap eta2)^2 / 2 - |grad eta2|^2 ] dv

over fields eta2 orthogonal to {1, x1, x2, x3}.  Writing
A = int eta1^2 phi^2 dv and D = A - (16 pi / 75) sum a_i^2 lam_i^2,
the minimum over eta2 reduces to the scalar quadratic

    alpha - 2 beta t + gamma t^2,
    alpha = 4 pi (1/30 - bbar) sum lam_i^2 + A / 2,
    beta = (5/6) sqrt(D),   gamma = 5/12,

whose discriminant beta^2 - alpha gamma equals
-(1/54 - (5/3) bbar) pi sum lam_i^2.  The sign flips exactly at
bbar = 1/90: below it the minimum 4 pi (1/90 - bbar) sum lam_i^2 is
positive, above it the optimal eta2 = (1/6)(phi eta1 - xi) drives G
negative, where xi = (2/5) sum a_i lam_i x_i is the linear component of
phi eta1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .harmonics import (
    FieldCoeffs,
    HarmonicBasis,
    analyze,
    gradient_dot,
    index_of,
    laplacian,
    project,
    synthesize,
)
from .quad import SphereGrid, integrate

__all__ = [
    "RicciEigs",
    "Direction",
    "GQuadratic",
    "phi_field",
    "eta1_coeffs",
    "compute_A",
    "compute_xi",
    "g_quadratic",
    "eval_G",
    "eval_B",
    "optimal_eta2",
    "minimize_G",
    "classify_bbar",
    "POSITIVE",
    "INDEFINITE",
    "BORDERLINE",
    "THRESHOLD_BBAR",
]

POSITIVE = "POSITIVE"
INDEFINITE = "INDEFINITE"
BORDERLINE = "BORDERLINE"

THRESHOLD_BBAR = 1.0 / 90.0

GAMMA_COEF = 5.0 / 12.0


@dataclass(frozen=True)
class RicciEigs:
    """Traceless eigenvalue triple driving the quadratic perturbation."""

    lam: NDArray[np.float64]

    def __post_init__(self) -> None:
        lam = np.asarray(self.lam, dtype=np.float64)
        if lam.shape != (3,):
            raise ValueError(f"lam has shape {lam.shape}, expected (3,)")
        object.__setattr__(self, "lam", lam)
        tol = 1e-14 * max(1.0, float(np.abs(lam).sum()))
        if abs(float(lam.sum())) > tol:
            raise ValueError(f"lam must sum to zero, got sum = {lam.sum()}")

    @property
    def sum_sq(self) -> float:
        return float(self.lam @ self.lam)


@dataclass(frozen=True)
class Direction:
    """Unit vector selecting the linear kernel direction eta1 = <a, x>."""

    a: NDArray[np.float64]

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=np.float64)
        if a.shape != (3,):
            raise ValueError(f"a has shape {a.shape}, expected (3,)")
        object.__setattr__(self, "a", a)
        if abs(float(a @ a) - 1.0) > 1e-14:
            raise ValueError(f"direction must be unit length, |a|^2 = {a @ a}")


@dataclass(frozen=True)
class GQuadratic:
    """Scalar quadratic reduction of min G along the optimal ray."""

    A: float
    D: float
    alpha: float
    beta_coef: float
    gamma_coef: float
    discriminant: float
    bbar: float

    def __post_init__(self) -> None:
        if not (self.A > 0 and self.D > 0):
            raise AssertionError(
                f"internal inconsistency: A = {self.A} and D = {self.D} must both "
                f"be positive for a valid eigenvalue triple"
            )

    @property
    def min_value(self) -> float:
        """(alpha gamma - beta^2) / gamma, the global minimum of G."""
        return (self.alpha * self.gamma_coef - self.beta_coef**2) / self.gamma_coef


def phi_field(eigs: RicciEigs, grid: SphereGrid) -> NDArray[np.float64]:
    """Nodal samples of phi = sum lam_i x_i^2."""
    return (grid.xyz**2) @ eigs.lam


def eta1_coeffs(direction: Direction, L: int) -> FieldCoeffs:
    """Exact spectral coefficients of eta1 = <a, x> (pure degree 1)."""
    c = np.zeros((L + 1) ** 2)
    s = math.sqrt(4.0 * math.pi / 3.0)
    c[index_of(1, 1)] = s * direction.a[0]
    c[index_of(1, -1)] = s * direction.a[1]
    c[index_of(1, 0)] = s * direction.a[2]
    return FieldCoeffs(L, c)


def compute_A(eigs: RicciEigs, direction: Direction) -> float:
    """Closed form of A = int eta1^2 phi^2 dv.

    Expanding the quartic polynomial against the exact monomial table
    gives ``16 pi (2 sum a_i^2 lam_i^2 / 105 + sum lam_i^2 / 210)``.
    """
    lam = eigs.lam
    a = direction.a
    return 16.0 * math.pi * (
        2.0 * float((a**2) @ (lam**2)) / 105.0 + float(lam @ lam) / 210.0
    )


def compute_xi(eigs: RicciEigs, direction: Direction, grid: SphereGrid) -> NDArray[np.float64]:
    """Nodal samples of xi = (2/5) sum a_i lam_i x_i.

    xi is the projection of phi * eta1 onto the span of the coordinate
    functions; phi * eta1 - xi is then a pure degree-3 eigenfunction.
    """
    return 0.4 * (grid.xyz @ (direction.a * eigs.lam))


def g_quadratic(eigs: RicciEigs, direction: Direction, bbar: float) -> GQuadratic:
    """Scalar quadratic alpha - 2 beta t + gamma t^2 controlling min G."""
    A = compute_A(eigs, direction)
    D = A - (16.0 * math.pi / 75.0) * float((direction.a**2) @ (eigs.lam**2))
    alpha = 4.0 * math.pi * (1.0 / 30.0 - bbar) * eigs.sum_sq + 0.5 * A
    beta = (5.0 / 6.0) * math.sqrt(D)
    return GQuadratic(
        A=A,
        D=D,
        alpha=alpha,
        beta_coef=beta,
        gamma_coef=GAMMA_COEF,
        discriminant=beta * beta - alpha * GAMMA_COEF,
        bbar=bbar,
    )


def _require_complement(eta2: FieldCoeffs) -> None:
    if np.any(eta2.c[:4] != 0.0):
        raise ValueError(
            "eta2 must be supported on degrees l >= 2; project onto the "
            "kernel complement before calling"
        )


def eval_G(
    basis: HarmonicBasis,
    eigs: RicciEigs,
    direction: Direction,
    bbar: float,
    eta2: FieldCoeffs,
) -> float:
    """Evaluate G(eta2) by quadrature on the basis grid."""
    _require_complement(eta2)
    grid = basis.grid
    phi = phi_field(eigs, grid)
    e1 = eta1_coeffs(direction, basis.L)
    eta1 = synthesize(basis, e1)

    const = 4.0 * math.pi * (1.0 / 30.0 - bbar) * eigs.sum_sq
    quart = 0.5 * integrate(grid, eta1 * eta1 * phi * phi)

    lap2 = synthesize(basis, laplacian(basis, eta2))
    cross_density = phi * (-2.0 * eta1 * lap2 / 4.0 + gradient_dot(basis, e1, eta2))
    cross = -2.0 * integrate(grid, cross_density)

    quad = integrate(grid, 0.5 * lap2 * lap2 - gradient_dot(basis, eta2, eta2))
    return const + quart + cross + quad


def eval_B(
    basis: HarmonicBasis,
    eigs: RicciEigs,
    direction: Direction,
    eta2: FieldCoeffs,
) -> tuple[float, float]:
    """Both sides of the cross-term identity.

    Returns ``(lhs, rhs)`` with
    ``lhs = int phi [Lap(eta1) Lap(eta2)/4 + <grad eta1, grad eta2>] dv``
    and ``rhs = 10 int phi eta1 eta2 dv``; the two agree for any eta2
    orthogonal to the kernel.
    """
    _require_complement(eta2)
    grid = basis.grid
    phi = phi_field(eigs, grid)
    e1 = eta1_coeffs(direction, basis.L)
    eta1 = synthesize(basis, e1)
    lap2 = synthesize(basis, laplacian(basis, eta2))
    lhs = integrate(grid, phi * (-2.0 * eta1 * lap2 / 4.0 + gradient_dot(basis, e1, eta2)))
    rhs = 10.0 * integrate(grid, phi * eta1 * synthesize(basis, eta2))
    return lhs, rhs


def optimal_eta2(
    basis: HarmonicBasis, eigs: RicciEigs, direction: Direction
) -> FieldCoeffs:
    """The minimizing field (1/6)(phi eta1 - xi), pure degree 3.

    The sampled field is analyzed and projected onto the degree-3
    eigenspace, which removes only quadrature dust: phi eta1 - xi is an
    exact -12 eigenfunction of the Laplacian.
    """
    grid = basis.grid
    phi = phi_field(eigs, grid)
    e1 = eta1_coeffs(direction, basis.L)
    samples = (phi * synthesize(basis, e1) - compute_xi(eigs, direction, grid)) / 6.0
    return project(basis, analyze(basis, samples), 3)


def minimize_G(
    basis: HarmonicBasis,
    eigs: RicciEigs,
    direction: Direction,
    bbar: float,
) -> tuple[float, FieldCoeffs]:
    """Minimize G over all degree >= 2 fields by a stationarity solve.

    This is an independent route to the minimum: the quadratic part of G
    is assembled as a dense Gram matrix by quadrature (not through the
    spectral diagonal), the linear part from the cross-term integrand,
    and the symmetric positive definite system is solved directly.  A
    Tikhonov shift of 1e-12 is applied only if the factorization fails.

    Returns the minimum value and the minimizing coefficients.
    """
    grid = basis.grid
    phi = phi_field(eigs, grid)
    e1 = eta1_coeffs(direction, basis.L)
    eta1 = synthesize(basis, e1)

    sel = basis.degrees >= 2
    vals = basis.values[sel]
    dth = basis.dtheta[sel]
    dph = basis.dphi[sel]
    mu = basis.eigenvalues[sel]

    w = grid.weights
    inv_s2 = 1.0 / grid.sin_theta**2
    lap_tab = vals * mu[:, None]

    # quadratic part: int [Lap(u) Lap(v) / 2 - <grad u, grad v>] dv
    Q2 = 0.5 * (lap_tab * w) @ lap_tab.T
    Q2 -= (dth * w) @ dth.T
    Q2 -= (dph * (w * inv_s2)) @ dph.T
    Q2 = 0.5 * (Q2 + Q2.T)

    # linear part: G contains -2 * b . v with
    # b_i = int phi [Lap(eta1) Lap(Y_i)/4 + <grad eta1, grad Y_i>] dv
    eta1_t = basis.dtheta.T @ e1.c
    eta1_p = basis.dphi.T @ e1.c
    dens = phi * w
    b = (vals * (-mu[:, None])) @ (dens * (-2.0 * eta1) / 4.0)
    b += dth @ (dens * eta1_t) + dph @ (dens * eta1_p * inv_s2)

    try:
        v = np.linalg.solve(Q2, b)
    except np.linalg.LinAlgError:
        shift = 1e-12 * np.abs(np.diag(Q2)).max()
        v = np.linalg.solve(Q2 + shift * np.eye(Q2.shape[0]), b)

    const = 4.0 * math.pi * (1.0 / 30.0 - bbar) * eigs.sum_sq
    quart = 0.5 * integrate(grid, eta1 * eta1 * phi * phi)
    value = const + quart - float(b @ v)

    c = np.zeros((basis.L + 1) ** 2)
    c[sel] = v
    return value, FieldCoeffs(basis.L, c)


def classify_bbar(bbar: float, band: float = 1e-9) -> str:
    """Positivity verdict for the quartic family at parameter bbar.

    The minimum of G is 4 pi (1/90 - bbar) sum lam_i^2, so the verdict
    depends only on the position of bbar relative to 1/90; ``band`` sets
    the half-width of the BORDERLINE strip around the threshold.
    """
    if band < 0:
        raise ValueError(f"band must be nonnegative, got {band}")
    if bbar < THRESHOLD_BBAR - band:
        return POSITIVE
    if bbar > THRESHOLD_BBAR + band:
        return INDEFINITE
    return BORDERLINE
