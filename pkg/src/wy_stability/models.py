"""Concrete mean-curvature families, expansions, and certificates.

Three groups of tools live here:

* the explicit quartic family on the unit sphere,
  ``H = 2 + r^2 sum lam_i x_i^2 - (1/30 - bbar) r^4 sum lam_i^2``,
  whose Brown-York deficit has the closed form
  ``4 pi r^4 (1/30 - bbar) sum lam_i^2`` and which carries an explicit
  negative direction ``eta1 + r^2 eta2`` once bbar exceeds 1/90;

* the small-geodesic-sphere expansion of the Brown-York mass,
  ``m(r) = r^3/12 R + r^5/1440 (24 |Ric|^2 - 13 R^2 + 12 Lap R)``,
  with the case classifier for which curvature data make the leading
  coefficient positive;

* certificate calculators that turn coercivity constants
  (beta, lambda1, alpha) into explicit thresholds (delta, theta)
  guaranteeing positivity of the quadratic form without eigensolving.
  The arithmetic stays in plain Python, so exact ``Fraction`` inputs
  produce exact rational certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .functional import (
    MeanCurvatureField,
    eval_F,
    mean_curvature_field,
)
from .gform import Direction, RicciEigs, eta1_coeffs, optimal_eta2, phi_field
from .harmonics import FieldCoeffs, HarmonicBasis
from .quad import SphereGrid, integrate

__all__ = [
    "CurvatureData",
    "Certificate",
    "ConditionReport",
    "NegativeDirection",
    "h_family",
    "positivity_radius",
    "deficit_closed_form",
    "small_sphere_mass",
    "classify_small_sphere",
    "bbar_from_b",
    "negative_part_certificate",
    "deficit_ratio_certificate",
    "check_deficit_conditions",
    "negative_direction",
    "CASE_I",
    "CASE_II",
    "CASE_III",
    "DEGENERATE",
]

CASE_I = "CASE_I"
CASE_II = "CASE_II"
CASE_III = "CASE_III"
DEGENERATE = "DEGENERATE"


@dataclass(frozen=True)
class CurvatureData:
    """Pointwise curvature data (R, |Ric|^2, Lap R) at a center point.

    Physical data with R = 0 must have lapR >= 0 (a consequence of
    nonnegative scalar curvature attaining an interior minimum); set
    ``synthetic=True`` to bypass that check for sign-exploration inputs.
    An optional eigenvalue triple may accompany the data; when present
    its squared norm must agree with ric_sq.
    """

    R: float
    ric_sq: float
    lapR: float
    lam: Optional[RicciEigs] = None
    synthetic: bool = False

    def __post_init__(self) -> None:
        if self.R < 0:
            raise ValueError(f"scalar curvature must be >= 0, got {self.R}")
        if self.ric_sq < 0:
            raise ValueError(f"|Ric|^2 must be >= 0, got {self.ric_sq}")
        if self.R == 0 and self.lapR < 0 and not self.synthetic:
            raise ValueError(
                "R = 0 forces lapR >= 0 for physical data; pass synthetic=True "
                "to explore the other sign"
            )
        if self.lam is not None:
            if abs(self.lam.sum_sq - self.ric_sq) > 1e-12 * max(1.0, self.ric_sq):
                raise ValueError(
                    f"eigenvalue triple has sum_sq {self.lam.sum_sq}, "
                    f"inconsistent with ric_sq = {self.ric_sq}"
                )


@dataclass(frozen=True)
class Certificate:
    """Explicit positivity thresholds from coercivity constants.

    ``delta`` bounds how negative the deficit 2 - H may get (and, for the
    ratio variant, the L2/L1 deficit ratio); ``theta`` is the weight in
    the negative-part variant and is absent for the ratio variant.
    Fields keep whatever numeric type they were computed with, so exact
    rational inputs give exact rational thresholds.
    """

    beta: object
    lambda1: object
    alpha: object
    inf_h0: object
    sup_h0: object
    delta: object
    theta: object = None

    def __post_init__(self) -> None:
        for name in ("beta", "lambda1", "alpha", "inf_h0", "sup_h0", "delta"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"certificate field {name} must be positive, got {v}")
        if self.theta is not None and not 0 < self.theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")


def h_family(
    eigs: RicciEigs, bbar: float, r: float, grid: SphereGrid
) -> MeanCurvatureField:
    """The quartic perturbation family sampled on the grid.

    ``H = 2 + r^2 phi - (1/30 - bbar) r^4 sum lam_i^2`` with
    ``phi = sum lam_i x_i^2``.  The radius must stay within
    ``positivity_radius(eigs)`` so the field is strictly positive.
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    rmax = positivity_radius(eigs)
    if r > rmax:
        raise ValueError(
            f"r = {r} exceeds the positivity radius {rmax:.6f} for this family"
        )
    samples = (
        2.0
        + r * r * phi_field(eigs, grid)
        - (1.0 / 30.0 - bbar) * r**4 * eigs.sum_sq
    )
    tag = f"h_family(lam={tuple(eigs.lam)!r}, bbar={bbar!r}, r={r!r})"
    return mean_curvature_field(grid, samples, tag=tag)


def positivity_radius(eigs: RicciEigs) -> float:
    """Largest radius with a positive uniform lower bound for the family.

    Bisects ``g(r) = 2 - r^2 sum |lam_i| - (1/45) r^4 sum lam_i^2`` down
    to margin 1e-6; g is strictly decreasing, so the returned radius is
    the unique solution of g(r) = margin.
    """
    if not eigs.sum_sq > 0:
        raise ValueError("positivity radius needs a nonzero eigenvalue triple")
    abs_sum = float(np.abs(eigs.lam).sum())
    sq_sum = eigs.sum_sq
    margin = 1e-6

    def g(r: float) -> float:
        return 2.0 - r * r * abs_sum - (1.0 / 45.0) * r**4 * sq_sum

    hi = 1.0
    while g(hi) > margin:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > margin:
            lo = mid
        else:
            hi = mid
    return lo


def deficit_closed_form(eigs: RicciEigs, bbar: float, r: float) -> float:
    """Closed form of the total deficit int (2 - H) dv for the family."""
    return 4.0 * math.pi * r**4 * (1.0 / 30.0 - bbar) * eigs.sum_sq


def small_sphere_mass(cd: CurvatureData, r: float) -> float:
    """Two-term small-sphere expansion of the Brown-York mass.

    ``m(r) = r^3/12 R + r^5/1440 (24 ric_sq - 13 R^2 + 12 lapR)``; the
    O(r^6) remainder is intentionally not modeled.
    """
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    return (
        r**3 / 12.0 * cd.R
        + r**5 / 1440.0 * (24.0 * cd.ric_sq - 13.0 * cd.R**2 + 12.0 * cd.lapR)
    )


def classify_small_sphere(cd: CurvatureData) -> str:
    """Which curvature data give a positive leading mass coefficient.

    CASE_I: R > 0 (r^3 leading term); CASE_II: R = 0 with ric_sq > 0;
    CASE_III: R = 0, ric_sq = 0, lapR > 0; DEGENERATE otherwise.
    Synthetic data violating lapR >= 0 at R = 0 are rejected here even
    though the container admits them.
    """
    if cd.R > 0:
        return CASE_I
    if cd.lapR < 0:
        raise ValueError(
            "classification requires physical data: R = 0 forces lapR >= 0"
        )
    if cd.ric_sq > 0:
        return CASE_II
    if cd.lapR > 0:
        return CASE_III
    return DEGENERATE


def bbar_from_b(b, cd: CurvatureData):
    """Shift the family parameter: bbar = b - (1/60) lapR / ric_sq."""
    if not cd.ric_sq > 0:
        raise ValueError("bbar shift needs ric_sq > 0")
    return b - cd.lapR / (60 * cd.ric_sq)


def negative_part_certificate(beta, lambda1, alpha, inf_h0, sup_h0) -> Certificate:
    """Certificate tolerating a sign-changing deficit via its negative part.

    With ``alpha1 = min(alpha, inf_h0)``,

        theta = (beta/2) / (1/alpha1 + sup_h0/lambda1 + beta/2),
        delta = (beta/4) / (1/(alpha inf_h0) + 1/lambda1).

    Positivity of the form follows whenever
    ``theta int (2-H) + 2 int (2-H)_- > 0`` and
    ``sup |(2-H)_-| < delta``.
    """
    for name, v in (
        ("beta", beta), ("lambda1", lambda1), ("alpha", alpha),
        ("inf_h0", inf_h0), ("sup_h0", sup_h0),
    ):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    alpha1 = min(alpha, inf_h0)
    half_beta = beta / 2
    # written product-form so exact rational inputs stay exact
    theta = (half_beta * alpha1 * lambda1) / (
        lambda1 + sup_h0 * alpha1 + half_beta * alpha1 * lambda1
    )
    delta = (beta / 4) * (alpha * inf_h0 * lambda1) / (lambda1 + alpha * inf_h0)
    return Certificate(
        beta=beta,
        lambda1=lambda1,
        alpha=alpha,
        inf_h0=inf_h0,
        sup_h0=sup_h0,
        delta=delta,
        theta=theta,
    )


def deficit_ratio_certificate(beta, lambda1, alpha, inf_h0) -> Certificate:
    """Certificate bounding the deficit's negative part and L2/L1 ratio.

    With ``eps1 = beta/4`` and ``eps2 = lambda1 beta/4``,

        delta = min( (1/2) / (1/(eps1 alpha^2) + 1/eps2),
                     (beta/4) / (1/(alpha inf_h0) + 1/lambda1) ).

    Positivity of the form follows whenever ``int (2-H) > 0``,
    ``sup |(2-H)_-| < delta``, and
    ``int (2-H)^2 / int (2-H) < delta``.

    The certificate is built for round reference data, so the recorded
    sup_h0 equals inf_h0.
    """
    for name, v in (
        ("beta", beta), ("lambda1", lambda1), ("alpha", alpha), ("inf_h0", inf_h0),
    ):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    eps1 = beta / 4
    eps2 = lambda1 * beta / 4
    # written product-form so exact rational inputs stay exact
    alpha_sq = alpha * alpha
    first = (eps1 * alpha_sq * eps2) / (2 * (eps2 + eps1 * alpha_sq))
    second = (beta / 4) * (alpha * inf_h0 * lambda1) / (lambda1 + alpha * inf_h0)
    return Certificate(
        beta=beta,
        lambda1=lambda1,
        alpha=alpha,
        inf_h0=inf_h0,
        sup_h0=inf_h0,
        delta=min(first, second),
    )


@dataclass(frozen=True)
class ConditionReport:
    """Quadrature evaluation of the deficit-ratio certificate conditions.

    ``margins`` holds signed distances to each threshold (positive means
    satisfied); the ratio margin is absent when the deficit is not
    positive, since the ratio is then undefined.
    """

    cond_a: bool
    cond_b1: bool
    cond_b2: bool
    margins: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.cond_a and self.cond_b1 and self.cond_b2


def check_deficit_conditions(
    H: MeanCurvatureField, cert: Certificate
) -> ConditionReport:
    """Evaluate the three deficit-ratio conditions for H against 2.

    (a) the total deficit int (2-H) dv is positive; (b1) the negative
    part of the deficit stays below delta in sup norm; (b2) the ratio
    int (2-H)^2 dv / int (2-H) dv stays below delta.
    """
    grid = H.grid
    deficit = 2.0 - H.samples
    total = integrate(grid, deficit)
    neg_sup = float(np.abs(np.minimum(deficit, 0.0)).max())
    delta = float(cert.delta)

    cond_a = total > 0.0
    cond_b1 = neg_sup < delta
    margins = {
        "deficit": total,
        "negative_part": delta - neg_sup,
    }
    if cond_a:
        ratio = integrate(grid, deficit * deficit) / total
        cond_b2 = ratio < delta
        margins["ratio"] = delta - ratio
    else:
        cond_b2 = False
    return ConditionReport(cond_a=cond_a, cond_b1=cond_b1, cond_b2=cond_b2, margins=margins)


@dataclass(frozen=True)
class NegativeDirection:
    """Explicit test direction for the quartic family, with its F value.

    ``guaranteed`` records whether the parameters sit in the regime where
    negativity is assured (bbar > 1/90 and the computed value indeed
    negative); outside it the witness is still returned, with a note.
    """

    eta: FieldCoeffs
    f_value: float
    guaranteed: bool
    note: str = ""


def negative_direction(
    basis: HarmonicBasis,
    eigs: RicciEigs,
    bbar: float,
    r: float,
    a: Direction,
) -> NegativeDirection:
    """Evaluate F on the direction eta1 + r^2 * optimal_eta2.

    For bbar > 1/90 and r small the value is negative with
    ``F / r^4 -> 4 pi (1/90 - bbar) sum lam_i^2``.
    """
    H = h_family(eigs, bbar, r, basis.grid)
    e1 = eta1_coeffs(a, basis.L)
    e2 = optimal_eta2(basis, eigs, a)
    eta = FieldCoeffs(basis.L, e1.c + r * r * e2.c)
    f_value = eval_F(basis, H, eta)

    threshold = 1.0 / 90.0
    if bbar <= threshold:
        return NegativeDirection(
            eta=eta,
            f_value=f_value,
            guaranteed=False,
            note=f"bbar = {bbar} is not above the threshold 1/90; "
            f"no negativity is claimed",
        )
    if f_value >= 0.0:
        return NegativeDirection(
            eta=eta,
            f_value=f_value,
            guaranteed=False,
            note=f"r = {r} lies outside the radius where the r^4 term dominates",
        )
    return NegativeDirection(eta=eta, f_value=f_value, guaranteed=True)
