"""Point estimation, shock-robust variances, and test statistics.

The estimator is the ratio ``beta_hat = sum(Z*Y) / sum(Z*X)``.  Variance
estimators aggregate residuals to sector level first, so every statistic
here reduces to operations on the J-vector of sector residual sums

    a_j = sum_i e_b[i] * S[i, j]

which is also what makes re-evaluating a statistic across thousands of
simulated shock vectors cheap: ``a`` is fixed, only the shocks move.

Batched kernels accept an (L, J) matrix of shock draws and return the
numerator and studentizer per draw; division and degenerate-draw
handling are left to the caller.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .design import ShiftShareDesign, null_residuals
from .errors import (
    DataValidationError,
    DegenerateInstrumentError,
    NotReducedFormError,
    ZeroVarianceError,
)

# |sum(Z*X)| at or below this multiple of sum(|Z*X|) means the first
# stage carries no signal and ratios of the form (.)/sum(Z*X) are noise.
DEGENERATE_DENOM_RTOL = 1e-14

# Studentizers at or below this are treated as numerically zero.
ZERO_STUDENTIZER = 1e-300


class VarianceKind(enum.Enum):
    NULL_IMPOSED = "null_imposed"
    PLUG_IN = "plug_in"


@dataclass(frozen=True)
class EstimateResult:
    """Shift-share point estimate.

    Attributes
    ----------
    beta_hat : float
        The ratio estimator ``sum(Z*Y) / sum(Z*X)``.
    denom : float
        First-stage cross moment ``sum(Z*X)``.
    """

    beta_hat: float
    denom: float


@dataclass(frozen=True)
class VarianceResult:
    """A shock-robust variance estimate.

    Attributes
    ----------
    value : float
        The variance estimate, ``sum(per_sector_terms) / denom**2``.
    kind : VarianceKind
        Null-imposed (residuals at the hypothesized b) or plug-in
        (residuals at the point estimate).
    per_sector_terms : ndarray
        Squared sector-level (or cluster-level) sums forming the
        numerator, exposed for concentration diagnostics.
    denom : float
        The denominator base before squaring: ``sum(Z*X)`` for the
        null-imposed kind, ``sum(X**2)`` for the plug-in kind.
    """

    value: float
    kind: VarianceKind
    per_sector_terms: np.ndarray
    denom: float


def _first_stage_denom(design: ShiftShareDesign) -> float:
    denom = float(design.Z @ design.X)
    gross = float(np.abs(design.Z * design.X).sum())
    if abs(denom) <= DEGENERATE_DENOM_RTOL * gross or gross == 0.0:
        raise DegenerateInstrumentError(
            f"first-stage cross moment sum(Z*X) = {denom:.3e} is degenerate "
            f"relative to sum(|Z*X|) = {gross:.3e}"
        )
    return denom


def shift_share_estimate(design: ShiftShareDesign) -> EstimateResult:
    """Compute ``beta_hat = sum(Z*Y) / sum(Z*X)``.

    Raises a degenerate-instrument error when the denominator is zero
    or negligible relative to its gross magnitude.
    """
    denom = _first_stage_denom(design)
    return EstimateResult(beta_hat=float(design.Z @ design.Y) / denom, denom=denom)


def sector_residual_sums(S: np.ndarray, e_b: np.ndarray) -> np.ndarray:
    """Aggregate residuals to sector level: ``a = S' e_b``, shape (J,)."""
    return np.asarray(S).T @ np.asarray(e_b)


def variance_null_imposed(design: ShiftShareDesign, b: float) -> VarianceResult:
    """Null-imposed variance: ``sum_j (a_j g_j)^2 / (sum(Z*X))^2``
    with ``a_j`` built from residuals at the hypothesized ``b``."""
    denom = _first_stage_denom(design)
    a = sector_residual_sums(design.S, null_residuals(design, b).e_b)
    terms = (a * design.g) ** 2
    return VarianceResult(
        value=float(terms.sum()) / denom**2,
        kind=VarianceKind.NULL_IMPOSED,
        per_sector_terms=terms,
        denom=denom,
    )


def variance_plugin(design: ShiftShareDesign) -> VarianceResult:
    """Plug-in variance with residuals at the point estimate and
    denominator ``(sum(X**2))^2``; requires the reduced form (X = Z),
    where that denominator coincides with ``(sum(Z*X))^2``."""
    if not design.reduced_form:
        raise NotReducedFormError(
            "plug-in variance divides by (sum(X^2))^2, which matches the "
            "instrument cross moment only when X equals Z"
        )
    beta_hat = shift_share_estimate(design).beta_hat
    a = sector_residual_sums(design.S, design.Y - beta_hat * design.X)
    terms = (a * design.g) ** 2
    denom = float(design.X @ design.X)
    return VarianceResult(
        value=float(terms.sum()) / denom**2,
        kind=VarianceKind.PLUG_IN,
        per_sector_terms=terms,
        denom=denom,
    )


def cluster_members(cluster_ids: np.ndarray) -> np.ndarray:
    """One-hot membership matrix, shape (J, C), from integer labels."""
    cluster_ids = np.asarray(cluster_ids)
    uniq = np.unique(cluster_ids)
    return (cluster_ids[:, None] == uniq[None, :]).astype(np.float64)


def variance_clustered(design: ShiftShareDesign, b: float) -> VarianceResult:
    """Null-imposed variance with the numerator summed within shock
    clusters: ``sum_c (sum_{j in c} a_j g_j)^2 / (sum(Z*X))^2``."""
    if design.cluster_ids is None:
        raise DataValidationError("design has no cluster_ids; clustered variance needs them")
    denom = _first_stage_denom(design)
    a = sector_residual_sums(design.S, null_residuals(design, b).e_b)
    per_cluster = (a * design.g) @ cluster_members(design.cluster_ids)
    terms = per_cluster**2
    return VarianceResult(
        value=float(terms.sum()) / denom**2,
        kind=VarianceKind.NULL_IMPOSED,
        per_sector_terms=terms,
        denom=denom,
    )


# ---------------------------------------------------------------------------
# Batched statistic kernels over an (L, J) matrix of shock draws.
# Each returns (num, den) per draw; the statistic is num/den where den
# is valid.  ``a`` is the fixed sector residual sum vector.


def batch_t0(a: np.ndarray, G: np.ndarray, N: int) -> np.ndarray:
    """Unstudentized statistic ``(1/N) sum_j a_j g_j`` per draw."""
    return (G @ a) / float(N)


def batch_t1(a: np.ndarray, G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Null-studentized statistic: numerator ``sum_j a_j g_j``,
    studentizer ``sqrt(sum_j a_j^2 g_j^2)``."""
    num = G @ a
    den = np.sqrt((G * G) @ (a * a))
    return num, den


def batch_t1_clustered(
    a: np.ndarray, G: np.ndarray, members: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """T1 with the studentizer summing ``a_j g_j`` within clusters
    before squaring; ``members`` is the (J, C) one-hot matrix."""
    num = G @ a
    per_cluster = (G * a[None, :]) @ members
    den = np.sqrt((per_cluster**2).sum(axis=1))
    return num, den


def batch_t2(a: np.ndarray, G: np.ndarray, S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Estimate-studentized statistic for reduced-form designs.

    Per draw g*: with Z* = S g*, the numerator is sum_i Z*_i e_b[i] =
    sum_j a_j g*_j; the studentizer rebuilds plug-in residuals by
    partialling Z* out of e_b, which at sector level is
    a~ = a - (num / sum Z*^2) * S'Z*.
    """
    num = G @ a
    Zs = G @ S.T
    ssq = (Zs * Zs).sum(axis=1)
    W = Zs @ S
    safe = np.where(ssq > 0, ssq, 1.0)
    delta = num / safe
    a_tilde = a[None, :] - delta[:, None] * W
    den = np.sqrt(((a_tilde * G) ** 2).sum(axis=1))
    den = np.where(ssq > 0, den, 0.0)
    return num, den


def _scalar(num: np.ndarray, den: np.ndarray, what: str) -> float:
    num, den = float(num[0]), float(den[0])
    if not np.isfinite(den) or den <= ZERO_STUDENTIZER:
        raise ZeroVarianceError(f"{what}: studentizer {den:.3e} is numerically zero")
    return num / den


def stat_t0(g: np.ndarray, S: np.ndarray, e_b: np.ndarray) -> float:
    """Unstudentized statistic ``(1/N) sum_i (s_i'g) e_b[i]``."""
    S = np.asarray(S, dtype=np.float64)
    a = sector_residual_sums(S, np.asarray(e_b, dtype=np.float64))
    return float(batch_t0(a, np.asarray(g, dtype=np.float64)[None, :], S.shape[0])[0])


def stat_t1(design: ShiftShareDesign, b: float, clustered: bool = False) -> float:
    """Null-studentized statistic at the observed shocks.

    Evaluates the residual form ``sum_j a_j g_j / sqrt(sum_j a_j^2
    g_j^2)``, which agrees with ``(beta_hat - b)/sqrt(V)`` under the
    null-imposed variance whenever ``sum(Z*X) > 0`` (always in the
    reduced form).  With ``clustered=True`` the studentizer sums within
    shock clusters before squaring.
    """
    a = sector_residual_sums(design.S, null_residuals(design, b).e_b)
    G = design.g[None, :]
    if clustered:
        if design.cluster_ids is None:
            raise DataValidationError("clustered studentizer requested but design has no cluster_ids")
        num, den = batch_t1_clustered(a, G, cluster_members(design.cluster_ids))
    else:
        num, den = batch_t1(a, G)
    return _scalar(num, den, "T1")


def stat_t2(design: ShiftShareDesign, b: float) -> float:
    """Estimate-studentized statistic ``(beta_hat - b)/sqrt(V_plugin)``
    at the observed shocks; reduced-form designs only."""
    if not design.reduced_form:
        raise NotReducedFormError("T2 is defined for reduced-form designs (X = Z) only")
    a = sector_residual_sums(design.S, null_residuals(design, b).e_b)
    num, den = batch_t2(a, design.g[None, :], design.S)
    return _scalar(num, den, "T2")
