"""Randomization-inference engine: finite-draw tests, exact enumeration,
nuisance-corrected p-values, and confidence intervals by inversion.

The test compares the observed statistic with its distribution under L
simulated shock vectors.  With K simulated values at least as extreme
as the observed one, the p-value is (1 + K)/(L + 1) and the decision
uses the order-statistic form: reject when the observed value strictly
exceeds the k-th smallest simulated value, k = L + 1 - ceil(alpha(L+1)).
The two forms agree on every instance, ties included; both are exposed.

Determinism contract: each draw l has its own counter-based generator
keyed by (seed, draw domain, l), so results are bit-identical for any
worker count, and extending L keeps the first draws unchanged.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .design import ShiftShareDesign, demean_shocks, null_residuals
from .errors import (
    ConfigError,
    DataValidationError,
    DegenerateDrawError,
    EnumerationSizeError,
    NotReducedFormError,
    ZeroVarianceError,
)
from .estimator import (
    ZERO_STUDENTIZER,
    batch_t0,
    batch_t1,
    batch_t1_clustered,
    batch_t2,
    cluster_members,
    sector_residual_sums,
)
from .rng import draw_stream
from .schemes import KnownDistribution, Permutation, SignChange, SimulationScheme

# Replacement attempts per degenerate draw before giving up; the global
# budget is therefore at most 10 * L discarded draws.
MAX_ATTEMPTS_PER_DRAW = 10

# Draw-generation work is split into fixed-size chunks; the partition is
# independent of the worker count, so threading cannot change results.
_CHUNK = 256

ENUMERATION_LIMIT = 2**20


class Statistic(enum.Enum):
    """Which test statistic to simulate.

    T0 is the unstudentized exposure-weighted residual average, T1 the
    null-studentized ratio, T2 the estimate-studentized ratio (reduced
    form only).
    """

    T0 = "t0"
    T1 = "t1"
    T2 = "t2"


class Sidedness(enum.Enum):
    TWO_SIDED_ABS = "two-sided-abs"
    RIGHT_TAIL = "right-tail"
    LEFT_TAIL = "left-tail"
    EQUAL_TAIL = "equal-tail"


@dataclass(frozen=True)
class TestSpec:
    """Everything that defines one randomization test.

    Attributes
    ----------
    b : float
        Null value for the coefficient.
    statistic : Statistic
    scheme : SimulationScheme
    L : int
        Number of simulated draws (default 999, making alpha*(L+1)
        integral for the usual levels).
    alpha : float
        Nominal level in (0, 1).
    sidedness : Sidedness
        How simulated and observed statistics are compared.  EqualTail
        runs the two one-sided tests at alpha/2 each and rejects on
        either; its reported p-value is min(1, 2*min(p_left, p_right)).
    seed : int
        Base seed for the per-draw generators.
    demean : bool
        Subtract the cross-sector mean from observed and simulated
        shocks before evaluating statistics.
    cluster_studentizer : bool
        For T1, sum sector terms within shock clusters before squaring
        in the studentizer (requires cluster labels on the design).
    """

    __test__ = False  # not a test case, despite the Test* name

    b: float
    statistic: Statistic
    scheme: SimulationScheme
    L: int = 999
    alpha: float = 0.05
    sidedness: Sidedness = Sidedness.TWO_SIDED_ABS
    seed: int = 0
    demean: bool = False
    cluster_studentizer: bool = False

    def __post_init__(self):
        if not np.isfinite(self.b):
            raise ConfigError(f"null value b must be finite, got {self.b}")
        if not isinstance(self.L, int) or self.L < 1:
            raise ConfigError(f"L must be a positive integer, got {self.L}")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.cluster_studentizer and self.statistic is not Statistic.T1:
            raise ConfigError("cluster_studentizer applies to the T1 statistic only")


@dataclass(frozen=True)
class RITestResult:
    """Outcome of one randomization test.

    Attributes
    ----------
    t_obs : float
        Statistic at the observed shocks.
    t_sims : ndarray
        Simulated statistics; length L (or the group size under exact
        enumeration).
    p_value : float
        Finite-draw p-value in (0, 1].
    reject : bool
        Order-statistic decision at the requested level.
    n_degenerate_redraws : int
        Draws discarded for a numerically zero studentizer.
    """

    t_obs: float
    t_sims: np.ndarray
    p_value: float
    reject: bool
    n_degenerate_redraws: int


def critical_count(alpha: float, L: int) -> int:
    """ceil(alpha * (L + 1)) with a guard against float noise just
    above an integer (0.05 * 1000 must give 50, not 51)."""
    return max(1, math.ceil(alpha * (L + 1) - 1e-9))


def psi(values, sidedness: Sidedness):
    """Map statistics to the scale on which extremeness is judged."""
    values = np.asarray(values)
    if sidedness is Sidedness.TWO_SIDED_ABS:
        return np.abs(values)
    if sidedness is Sidedness.RIGHT_TAIL:
        return values
    if sidedness is Sidedness.LEFT_TAIL:
        return -values
    raise ConfigError("equal-tail tests are decided per side; psi is undefined for them")


def p_value_from_stats(t_obs: float, t_sims: np.ndarray, sidedness: Sidedness) -> float:
    """Finite-draw p-value (1 + #{psi(sim) >= psi(obs)}) / (L + 1)."""
    L = t_sims.shape[0]
    if sidedness is Sidedness.EQUAL_TAIL:
        p_right = (1 + int(np.count_nonzero(t_sims >= t_obs))) / (L + 1)
        p_left = (1 + int(np.count_nonzero(-t_sims >= -t_obs))) / (L + 1)
        return min(1.0, 2.0 * min(p_right, p_left))
    count = int(np.count_nonzero(psi(t_sims, sidedness) >= psi(t_obs, sidedness)))
    return (1 + count) / (L + 1)


def reject_by_pvalue(t_obs: float, t_sims: np.ndarray, alpha: float, sidedness: Sidedness) -> bool:
    """p-value rejection rule: p <= ceil(alpha(L+1))/(L+1), per side at
    alpha/2 for equal-tail tests."""
    L = t_sims.shape[0]
    if sidedness is Sidedness.EQUAL_TAIL:
        return reject_by_pvalue(t_obs, t_sims, alpha / 2, Sidedness.RIGHT_TAIL) or reject_by_pvalue(
            t_obs, t_sims, alpha / 2, Sidedness.LEFT_TAIL
        )
    c = critical_count(alpha, L)
    return p_value_from_stats(t_obs, t_sims, sidedness) <= c / (L + 1)


def reject_by_order_statistic(
    t_obs: float, t_sims: np.ndarray, alpha: float, sidedness: Sidedness
) -> bool:
    """Order-statistic rejection rule: psi(t_obs) strictly exceeds the
    k-th smallest simulated psi value, k = L + 1 - ceil(alpha(L+1));
    k = 0 means always reject."""
    L = t_sims.shape[0]
    if sidedness is Sidedness.EQUAL_TAIL:
        return reject_by_order_statistic(
            t_obs, t_sims, alpha / 2, Sidedness.RIGHT_TAIL
        ) or reject_by_order_statistic(t_obs, t_sims, alpha / 2, Sidedness.LEFT_TAIL)
    c = critical_count(alpha, L)
    k = L + 1 - c
    if k <= 0:
        return True
    kth = np.partition(psi(t_sims, sidedness), k - 1)[k - 1]
    return bool(psi(t_obs, sidedness) > kth)


# ---------------------------------------------------------------------------
# Draw generation


def generate_draws(
    design: ShiftShareDesign,
    scheme: SimulationScheme,
    L: int,
    seed: int,
    b: float = 0.0,
    threads: int = 1,
) -> np.ndarray:
    """Simulated shock matrix of shape (L, J), draw l from its own
    generator keyed by (seed, l).

    Identical for any thread count; user samplers see the null
    residuals at ``b``.
    """
    e_b = null_residuals(design, b).e_b
    G = np.empty((int(L), design.J))

    def fill(lo, hi):
        for l in range(lo, hi):
            G[l] = scheme.draw(
                draw_stream(seed, l), design.S, e_b, design.g, cluster_ids=design.cluster_ids
            )

    bounds = list(range(0, int(L), _CHUNK)) + [int(L)]
    spans = list(zip(bounds[:-1], bounds[1:]))
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(lambda s: fill(*s), spans))
    else:
        fill(0, int(L))
    return G


def _redrawn_row(design, scheme, seed, l, attempt, e_b):
    """Rebuild draw l's generator and take its (attempt+1)-th draw."""
    rng = draw_stream(seed, l)
    for _ in range(attempt):
        scheme.draw(rng, design.S, e_b, design.g, cluster_ids=design.cluster_ids)
    return scheme.draw(rng, design.S, e_b, design.g, cluster_ids=design.cluster_ids)


# ---------------------------------------------------------------------------
# Statistic evaluation over a draw matrix


def _evaluate(statistic, a, G_eval, design, members):
    """Return (values, valid) per row of G_eval."""
    if statistic is Statistic.T0:
        values = batch_t0(a, G_eval, design.N)
        return values, np.isfinite(values)
    if statistic is Statistic.T1:
        if members is None:
            num, den = batch_t1(a, G_eval)
        else:
            num, den = batch_t1_clustered(a, G_eval, members)
    else:
        num, den = batch_t2(a, G_eval, design.S)
    valid = np.isfinite(num) & np.isfinite(den) & (den > ZERO_STUDENTIZER)
    values = np.where(valid, num / np.where(valid, den, 1.0), np.nan)
    return values, valid


def _check_spec_against_design(design: ShiftShareDesign, spec: TestSpec):
    if spec.statistic is Statistic.T2 and not design.reduced_form:
        raise NotReducedFormError("the T2 statistic needs a reduced-form design (X = Z)")
    if spec.cluster_studentizer and design.cluster_ids is None:
        raise DataValidationError("cluster_studentizer=True but the design has no cluster_ids")
    if isinstance(spec.scheme, SignChange) and spec.scheme.by_cluster and design.cluster_ids is None:
        raise DataValidationError("by_cluster sign changes need cluster_ids on the design")


def simulate_null_statistics(
    design: ShiftShareDesign,
    spec: TestSpec,
    threads: int = 1,
    _raw_draws: np.ndarray | None = None,
) -> tuple[float, np.ndarray, int]:
    """Observed statistic plus its L simulated counterparts.

    Returns ``(t_obs, t_sims, n_degenerate_redraws)``.  Draws whose
    studentizer is numerically zero are replaced from the same draw's
    generator stream, up to 10 attempts each.
    """
    _check_spec_against_design(design, spec)
    e_b = null_residuals(design, spec.b).e_b
    a = sector_residual_sums(design.S, e_b)
    members = (
        cluster_members(design.cluster_ids)
        if (spec.cluster_studentizer and spec.statistic is Statistic.T1)
        else None
    )

    if _raw_draws is None:
        G_raw = generate_draws(design, spec.scheme, spec.L, spec.seed, b=spec.b, threads=threads)
    else:
        G_raw = _raw_draws
    G_eval = G_raw - G_raw.mean(axis=1, keepdims=True) if spec.demean else G_raw
    g_obs = demean_shocks(design.g) if spec.demean else design.g

    obs_values, obs_valid = _evaluate(spec.statistic, a, g_obs[None, :], design, members)
    if not obs_valid[0]:
        raise ZeroVarianceError(
            "the observed statistic has a numerically zero studentizer; "
            "the null residuals are orthogonal to every shocked sector"
        )
    t_obs = float(obs_values[0])

    t_sims, valid = _evaluate(spec.statistic, a, G_eval, design, members)
    n_redraws = 0
    for l in np.flatnonzero(~valid):
        for attempt in range(1, MAX_ATTEMPTS_PER_DRAW):
            n_redraws += 1
            row = _redrawn_row(design, spec.scheme, spec.seed, int(l), attempt, e_b)
            if spec.demean:
                row = row - row.mean()
            value, ok = _evaluate(spec.statistic, a, row[None, :], design, members)
            if ok[0]:
                t_sims[l] = value[0]
                break
        else:
            raise DegenerateDrawError(
                f"draw {int(l)}: studentizer degenerate after {MAX_ATTEMPTS_PER_DRAW} attempts"
            )
    return t_obs, t_sims, n_redraws


def ri_test(
    design: ShiftShareDesign,
    spec: TestSpec,
    threads: int = 1,
    _raw_draws: np.ndarray | None = None,
) -> RITestResult:
    """Run one randomization test.

    The simulated statistics re-evaluate the null-form statistic with
    the observed shocks replaced by each draw; for T2 this equals
    rebuilding outcomes ``Y* = b Z* + e_b`` and re-estimating.
    """
    t_obs, t_sims, n_redraws = simulate_null_statistics(
        design, spec, threads=threads, _raw_draws=_raw_draws
    )
    p = p_value_from_stats(t_obs, t_sims, spec.sidedness)
    reject = reject_by_order_statistic(t_obs, t_sims, spec.alpha, spec.sidedness)
    t_sims.flags.writeable = False
    return RITestResult(
        t_obs=t_obs, t_sims=t_sims, p_value=p, reject=reject, n_degenerate_redraws=n_redraws
    )


# ---------------------------------------------------------------------------
# Exact enumeration


def _sign_patterns(n: int) -> np.ndarray:
    """All 2^n sign vectors; the final row is all +1 (the identity)."""
    k = np.arange(2**n, dtype=np.int64)
    bits = (k[:, None] >> np.arange(n)[None, :]) & 1
    return (bits * 2 - 1).astype(np.float64)


def exact_enumeration_test(design: ShiftShareDesign, spec: TestSpec) -> RITestResult:
    """Enumerate the statistic over the whole transformation group.

    Supported schemes: sign changes (2^J elements, or 2^C with
    by_cluster) and permutations (J! elements).  The p-value is the
    fraction of group elements at least as extreme as the observed
    statistic; the identity element makes it strictly positive.  The
    decision is ``p <= alpha``.  Group elements with a degenerate
    studentizer are counted as extreme, which can only make the test
    more conservative.
    """
    _check_spec_against_design(design, spec)
    scheme = spec.scheme
    e_b = null_residuals(design, spec.b).e_b
    a = sector_residual_sums(design.S, e_b)
    members = (
        cluster_members(design.cluster_ids)
        if (spec.cluster_studentizer and spec.statistic is Statistic.T1)
        else None
    )

    if isinstance(scheme, SignChange):
        if scheme.by_cluster:
            uniq, inverse = np.unique(design.cluster_ids, return_inverse=True)
            n_flip = uniq.shape[0]
        else:
            inverse = np.arange(design.J)
            n_flip = design.J
        size = 2**n_flip
        if size > ENUMERATION_LIMIT:
            raise EnumerationSizeError(
                f"sign-change group has 2^{n_flip} elements, over the 2^20 limit"
            )
        kappa = _sign_patterns(n_flip)[:, inverse]
        G = kappa * (design.g - scheme.m)[None, :] + scheme.m
        G[-1] = design.g
    elif isinstance(scheme, Permutation):
        size = math.factorial(design.J)
        if size > ENUMERATION_LIMIT:
            raise EnumerationSizeError(
                f"permutation group has {design.J}! elements, over the 2^20 limit"
            )
        perms = np.array(list(itertools.permutations(range(design.J))), dtype=np.intp)
        G = design.g[perms]
    else:
        raise ConfigError("exact enumeration supports sign-change and permutation schemes only")

    if spec.demean:
        G = G - G.mean(axis=1, keepdims=True)
        g_obs = demean_shocks(design.g)
    else:
        g_obs = design.g

    obs_values, obs_valid = _evaluate(spec.statistic, a, g_obs[None, :], design, members)
    if not obs_valid[0]:
        raise ZeroVarianceError("the observed statistic has a numerically zero studentizer")
    t_obs = float(obs_values[0])

    values, valid = _evaluate(spec.statistic, a, G, design, members)

    def side_p(sidedness):
        pv = psi(values, sidedness)
        pv = np.where(valid, pv, np.inf)
        return float(np.count_nonzero(pv >= psi(t_obs, sidedness))) / size

    if spec.sidedness is Sidedness.EQUAL_TAIL:
        p_right = side_p(Sidedness.RIGHT_TAIL)
        p_left = side_p(Sidedness.LEFT_TAIL)
        p = min(1.0, 2.0 * min(p_right, p_left))
        reject = p_right <= spec.alpha / 2 or p_left <= spec.alpha / 2
    else:
        p = side_p(spec.sidedness)
        reject = p <= spec.alpha
    values.flags.writeable = False
    return RITestResult(
        t_obs=t_obs, t_sims=values, p_value=p, reject=bool(reject), n_degenerate_redraws=0
    )


# ---------------------------------------------------------------------------
# Berger-Boos correction for an unknown symmetry point


def berger_boos_test(
    design: ShiftShareDesign,
    spec: TestSpec,
    m_lo: float,
    m_hi: float,
    gamma: float,
    grid_size: int = 21,
) -> float:
    """Sign-change p-value robust to an unknown symmetry point.

    Takes the supremum of the sign-change p-value over a grid on the
    confidence interval ``[m_lo, m_hi]`` for the symmetry point (held
    with confidence 1 - gamma) and adds gamma, capping at 1.  The same
    sign draws are reused at every grid point, so the supremum is not
    inflated by simulation noise.
    """
    if not isinstance(spec.scheme, SignChange):
        raise ConfigError("the symmetry-point correction applies to sign-change schemes")
    if not (np.isfinite(m_lo) and np.isfinite(m_hi)) or m_lo > m_hi:
        raise ConfigError(f"invalid symmetry-point interval [{m_lo}, {m_hi}]")
    if not (0.0 <= gamma < 1.0):
        raise ConfigError(f"gamma must lie in [0, 1), got {gamma}")
    if grid_size < 2:
        raise ConfigError(f"grid_size must be at least 2, got {grid_size}")
    _check_spec_against_design(design, spec)

    e_b = null_residuals(design, spec.b).e_b
    a = sector_residual_sums(design.S, e_b)
    members = (
        cluster_members(design.cluster_ids)
        if (spec.cluster_studentizer and spec.statistic is Statistic.T1)
        else None
    )
    g_obs = demean_shocks(design.g) if spec.demean else design.g
    obs_values, obs_valid = _evaluate(spec.statistic, a, g_obs[None, :], design, members)
    if not obs_valid[0]:
        raise ZeroVarianceError("the observed statistic has a numerically zero studentizer")
    t_obs = float(obs_values[0])

    kappa = np.empty((spec.L, design.J))
    for l in range(spec.L):
        kappa[l] = spec.scheme.signs(draw_stream(spec.seed, l), design.J, design.cluster_ids)

    grid = np.unique(np.linspace(m_lo, m_hi, grid_size)) if m_hi > m_lo else np.array([m_lo])
    worst = 0.0
    for m in grid:
        G = kappa * (design.g - m)[None, :] + m
        if spec.demean:
            G = G - G.mean(axis=1, keepdims=True)
        values, valid = _evaluate(spec.statistic, a, G, design, members)
        if spec.sidedness is Sidedness.EQUAL_TAIL:
            pr = np.where(valid, values, np.inf)
            pl = np.where(valid, -values, np.inf)
            p_right = (1 + int(np.count_nonzero(pr >= t_obs))) / (spec.L + 1)
            p_left = (1 + int(np.count_nonzero(pl >= -t_obs))) / (spec.L + 1)
            p = min(1.0, 2.0 * min(p_right, p_left))
        else:
            pv = np.where(valid, psi(values, spec.sidedness), np.inf)
            count = int(np.count_nonzero(pv >= psi(t_obs, spec.sidedness)))
            p = (1 + count) / (spec.L + 1)
        worst = max(worst, p)
    return min(1.0, worst + gamma)


# ---------------------------------------------------------------------------
# Confidence intervals by test inversion


@dataclass(frozen=True)
class ConfidenceIntervalResult:
    """Test-inversion confidence set over a grid of null values.

    Attributes
    ----------
    b_grid : ndarray
        The evaluated null values.
    p_values : ndarray
        p-value at each grid point.
    retained : ndarray of bool
        Grid points whose test does not reject.
    hull : tuple or None
        (min, max) of the retained values; None when nothing is
        retained.
    disconnected : bool
        True when the retained set has interior gaps; the hull then
        overstates the confidence set.
    n_degenerate_redraws : int
        Total discarded draws across grid points.
    """

    b_grid: np.ndarray
    p_values: np.ndarray
    retained: np.ndarray
    hull: tuple[float, float] | None
    disconnected: bool
    n_degenerate_redraws: int

    @property
    def retained_values(self) -> np.ndarray:
        return self.b_grid[self.retained]


def confidence_interval(
    design: ShiftShareDesign,
    spec: TestSpec,
    b_grid,
    threads: int = 1,
) -> ConfidenceIntervalResult:
    """Invert the test over ``b_grid``: retain every b whose test does
    not reject at ``spec.alpha``.

    The same draws (same seed, same generator streams) are applied at
    every grid point, so interval endpoints move with the data rather
    than with simulation jitter.
    """
    b_grid = np.asarray(b_grid, dtype=np.float64)
    if b_grid.ndim != 1 or b_grid.size == 0:
        raise ConfigError("b_grid must be a nonempty 1-d array")
    if not np.all(np.isfinite(b_grid)):
        raise ConfigError("b_grid must be finite")
    if np.any(np.diff(b_grid) < 0):
        raise ConfigError("b_grid must be sorted in increasing order")

    # Built-in schemes draw independently of the residuals, so the draw
    # matrix can be shared across grid points; user samplers may read
    # e_b and are regenerated at each b.
    shared = None
    if not isinstance(spec.scheme, KnownDistribution):
        shared = generate_draws(design, spec.scheme, spec.L, spec.seed, b=spec.b, threads=threads)

    p_values = np.empty(b_grid.shape)
    retained = np.empty(b_grid.shape, dtype=bool)
    total_redraws = 0
    for i, b in enumerate(b_grid):
        res = ri_test(design, replace(spec, b=float(b)), threads=threads, _raw_draws=shared)
        p_values[i] = res.p_value
        retained[i] = not res.reject
        total_redraws += res.n_degenerate_redraws

    if retained.any():
        vals = b_grid[retained]
        hull = (float(vals.min()), float(vals.max()))
        idx = np.flatnonzero(retained)
        disconnected = bool(idx[-1] - idx[0] + 1 != idx.size)
    else:
        hull = None
        disconnected = False
    for arr in (b_grid, p_values, retained):
        arr.flags.writeable = False
    return ConfidenceIntervalResult(
        b_grid=b_grid,
        p_values=p_values,
        retained=retained,
        hull=hull,
        disconnected=disconnected,
        n_degenerate_redraws=total_redraws,
    )
