"""Simulation schemes for sector shocks.

A scheme encodes a guess at the shock assignment process and knows how
to produce one simulated shock vector from a generator.  Draws may
depend on the exposures and the null residuals (user-supplied samplers
receive both), though the built-in schemes use only the observed shocks.

Schemes also report per-coordinate moments (mean, second, fourth) of
their draws, which feed the asymptotic-condition diagnostics.  For the
built-ins these are closed form; user-supplied samplers fall back to
Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DataValidationError
from .rng import DOMAIN_MOMENTS, stream


@dataclass(frozen=True)
class SimulationScheme:
    """Base class; concrete schemes implement ``draw`` and ``moments``."""

    def draw(self, rng, S, e_b, g, cluster_ids=None) -> np.ndarray:
        raise NotImplementedError

    def moments(self, g, S=None, e_b=None, n_mc=2000, seed=0):
        """Per-coordinate (mean, second moment, fourth moment) of g*.

        Returns three arrays of shape (J,).  Closed form where the
        scheme permits, Monte Carlo with a dedicated stream otherwise.
        """
        raise NotImplementedError

    def _mc_moments(self, g, S, e_b, n_mc, seed):
        rng = stream(seed, DOMAIN_MOMENTS)
        draws = np.stack([self.draw(rng, S, e_b, g) for _ in range(int(n_mc))])
        return draws.mean(axis=0), (draws**2).mean(axis=0), (draws**4).mean(axis=0)


@dataclass(frozen=True)
class KnownDistribution(SimulationScheme):
    """User-supplied draw procedure ``sampler(rng, S, e_b, g) -> g*``.

    The sampler may depend on exposures and null residuals, not only on
    the observed shocks.
    """

    sampler: Callable[[np.random.Generator, np.ndarray, np.ndarray, np.ndarray], np.ndarray]

    def draw(self, rng, S, e_b, g, cluster_ids=None):
        out = np.asarray(self.sampler(rng, S, e_b, g), dtype=np.float64)
        if out.shape != np.shape(g):
            raise DataValidationError(
                f"sampler returned shape {out.shape}, expected {np.shape(g)}"
            )
        if not np.all(np.isfinite(out)):
            raise DataValidationError("sampler returned non-finite values")
        return out

    def moments(self, g, S=None, e_b=None, n_mc=2000, seed=0):
        return self._mc_moments(g, S, e_b, n_mc, seed)


@dataclass(frozen=True)
class RecentredBootstrap(SimulationScheme):
    """IID draws from the empirical distribution of ``g_j - mean(g)``."""

    def draw(self, rng, S, e_b, g, cluster_ids=None):
        pool = g - g.mean()
        idx = rng.integers(0, g.shape[0], size=g.shape[0])
        return pool[idx]

    def moments(self, g, S=None, e_b=None, n_mc=2000, seed=0):
        pool = g - g.mean()
        J = g.shape[0]
        m2 = float(np.mean(pool**2))
        m4 = float(np.mean(pool**4))
        return np.zeros(J), np.full(J, m2), np.full(J, m4)


@dataclass(frozen=True)
class IIDNormal(SimulationScheme):
    """IID Gaussian shocks with mean zero and standard deviation sigma."""

    sigma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise DataValidationError(f"sigma must be positive, got {self.sigma}")

    def draw(self, rng, S, e_b, g, cluster_ids=None):
        return self.sigma * rng.standard_normal(g.shape[0])

    def moments(self, g, S=None, e_b=None, n_mc=2000, seed=0):
        J = g.shape[0]
        s2 = self.sigma**2
        return np.zeros(J), np.full(J, s2), np.full(J, 3.0 * s2**2)


@dataclass(frozen=True)
class SignChange(SimulationScheme):
    """Recentred sign changes: ``g* = kappa * (g - m) + m`` with kappa
    uniform on {-1, +1}^J.

    With ``by_cluster=True`` a single sign is drawn per shock cluster,
    preserving within-cluster dependence (requires cluster labels).
    """

    m: float = 0.0
    by_cluster: bool = False

    def __post_init__(self):
        if not np.isfinite(self.m):
            raise DataValidationError(f"symmetry point m must be finite, got {self.m}")

    def signs(self, rng, J, cluster_ids=None):
        if self.by_cluster:
            if cluster_ids is None:
                raise DataValidationError("by_cluster sign changes need cluster labels")
            uniq, inverse = np.unique(cluster_ids, return_inverse=True)
            kappa_c = rng.integers(0, 2, size=uniq.shape[0]) * 2 - 1
            return kappa_c[inverse].astype(np.float64)
        return (rng.integers(0, 2, size=J) * 2 - 1).astype(np.float64)

    def draw(self, rng, S, e_b, g, cluster_ids=None):
        kappa = self.signs(rng, g.shape[0], cluster_ids)
        return kappa * (g - self.m) + self.m

    def moments(self, g, S=None, e_b=None, n_mc=2000, seed=0):
        d = g - self.m
        mean = np.full(g.shape[0], self.m)
        m2 = d**2 + self.m**2
        m4 = d**4 + 6.0 * d**2 * self.m**2 + self.m**4
        return mean, m2, m4


@dataclass(frozen=True)
class Permutation(SimulationScheme):
    """Uniformly random permutation of the observed shock vector."""

    def draw(self, rng, S, e_b, g, cluster_ids=None):
        return g[rng.permutation(g.shape[0])]

    def moments(self, g, S=None, e_b=None, n_mc=2000, seed=0):
        J = g.shape[0]
        return (
            np.full(J, float(g.mean())),
            np.full(J, float(np.mean(g**2))),
            np.full(J, float(np.mean(g**4))),
        )


def draw_shocks(scheme, S, e_b, g, rng, cluster_ids=None) -> np.ndarray:
    """Draw one simulated shock vector from ``scheme``.

    Thin functional wrapper over ``scheme.draw``; deterministic given
    the generator state.
    """
    return scheme.draw(rng, S, e_b, g, cluster_ids=cluster_ids)
