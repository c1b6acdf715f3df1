"""Walkthrough: measuring size and power on synthetic data.

Two experiments at desk scale.  First, six sectors with two dominant
ones: the normal-critical-value comparator over-rejects wildly while the
sign-flip randomization test keeps its level.  Second, a power curve for
the randomization test across null values, which dips to the nominal
level exactly at the true slope.

Runtime is about half a minute.
"""

import numpy as np

from shiftshare_ri import (
    DGPSpec,
    MethodKind,
    MethodSpec,
    SignChange,
    Statistic,
    power_curve,
    size_experiment,
)
from shiftshare_ri.montecarlo import Concentrated, DirichletRows


def banner(title):
    print()
    print("=" * 64)
    print(title)
    print("=" * 64)


def few_dominant_shocks():
    banner("Size with six sectors, two of them dominant (nominal 0.05)")
    dgp = DGPSpec(N=30, J=6, exposure_design=Concentrated(k_dominant=2))
    methods = [
        MethodSpec(kind=MethodKind.AKM_NORMAL, alpha=0.05),
        MethodSpec(kind=MethodKind.RI, scheme=SignChange(), L=199, alpha=0.05),
    ]
    results = size_experiment(dgp, methods, reps=500, master_seed=11)
    for r in results:
        print(f"{r.method:24s} rejects {r.rejection_rate:.3f} (se {r.mc_se:.3f})")
    print("the normal approximation needs many comparably-sized shocks;")
    print("with two dominant ones it is not close, and the level shows it")


def power_across_nulls():
    banner("Power of the sign-flip test across null values (true slope 1)")
    dgp = DGPSpec(N=40, J=20, exposure_design=DirichletRows(1.0))
    method = MethodSpec(kind=MethodKind.RI, scheme=SignChange(), L=199, alpha=0.05)
    grid = np.linspace(0.0, 2.0, 9)
    results = power_curve(dgp, grid, method, reps=300, master_seed=23)
    width = 40
    for r in results:
        bar = "#" * int(round(width * r.rejection_rate))
        print(f"b = {r.b_tested:4.2f}  {r.rejection_rate:5.3f}  {bar}")
    print("rejection is lowest at the truth and climbs as the null moves away;")
    print("the value at b = 1 is a size measurement embedded in the curve")


if __name__ == "__main__":
    few_dominant_shocks()
    power_across_nulls()
