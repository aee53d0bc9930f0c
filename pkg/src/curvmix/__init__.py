"""curvmix: curvature-aware correlated noise for differentially private training.

The toolkit estimates a Hessian eigenspectrum, turns it into a workload matrix for
the mixing-matrix objective, optimizes a banded mixing matrix, and streams the
correlated Gaussian noise it defines into gradient descent.

Modules:
    spectrum: Lanczos and dense eigensolvers, negative truncation, tail fitting.
    workload: Curvature, identity and prefix-sum workload matrices.
    mixopt: The banded mixing objective, its solver and factorization.
    noisegen: Online generation of cross-iteration correlated noise.
    quadsim: Closed-form and Monte-Carlo excess loss on quadratic problems.
    trainer: Private training of linear and logistic models.
    orchestration: LangGraph pipeline tying the stages together.
    reports: HTML rendering of JSON reports.
    utils: Logging, seeds, file formats and the solve cache.
"""

__version__ = "0.1.0"

__all__ = [
    "mixopt",
    "noisegen",
    "orchestration",
    "quadsim",
    "reports",
    "spectrum",
    "trainer",
    "utils",
    "workload",
]
