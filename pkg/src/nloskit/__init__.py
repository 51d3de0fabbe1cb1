"""Range-based indoor positioning with NLOS identification and mitigation.

Core pieces: a per-anchor Kalman filter bank with chi-square innovation
gating, a weighted Gauss-Newton position solver, the WLS-RKF estimator that
ties them together, plus a scenario simulator and error-report tooling. An
HTTP service (nloskit.service) exposes the pipeline to clients; the CLI
(nloskit.cli) drives it.
"""

__version__ = "0.1.0"
