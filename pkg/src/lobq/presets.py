"""Shipped parameter sets and replenishment distributions.

These are the defaults used by the demos and the cross-validation suite.
Rates are per side in events per second; queue sizes are in unit batches.
"""

from __future__ import annotations

from .model import ModelParams, QueueDist

# Near-balanced liquid-stock intensities (limit rate just below removal rate),
# matching the magnitudes reported for heavily traded names.
LIQUID_PARAMS = ModelParams(lam=2204.0, mu=1554.0, theta=777.0, tick=0.01)

# Asymmetric replenishment: right after an up move the fresh bid queue tends
# to be thinner than the ask queue that was already resting one level up.
# Mass on {ask >= bid} is 0.88, which makes successive moves anticorrelated.
CITI_LIKE_F = QueueDist(
    [
        (1, 1, 0.25),
        (1, 2, 0.35),
        (1, 3, 0.15),
        (2, 2, 0.10),
        (2, 1, 0.07),
        (2, 3, 0.05),
        (3, 1, 0.03),
    ]
)

# Swap-symmetric thin/deep mixture used for the balanced diffusion runs: one
# queue was just swept (size 1), the opposite reservoir queue is deep. Depth
# D(f) = 14.
BALANCED_F = QueueDist([(1, 14, 0.5), (14, 1, 0.5)])

# Small swap-symmetric law for the unbalanced diffusion runs; D(f) = 2.25.
UNBALANCED_F = QueueDist([(1, 1, 0.25), (1, 2, 0.25), (2, 1, 0.25), (2, 2, 0.25)])
