"""Diffusion limits: from tick-by-tick jumps to Brownian prices.

Over horizons covering many order events the centered, rescaled price
converges to a Brownian motion whose volatility is an explicit function of
the order flow:

* balanced flow, time scale n log n: sigma = tick * sqrt(pi lam / D(f)),
  with D(f) the mean product of the post-move queue sizes;
* drift-dominated flow, time scale n: sigma = tick / sqrt(m(f)), with m(f)
  the mean time between moves.

Both constants are checked here against batches of simulated paths.
"""

import math

from scipy.stats import kstest

from lobq import analytics
from lobq.model import ModelParams, sample_price_at
from lobq.presets import BALANCED_F, UNBALANCED_F

print("=== balanced regime: lam = mu + theta = 10, f thin/deep with D = 14 ===")
params = ModelParams.from_rates(10.0, 10.0)
n, paths = 200, 2000
sigma = analytics.vol_balanced(params, BALANCED_F)
ticks = sample_price_at(params, BALANCED_F, n * math.log(n), paths, seed=3)
vals = params.tick * ticks / math.sqrt(n)
ks = kstest(vals, "norm", args=(0.0, sigma)).statistic
print(f"theory sigma = {sigma:.4f}")
print(f"sample sd    = {vals.std(ddof=1):.4f}   ({paths} paths, n = {n})")
print(f"KS distance to N(0, sigma^2) = {ks:.4f}")

print("\n=== drift-dominated regime: lam = 1, mu + theta = 1.3 ===")
params = ModelParams.from_rates(1.0, 1.3)
n, paths = 2000, 2000
m_f = analytics.expected_duration_f(UNBALANCED_F, params)
sigma = analytics.vol_unbalanced(params, UNBALANCED_F)
ticks = sample_price_at(params, UNBALANCED_F, float(n), paths, seed=4)
vals = params.tick * ticks / math.sqrt(n)
ks = kstest(vals, "norm", args=(0.0, sigma)).statistic
print(f"mean inter-move duration m(f) = {m_f:.4f} s")
print(f"theory sigma = {sigma:.4f}")
print(f"sample sd    = {vals.std(ddof=1):.4f}   ({paths} paths, n = {n})")
print(f"KS distance to N(0, sigma^2) = {ks:.4f}")

print("\nthe balanced constant is what the windowed volatility estimator uses:")
print("sigma_W = tick * sqrt(pi lam n / D); see estimation_workflow.py")
