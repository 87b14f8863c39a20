"""Duration until the next price move: closed form vs two independent checks.

The survival function of tau = min(bid depletion, ask depletion) factorizes
into two single-queue survivals, each a Bessel-type integral. This script
evaluates the closed form on a grid and pits it against (a) an exact
uniformized-chain computation and (b) a 100k-path Monte Carlo.
"""

import numpy as np

from lobq import analytics, xval
from lobq.model import ModelParams, sample_first_passage

params = ModelParams.from_rates(lam=12.0, mu_theta=13.0)
a, b = 4, 5
ts = np.array([0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0])

closed = analytics.survival_curve(a, b, ts, params)
exact = xval.oracle_survival(a, b, ts, params)
tau, _ = sample_first_passage(a, b, params, 100_000, seed=1)
mc = np.array([(tau > t).mean() for t in ts])

print(f"P[tau > t] from bid={a}, ask={b} at lam={params.lam}, mu+theta={params.mu_theta}")
print(f"{'t':>6} {'closed form':>14} {'uniformized':>14} {'monte carlo':>14}")
for t, c, e, m in zip(ts, closed, exact, mc):
    print(f"{t:6.2f} {c:14.8f} {e:14.8f} {m:14.5f}")

print(f"\nmax |closed - uniformized| = {np.abs(closed - exact).max():.2e}")
print(f"max |closed - monte carlo| = {np.abs(closed - mc).max():.2e} "
      f"(binomial noise ~ {1.5 / np.sqrt(tau.size):.1e})")
print(f"mean duration from ({a},{b}): {analytics.expected_duration(a, b, params):.4f} s "
      f"(simulated {tau.mean():.4f} s)")
