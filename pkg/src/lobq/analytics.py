"""Closed-form price statistics for the two-queue book.

Conventions used throughout:

* Queue arguments are passed as (bid, ask) everywhere. Hitting-problem
  conventions that condition on the ask size first are easy to mix up, so
  every public function fixes the order (bid, ask) and documents itself in
  those terms.
* lam is the per-side limit-order rate and mu_theta = mu + theta the
  per-side removal rate.
* Probabilities coming out of quadrature are clamped to [0, 1]; clamps
  larger than 1e-8 are logged as warnings.

The duration until the next price move is tau = min(sigma_b, sigma_a), the
first depletion time of the two queues. Its survival function factorizes
into per-queue survivals

    P[tau > t] = S(bid, t) * S(ask, t),
    S(x, t) = sqrt(((mu+theta)/lam)^x) * psi(x, t),

with psi the Bessel-integral transient of a birth-death queue. For
lam < mu + theta the per-queue law has an exponential tail of rate
(sqrt(lam) - sqrt(mu+theta))^2; for lam = mu+theta it is regularly varying
with index 1/2.
"""

from __future__ import annotations

import functools
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .model import ModelParams, QueueDist
from .numerics import (
    DEFAULT_QUAD,
    QuadSpec,
    bessel_i_scaled,
    integrate_finite,
    integrate_semi_infinite,
)

__all__ = [
    "TailLaw",
    "hitting_laplace",
    "psi",
    "queue_survival",
    "survival_duration",
    "survival_curve",
    "tail_law",
    "prob_up_balanced",
    "prob_up_numeric",
    "prob_up",
    "p_cont",
    "p_n",
    "autocov_moves",
    "depth",
    "vol_balanced",
    "vol_balanced_window",
    "expected_duration",
    "expected_duration_raw",
    "expected_duration_f",
    "vol_unbalanced",
]

logger = logging.getLogger(__name__)

PHI_SMALL_T = 1e-6  # below this the hitting-probability integrand uses its t->0 limit


@dataclass(frozen=True)
class TailLaw:
    """Power-law tail description: P[tau > t] ~ prefactor / t^exponent."""

    exponent: int
    prefactor: float


def _clamp_prob(x: float, what: str) -> float:
    if x < 0.0 or x > 1.0:
        over = max(-x, x - 1.0)
        if over > 1e-8:
            logger.warning("%s clamped to [0,1] by %.3e", what, over)
        return min(max(x, 0.0), 1.0)
    return x


def hitting_laplace(s: float, x: int, params: ModelParams) -> float:
    """Laplace transform E[exp(-s sigma)] of a single queue's depletion time.

    sigma is the first time a queue of size x empties under +1 at rate lam
    and -1 at rate mu + theta. The transform is the smaller root of
    lam X^2 - (lam + mu + theta + s) X + mu + theta, raised to the power x;
    at s = 0 it equals min(1, (mu+theta)/lam), the probability of ever
    depleting.
    """
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if x < 1:
        raise ValueError("queue size must be >= 1")
    lam, mt = params.lam, params.mu_theta
    a = lam + mt + s
    disc = a * a - 4.0 * lam * mt
    root = (a - math.sqrt(disc)) / (2.0 * lam)
    return root**x


def _psi_integrand(n: int, c: float, rho: float):
    """(n/u) I_n(c u) e^{-u (lam+mu+theta)} written with the scaled Bessel."""

    def g(u: float) -> float:
        if u <= 0.0:
            return 0.5 * c if n == 1 else 0.0
        return (n / u) * bessel_i_scaled(n, c * u) * math.exp(-rho * u)

    return g


def _psi_tail(n: int, c: float, rho: float, T: float) -> float:
    """Tail integral of the psi integrand beyond T via the Bessel expansion.

    Uses I_n(z) e^{-z} ~ (2 pi z)^{-1/2} (1 - (4n^2-1)/(8z)); both resulting
    incomplete-gamma pieces reduce to erfc. Valid for c T well above n^2.
    """
    a1 = (4.0 * n * n - 1.0) / 8.0
    sr = math.sqrt(rho * T) if rho > 0.0 else 0.0
    e = math.exp(-rho * T)
    j1 = 2.0 * e / math.sqrt(T) - 2.0 * math.sqrt(math.pi * rho) * erfc(sr)
    j2 = (2.0 / 3.0) * e * T**-1.5 - (2.0 / 3.0) * rho * j1
    return n / math.sqrt(2.0 * math.pi * c) * (j1 - (a1 / c) * j2)


def psi(n: int, t: float, params: ModelParams, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """Bessel-integral transient psi_n(t) of the single-queue depletion time.

    psi(n, t) integrates (n/u) I_n(2 sqrt(lam (mu+theta)) u)
    e^{-u(lam+mu+theta)} over [t, inf); the per-queue survival is
    sqrt(((mu+theta)/lam)^n) * psi(n, t). Nonnegative and nonincreasing
    in t.

    The integrand decays like e^{-rho u} u^{-3/2} with
    rho = (sqrt(lam) - sqrt(mu+theta))^2. Whichever truncation is shorter is
    used: the exponential-bound truncation of integrate_semi_infinite, or an
    algebraic truncation with the closed-form (erfc) tail added back. The
    second route is what makes the balanced case (rho = 0, where the tail
    is ~ n / sqrt(pi lam T)) tractable.
    """
    if n < 1:
        raise ValueError("queue size must be >= 1")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    lam, mt = params.lam, params.mu_theta
    c = 2.0 * math.sqrt(lam * mt)
    rho = (math.sqrt(lam) - math.sqrt(mt)) ** 2
    g = _psi_integrand(n, c, rho)

    tol_half = 0.5 * spec.abs_tol
    a2 = (4.0 * n * n - 1.0) * (4.0 * n * n - 9.0) / 128.0
    resid_coef = 0.4 * n * max(a2, 1.0) / (c * c * math.sqrt(2.0 * math.pi * c))
    T_alg = (resid_coef / tol_half) ** 0.4
    T_alg = max(T_alg, 10.0 * (n * n + 1.0) / c, 1.5 * t + 1.0 / c)

    if rho > 0.0:
        T_exp = t + math.log(max(2.0 * n / (rho * tol_half), 2.0)) / rho
        if T_exp < T_alg:
            val = integrate_semi_infinite(g, t, rho, spec)
            return max(val, 0.0)

    if t >= T_alg:
        return max(_psi_tail(n, c, rho, t), 0.0)
    breaks = [t]
    step = max((n + 1.0) / c, (T_alg - t) * 1e-6)
    while breaks[-1] + step < T_alg:
        breaks.append(breaks[-1] + step)
        step *= 2.0
    breaks.append(T_alg)
    seg_spec = QuadSpec(spec.abs_tol / len(breaks), spec.rel_tol, spec.max_subdivisions)
    finite = math.fsum(
        integrate_finite(g, breaks[k], breaks[k + 1], seg_spec) for k in range(len(breaks) - 1)
    )
    return max(finite + _psi_tail(n, c, rho, T_alg), 0.0)


def queue_survival(x: int, t: float, params: ModelParams, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """P[single queue of size x survives past t] = sqrt(r^x) psi(x, t), r=(mu+theta)/lam."""
    pref = (params.mu_theta / params.lam) ** (0.5 * x)
    return _clamp_prob(pref * psi(x, t, params, spec), f"queue_survival({x},{t})")


def survival_duration(
    a: int, b: int, t: float, params: ModelParams, spec: QuadSpec = DEFAULT_QUAD
) -> float:
    """P[next price move is later than t], starting from queues (a, b).

    Equal to the product of the two per-queue survivals; symmetric in
    (a, b). Requires lam <= mu + theta (otherwise a queue may never deplete
    and the price may never move).
    """
    _require_nonpositive_drift(params)
    if a < 1 or b < 1:
        raise ValueError("queue sizes must be >= 1")
    pref = (params.mu_theta / params.lam) ** (0.5 * (a + b))
    val = pref * psi(a, t, params, spec) * psi(b, t, params, spec)
    return _clamp_prob(val, f"survival_duration({a},{b},{t})")


def survival_curve(
    a: int,
    b: int,
    t_grid,
    params: ModelParams,
    spec: QuadSpec = DEFAULT_QUAD,
) -> np.ndarray:
    """Duration survival on an increasing grid, sharing work across points.

    psi is evaluated once at the largest t; earlier values are accumulated
    backward with short finite integrals, so a 1000-point curve costs about
    as much as a handful of psi calls.
    """
    _require_nonpositive_drift(params)
    ts = np.asarray(t_grid, dtype=np.float64)
    if ts.ndim != 1 or ts.size == 0:
        raise ValueError("t_grid must be a nonempty 1-d sequence")
    if np.any(np.diff(ts) <= 0.0) or ts[0] < 0.0:
        raise ValueError("t_grid must be strictly increasing and nonnegative")
    lam, mt = params.lam, params.mu_theta
    c = 2.0 * math.sqrt(lam * mt)
    rho = (math.sqrt(lam) - math.sqrt(mt)) ** 2
    pref = (mt / lam) ** (0.5 * (a + b))

    curves = []
    for n in (a, b):
        g = _psi_integrand(n, c, rho)
        vals = np.empty(ts.size)
        vals[-1] = psi(n, float(ts[-1]), params, spec)
        for k in range(ts.size - 2, -1, -1):
            seg = integrate_finite(g, float(ts[k]), float(ts[k + 1]), spec)
            vals[k] = vals[k + 1] + seg
        curves.append(vals)
    out = pref * curves[0] * curves[1]
    return np.array([_clamp_prob(float(v), "survival_curve") for v in out])


def tail_law(a: int, b: int, params: ModelParams) -> TailLaw:
    """Power-law tail constants of the duration, as classically displayed.

    Balanced flow: exponent 1 with prefactor a b / (pi lam), which is the
    genuine t -> infinity behavior. Unbalanced flow (lam < mu+theta):
    exponent 2 with prefactor a b (lam+mu+theta)^2 / (4 lam^2
    (mu+theta-lam)^2). Note that in the unbalanced regime the true far tail
    is exponential with rate 2 (sqrt(lam) - sqrt(mu+theta))^2 and the
    intermediate range decays like 1/t, so the exponent-2 description is a
    transitional fit at best; see demos/tail_behavior.py.
    """
    if a < 1 or b < 1:
        raise ValueError("queue sizes must be >= 1")
    _require_nonpositive_drift(params)
    lam, mt = params.lam, params.mu_theta
    if params.balanced:
        return TailLaw(exponent=1, prefactor=a * b / (math.pi * lam))
    pre = a * b * (lam + mt) ** 2 / (4.0 * lam**2 * (mt - lam) ** 2)
    return TailLaw(exponent=2, prefactor=pre)


def _require_nonpositive_drift(params: ModelParams) -> None:
    if params.lam > params.mu_theta and not params.balanced:
        raise ValueError("requires lam <= mu + theta")


def _require_negative_drift(params: ModelParams) -> None:
    if params.balanced or params.lam > params.mu_theta:
        raise ValueError("requires lam < mu + theta")


@functools.lru_cache(maxsize=65536)
def _phi_cached(n: int, p: int, spec: QuadSpec) -> float:
    cos, sin, sqrt = math.cos, math.sin, math.sqrt

    def integrand(t: float) -> float:
        w = 2.0 - cos(t)
        decay = 1.0 / (w + sqrt(w * w - 1.0))  # e^{-r(t)}, cancellation-free
        if t < PHI_SMALL_T:
            return 2.0 * n * decay**p
        return decay**p * sin(n * t) * cos(0.5 * t) / sin(0.5 * t)

    # one panel per lobe of sin(n t), so no oscillation is ever aliased away
    seg_spec = QuadSpec(spec.abs_tol / n, spec.rel_tol, spec.max_subdivisions)
    val = (
        math.fsum(
            integrate_finite(integrand, k * math.pi / n, (k + 1) * math.pi / n, seg_spec)
            for k in range(n)
        )
        / math.pi
    )
    return _clamp_prob(val, f"prob_up_balanced({n},{p})")


def prob_up_balanced(n: int, p: int, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """Probability the next price move is up, balanced flow, bid n and ask p.

    Exit probability of the symmetric planar walk through the ask axis,
    evaluated from its closed-form integral over [0, pi]. Parameter-free:
    when lam = mu + theta the answer depends only on the queue sizes. The
    integrand's removable singularity at t = 0 (limit 2n) is patched
    analytically below t = 1e-6.
    """
    if n < 1 or p < 1:
        raise ValueError("queue sizes must be >= 1")
    return _phi_cached(int(n), int(p), spec)


@functools.lru_cache(maxsize=8)
def _dirichlet_solution(p_up: float, truncation: int) -> np.ndarray:
    """Hitting-probability grid for the embedded walk on {1..N}^2.

    Solves phi(i, j) = sum of neighbor values weighted by the per-event
    transition probabilities (side 1/2, then up p_up / down 1-p_up), with
    phi = 0 on the bid axis, 1 on the ask axis, and single-queue ruin
    values min(1, ((1-p_up)/p_up)^h) on the far boundary.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    N = int(truncation)
    pu = p_up
    pd = 1.0 - p_up
    r = pd / pu
    far_bid = np.minimum(1.0, r ** np.arange(1, N + 1))        # value at bid = N+1, ask = j
    far_ask = 1.0 - np.minimum(1.0, r ** np.arange(1, N + 1))  # value at bid = i, ask = N+1

    ii, jj = np.meshgrid(np.arange(1, N + 1), np.arange(1, N + 1), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    k = (ii - 1) * N + (jj - 1)
    rows = [k]
    cols = [k]
    vals = [np.ones(k.size)]
    rhs = np.zeros(N * N)

    # neighbor (di, dj, weight); contributions to rhs when they leave the grid
    for di, dj, w in ((1, 0, pu / 2), (-1, 0, pd / 2), (0, 1, pu / 2), (0, -1, pd / 2)):
        ni = ii + di
        nj = jj + dj
        inside = (ni >= 1) & (ni <= N) & (nj >= 1) & (nj <= N)
        rows.append(k[inside])
        cols.append((ni[inside] - 1) * N + (nj[inside] - 1))
        vals.append(np.full(inside.sum(), -w))
        out = ~inside
        if not out.any():
            continue
        ko = k[out]
        nio = ni[out]
        njo = nj[out]
        bvals = np.zeros(ko.size)
        bvals[njo == 0] = 1.0
        sel = nio == N + 1
        bvals[sel] = far_bid[njo[sel] - 1]
        sel = njo == N + 1
        bvals[sel] = far_ask[nio[sel] - 1]
        # ni == 0 contributes value 0
        rhs[ko] += w * bvals

    A = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(N * N, N * N),
    )
    sol = spla.spsolve(A, rhs)
    return sol.reshape(N, N)


def prob_up_numeric(
    n: int,
    p: int,
    params: ModelParams,
    truncation: int = 400,
) -> float:
    """Probability of an up move from bid n, ask p for general order flow.

    Solves the discrete Dirichlet problem of the embedded jump chain on a
    truncated quadrant (sparse direct solve, cached per parameter set).
    Matches prob_up_balanced when lam = mu + theta and extends it to
    asymmetric flow, where no closed form is available.
    """
    if n < 1 or p < 1:
        raise ValueError("queue sizes must be >= 1")
    if truncation < 4 * max(n, p):
        warnings.warn(
            f"truncation {truncation} is small for queues ({n},{p}); "
            "hitting probability may carry visible boundary bias",
            stacklevel=2,
        )
    grid = _dirichlet_solution(params.p_up, int(truncation))
    return float(grid[n - 1, p - 1])


def prob_up(bid: int, ask: int, params: ModelParams, truncation: int = 400) -> float:
    """Up-move probability from (bid, ask); closed form when balanced."""
    if params.balanced:
        return prob_up_balanced(bid, ask)
    return prob_up_numeric(bid, ask, params, truncation)


def p_cont(
    f: QueueDist,
    params: ModelParams,
    truncation: int = 400,
    check_truncation: bool = False,
) -> float:
    """Probability that two successive price moves share a direction.

    Right after a move the queues are a fresh draw from f (up move) or its
    mirror (down move), so the continuation probability is the f-average of
    the up-move probability. With check_truncation the unbalanced solve is
    repeated at twice the truncation; the finer value is returned and a
    warning is emitted if the two differ by more than 1e-6.
    """
    if params.balanced:
        val = sum(p * prob_up_balanced(i, j) for i, j, p in f.items())
        return _clamp_prob(val, "p_cont")
    base = sum(p * prob_up_numeric(i, j, params, truncation) for i, j, p in f.items())
    if not check_truncation:
        return _clamp_prob(base, "p_cont")
    fine = sum(p * prob_up_numeric(i, j, params, 2 * truncation) for i, j, p in f.items())
    if abs(fine - base) > 1e-6:
        warnings.warn(
            f"p_cont truncation sensitivity {abs(fine - base):.2e} at N={truncation}",
            stacklevel=2,
        )
    return _clamp_prob(fine, "p_cont")


def p_n(
    k: int,
    bid: int,
    ask: int,
    f: QueueDist,
    params: ModelParams,
    truncation: int = 400,
) -> float:
    """Probability that the k-th subsequent price move is up, given (bid, ask).

    Two-state sign chain: p_k = (1 + (2 p_cont - 1)^(k-1) (2 p_1 - 1)) / 2
    with p_1 the direct up-move probability from the given state. k = 1
    reduces to p_1 itself.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p1 = prob_up(bid, ask, params, truncation)
    if k == 1:
        return p1
    pc = p_cont(f, params, truncation)
    return 0.5 * (1.0 + (2.0 * pc - 1.0) ** (k - 1) * (2.0 * p1 - 1.0))


def autocov_moves(k: int, f: QueueDist, params: ModelParams, truncation: int = 400) -> float:
    """Lag covariance Cov(X_1, X_k) of the +-1 move sequence, (2 p_cont - 1)^(k-1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return (2.0 * p_cont(f, params, truncation) - 1.0) ** (k - 1)


def depth(f: QueueDist) -> float:
    """Market depth D(f) = sum of i j f(i, j); its square root is the geometric
    mean of the post-move queue sizes."""
    return float(np.sum(f.bid * f.ask * f.prob))


def vol_balanced(params: ModelParams, f: QueueDist) -> float:
    """Diffusion-limit volatility per unit rescaled time for balanced flow.

    tick * sqrt(pi lam / D(f)). Warns when called with unbalanced rates,
    where the constant is only indicative.
    """
    if not params.balanced:
        warnings.warn("vol_balanced called with lam != mu + theta", stacklevel=2)
    d = depth(f)
    if d <= 0.0:
        raise ValueError("depth must be positive")
    return params.tick * math.sqrt(math.pi * params.lam / d)


def vol_balanced_window(params: ModelParams, f: QueueDist, n: int) -> float:
    """Windowed standard-deviation form tick * sqrt(n pi lam / D(f)).

    n is the rescaling index of the window (roughly: a window of W seconds
    corresponds to the n solving n log(n pi lam / D) = W).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(n) * vol_balanced(params, f)


@functools.lru_cache(maxsize=4096)
def _expected_duration_cached(lam: float, mt: float, x: int, y: int) -> float:
    params = ModelParams.from_rates(lam, mt)
    rho = (math.sqrt(lam) - math.sqrt(mt)) ** 2
    # survival decays like e^{-2 rho t}; pick T so the discarded tail is ~1e-9
    T = math.log(1e9) / (2.0 * rho) + (x + y) / (mt - lam)
    inner = QuadSpec(abs_tol=1e-8, rel_tol=1e-8)

    def s_tau(t: float) -> float:
        return survival_duration(x, y, t, params, inner)

    s0 = 0.25 * min(min(x, y) / (mt - lam), T)
    breaks = [0.0]
    step = s0
    while breaks[-1] + step < T:
        breaks.append(breaks[-1] + step)
        step *= 2.0
    breaks.append(T)
    outer = QuadSpec(abs_tol=1e-6 / len(breaks), rel_tol=1e-7)
    return math.fsum(
        integrate_finite(s_tau, breaks[k], breaks[k + 1], outer) for k in range(len(breaks) - 1)
    )


def expected_duration(x: int, y: int, params: ModelParams) -> float:
    """Mean time until the next price move from queues (x, y).

    Integrates the full survival function (prefactor included) over [0, inf);
    finite only for lam < mu + theta. Bounded above by
    min(x, y) / (mu + theta - lam), the mean depletion time of the smaller
    queue alone.
    """
    if x < 1 or y < 1:
        raise ValueError("queue sizes must be >= 1")
    _require_negative_drift(params)
    lo, hi = (x, y) if x <= y else (y, x)
    return _expected_duration_cached(params.lam, params.mu_theta, lo, hi)


def expected_duration_raw(x: int, y: int, params: ModelParams) -> float:
    """Prefactor-free variant integral of psi_x psi_y, kept for comparison.

    Differs from expected_duration exactly by the factor
    sqrt(((mu+theta)/lam)^(x+y)); simulation sides with the prefactored
    version, which is the one used in the volatility formulas.
    """
    pref = (params.mu_theta / params.lam) ** (0.5 * (x + y))
    return expected_duration(x, y, params) / pref


def expected_duration_f(f: QueueDist, params: ModelParams) -> float:
    """f-averaged mean duration m(f) = sum f(i, j) E[tau | (i, j)]."""
    _require_negative_drift(params)
    return math.fsum(p * expected_duration(i, j, params) for i, j, p in f.items())


def vol_unbalanced(params: ModelParams, f: QueueDist) -> float:
    """Diffusion-limit volatility per unit rescaled time for lam < mu + theta.

    tick / sqrt(m(f)) where m(f) is the mean inter-move duration under f
    replenishment.
    """
    m = expected_duration_f(f, params)
    return params.tick / math.sqrt(m)
