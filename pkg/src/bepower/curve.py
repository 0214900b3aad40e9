"""Power curves by root-finding on sampling-distribution segments.

For a fixed unit-cube point u, the mapped standard error se(n) and the
rejection threshold Lambda(n) are continuous functions of a real-valued
sample size n (group 2 gets q * n).  The trial mapped from u lands in
the rejection region exactly where g(n) = se(n) - Lambda(n) <= 0, so
the whole power curve is recovered from one root of g per point: the
fraction of points whose smallest crossing lies at or below n is an
empirical power estimate at n.  Locating one root costs O(log2(B))
evaluations of g on a geometric bracket grid plus a Brent refinement,
instead of a full m-point power evaluation per candidate n.

The recommended sample size is the type-1 empirical quantile of the
crossings at the target power.  Because g can, rarely, have several
roots, the quantile is double-checked against the sign of g for every
point at the quantile itself; mismatched points are re-solved starting
from the quantile (the safeguard), which restores exactness of the
power estimate there.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .qrng import sobol_stream
from .special import inv_chisq, inv_norm, t_quantile
from .tost import require_curve_spec, welch_df

__all__ = [
    "CENSORED",
    "DEFAULT_B",
    "CurvePoint",
    "PowerCurve",
    "se_of_n",
    "lambda_of_n",
    "smallest_crossing",
    "power_curve",
]

CENSORED = math.inf
DEFAULT_B = 65536.0
DEFAULT_TOL = 1e-6

# quantile ranks and final ceilings are guarded against float noise in
# products like 0.8 * m that are mathematically integral
_RANK_EPS = 1e-9


@dataclass(frozen=True)
class CurvePoint:
    """Root-finding result for one unit-cube point.

    crossing_n is the smallest located n with g(n) <= 0, or CENSORED
    (+inf) when g stays positive on the whole bracket grid up to B.
    g_evals counts evaluations of g spent on this point, including the
    Brent refinement.
    """

    point_index: int
    crossing_n: float
    reinitialized: bool = False
    g_evals: int = 0


@dataclass(frozen=True)
class PowerCurve:
    """Empirical power curve and sample-size recommendation.

    solutions holds one CurvePoint per unit-cube point.  n_star_initial
    is the target-power quantile of the raw crossings, n_star_final the
    quantile after the safeguard.  rec_n1 and rec_n2 are the integer
    recommendations ceil(n*) and ceil(q n*).
    """

    solutions: tuple
    n_star_initial: float
    n_star_final: float
    rec_n1: int
    rec_n2: int
    target_power: float

    @property
    def crossings(self):
        return np.array([s.crossing_n for s in self.solutions])

    @property
    def m(self):
        return len(self.solutions)

    @property
    def censored_count(self):
        return int(np.count_nonzero(np.isinf(self.crossings)))

    @property
    def reinit_count(self):
        return sum(1 for s in self.solutions if s.reinitialized)

    @property
    def g_evals_total(self):
        return sum(s.g_evals for s in self.solutions)

    def ecdf(self, n):
        """Fraction of points whose crossing is at or below n.

        Censored points count in the denominator, never the numerator,
        so the curve tops out below 1 when any point is censored.
        """
        return float(np.count_nonzero(self.crossings <= n)) / self.m


def _domain_start(q):
    """Smallest real n with both group sizes at least 2."""
    return max(2.0, 2.0 / q)


def _check_n_domain(n, q):
    if n < 2.0 or q * n < 2.0:
        raise ValueError("n and q * n must both be at least 2")


def _se_sq_terms(u1, u2, spec, n):
    """Within-sqrt pieces of se(n)**2, already divided by group sizes."""
    n2 = spec.q * n
    s1_sq = spec.sigma1 ** 2 * inv_chisq(u1, n - 1.0) / (n - 1.0)
    s2_sq = spec.sigma2 ** 2 * inv_chisq(u2, n2 - 1.0) / (n2 - 1.0)
    return s1_sq, s2_sq, n2


def se_of_n(u, spec, n):
    """Standard error of the mean difference as a function of real n.

    se(n) = sqrt(s1_sq(n) / n + s2_sq(n) / (q n)) with the variances
    mapped from u at degrees of freedom n - 1 and q n - 1.  Continuous
    and eventually O(n**-1/2), though it can rise over small n when
    both variance coordinates sit in the lower tail.
    """
    _check_n_domain(n, spec.q)
    s1_sq, s2_sq, n2 = _se_sq_terms(float(u[0]), float(u[1]), spec, float(n))
    return math.sqrt(s1_sq / n + s2_sq / n2)


def lambda_of_n(u, spec, n):
    """Rejection threshold as a function of real n.

    Lambda(n) = min(d_bar(n) - delta_L, delta_U - d_bar(n)) divided by
    the upper-alpha t quantile at the Welch degrees of freedom nu(n),
    and 0 whenever d_bar(n) falls outside the open limit interval.  As
    n grows, d_bar(n) tends to mu_diff and nu(n) to infinity, so
    Lambda(n) approaches min(mu_diff - delta_L, delta_U - mu_diff)
    divided by the normal quantile.
    """
    require_curve_spec(spec)
    _check_n_domain(n, spec.q)
    n = float(n)
    s1_sq, s2_sq, n2 = _se_sq_terms(float(u[0]), float(u[1]), spec, n)
    d_bar = spec.mu_diff + inv_norm(float(u[2])) * math.sqrt(
        spec.sigma1 ** 2 / n + spec.sigma2 ** 2 / n2)
    margin = min(d_bar - spec.delta_L, spec.delta_U - d_bar)
    if margin <= 0.0:
        return 0.0
    nu = welch_df(s1_sq, s2_sq, n, n2)
    return margin / t_quantile(1.0 - spec.alpha, nu)


def _g_scalar(u1, u2, z3, spec, n):
    """g(n) = se(n) - Lambda(n) for one point, z3 = inv_norm(u3) cached."""
    s1_sq, s2_sq, n2 = _se_sq_terms(u1, u2, spec, n)
    se = math.sqrt(s1_sq / n + s2_sq / n2)
    d_bar = spec.mu_diff + z3 * math.sqrt(spec.sigma1 ** 2 / n + spec.sigma2 ** 2 / n2)
    margin = min(d_bar - spec.delta_L, spec.delta_U - d_bar)
    if margin <= 0.0:
        return se
    nu = welch_df(s1_sq, s2_sq, n, n2)
    return se - margin / t_quantile(1.0 - spec.alpha, nu)


def g_at(points, spec, n):
    """Vectorized g(n) over an (m, 3) block of points at one real n."""
    _check_n_domain(n, spec.q)
    n = float(n)
    n2 = spec.q * n
    s1_sq = spec.sigma1 ** 2 * inv_chisq(points[:, 0], n - 1.0) / (n - 1.0)
    s2_sq = spec.sigma2 ** 2 * inv_chisq(points[:, 1], n2 - 1.0) / (n2 - 1.0)
    se = np.sqrt(s1_sq / n + s2_sq / n2)
    d_bar = spec.mu_diff + inv_norm(points[:, 2]) * math.sqrt(
        spec.sigma1 ** 2 / n + spec.sigma2 ** 2 / n2)
    margin = np.minimum(d_bar - spec.delta_L, spec.delta_U - d_bar)
    nu = welch_df(s1_sq, s2_sq, n, n2)
    lam = np.where(margin > 0.0,
                   margin / t_quantile(1.0 - spec.alpha, nu), 0.0)
    return se - lam


def _locate(g, a, b, tol):
    """Brent root of g on [a, b] pushed onto the g <= 0 side.

    Every bracket handed here has g(a) > 0 >= g(b).  Brent stops within
    xtol of the root, which can leave the returned abscissa a hair on
    the positive side; since a crossing is defined by the predicate
    g(n) <= 0, nudge right (never past b) until the predicate holds.
    Without this, the quantile point itself would spuriously trip the
    safeguard's sign check about half the time.
    """
    root = float(brentq(g, a, b, xtol=tol))
    r = root
    for _ in range(4):
        if g(r) <= 0.0:
            return r
        r = min(r + tol, b)
    return root


def _bracket_nodes(start, B):
    """Geometric bracket grid from start up to and including B.

    The canonical grid is {2, 3, 4, 6, 8, 12, 16, 24, ...}: each power
    of two and 1.5 times it, so roughly two g evaluations per doubling
    of n.  Nodes at or below start are dropped in favor of start
    itself; B is always the last node.
    """
    nodes = [start]
    canonical = [2.0, 3.0]
    v = 4.0
    while v < B:
        canonical.append(v)
        if 1.5 * v < B:
            canonical.append(1.5 * v)
        v *= 2.0
    for c in canonical:
        if start < c < B:
            nodes.append(c)
    if B > start:
        nodes.append(float(B))
    return nodes


def smallest_crossing(u, spec, B=DEFAULT_B, tol=DEFAULT_TOL, point_index=0):
    """Locate the smallest n in [2, B] with g(n) <= 0 for one point.

    Walks the geometric bracket grid until g changes sign, then hands
    the bracket to Brent's method with absolute tolerance `tol` in n.
    Returns crossing_n equal to the grid start (2, or 2/q when q < 1)
    when the point is already in the rejection region there, and
    CENSORED when g stays positive on the whole grid.

    Raises
    ------
    ValueError
        If the spec does not satisfy delta_L < mu_diff < delta_U, or
        B < 2, or tol <= 0.
    """
    require_curve_spec(spec)
    if B < 2.0:
        raise ValueError("B must be at least 2")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    u1, u2, z3 = float(u[0]), float(u[1]), inv_norm(float(u[2]))
    evals = 0

    def g(n):
        nonlocal evals
        evals += 1
        return _g_scalar(u1, u2, z3, spec, n)

    start = _domain_start(spec.q)
    prev_n = None
    for node in _bracket_nodes(start, B):
        gn = g(node)
        if gn <= 0.0:
            if prev_n is None:
                return CurvePoint(point_index, node, False, evals)
            root = _locate(g, prev_n, node, tol)
            return CurvePoint(point_index, root, False, evals)
        prev_n = node
    return CurvePoint(point_index, CENSORED, False, evals)


def _resolve_up(u1, u2, z3, spec, from_n, B, tol):
    """Smallest root of g strictly above from_n, or CENSORED."""
    evals = 0

    def g(n):
        nonlocal evals
        evals += 1
        return _g_scalar(u1, u2, z3, spec, n)

    prev_n = float(from_n)
    prev_g = g(prev_n)
    # the canonical grid always ends at B, so any from_n < B leaves B in play
    nodes = [c for c in _bracket_nodes(_domain_start(spec.q), B) if c > from_n]
    for node in nodes:
        gn = g(node)
        if (prev_g > 0.0) != (gn > 0.0):
            return _locate(g, prev_n, node, tol), evals
        prev_n, prev_g = node, gn
    return CENSORED, evals


def _resolve_down(u1, u2, z3, spec, from_n, tol):
    """Largest root of g at or below from_n.

    Scans the bracket grid downward from from_n; if g keeps its sign
    all the way to the domain start, returns the start itself (the
    point is in the rejection region from the smallest feasible n).
    """
    evals = 0

    def g(n):
        nonlocal evals
        evals += 1
        return _g_scalar(u1, u2, z3, spec, n)

    start = _domain_start(spec.q)
    upper_n = float(from_n)
    upper_g = g(upper_n)
    below = [c for c in _bracket_nodes(start, from_n) if c < from_n]
    for node in reversed(below):
        gn = g(node)
        if (gn > 0.0) != (upper_g > 0.0):
            return _locate(g, node, upper_n, tol), evals
        upper_n, upper_g = node, gn
    return start, evals


def _type1_quantile(values, target_power):
    m = len(values)
    rank = max(1, min(m, math.ceil(target_power * m - _RANK_EPS)))
    return float(np.partition(values, rank - 1)[rank - 1])


def _censoring_error(n_censored, m, B, target_power):
    return RuntimeError(
        f"censoring bound B={B:g} is too small: {n_censored} of {m} points "
        f"have no crossing by n={B:g}, so the {target_power:g} power "
        "quantile cannot be formed; raise B")


def power_curve(spec, target_power, m, seed, B=DEFAULT_B, tol=DEFAULT_TOL,
                threads=1):
    """Approximate the power curve and recommend sample sizes.

    Runs `smallest_crossing` for every point of a randomized Sobol'
    stream, takes the type-1 empirical quantile of the crossings at
    `target_power`, then applies the safeguard: g is evaluated at the
    quantile for every point, and any point whose recorded crossing
    disagrees with the sign of g there is re-solved starting from the
    quantile (upward for points that claimed to have crossed but test
    positive, downward for the reverse).  After the repair the fraction
    of crossings at or below the quantile equals the fraction of
    points with g <= 0 there exactly.  If the repair moves the
    quantile, the safeguard runs again at the new value, up to three
    rounds in total (a warning is issued if it still has not
    stabilized, which no studied design comes close to triggering).

    Parameters
    ----------
    spec : DesignSpec
        Must satisfy delta_L < mu_diff < delta_U.
    target_power : float
        Desired power, in (0, 1).
    m : int
        Number of Sobol' points.
    seed : int
        Digital-shift seed.
    B : float
        Censoring bound: points with no crossing by B are recorded as
        CENSORED.  They may sit above the quantile, but if too many
        accumulate (fraction >= 1 - target_power) the quantile itself
        would be censored and a RuntimeError names the bound.
    tol : float
        Absolute tolerance in n for each located root.
    threads : int
        Worker threads for the per-point phase; the output does not
        depend on the thread count.

    Returns
    -------
    PowerCurve
    """
    require_curve_spec(spec)
    if not 0.0 < target_power < 1.0:
        raise ValueError("target_power must lie in (0, 1)")
    if m < 1:
        raise ValueError("m must be a positive integer")
    points = sobol_stream(3, m, seed).points

    def solve(i):
        return smallest_crossing(points[i], spec, B, tol, point_index=i)

    if threads <= 1 or m < 64:
        solutions = [solve(i) for i in range(m)]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            solutions = list(pool.map(solve, range(m)))

    crossings = np.array([s.crossing_n for s in solutions])
    n_censored = int(np.count_nonzero(np.isinf(crossings)))
    if n_censored / m >= 1.0 - target_power:
        raise _censoring_error(n_censored, m, B, target_power)

    n_star_initial = _type1_quantile(crossings, target_power)
    z3 = inv_norm(points[:, 2])

    anchor = n_star_initial
    for _ in range(3):
        g_anchor = g_at(points, spec, anchor)
        claim_crossed = crossings <= anchor
        mismatch_up = claim_crossed & (g_anchor > 0.0)
        mismatch_down = ~claim_crossed & (g_anchor <= 0.0)
        for i in np.nonzero(mismatch_up)[0]:
            root, ev = _resolve_up(points[i, 0], points[i, 1], z3[i],
                                   spec, anchor, B, tol)
            crossings[i] = root
            solutions[i] = replace(solutions[i], crossing_n=root,
                                   reinitialized=True,
                                   g_evals=solutions[i].g_evals + ev)
        for i in np.nonzero(mismatch_down)[0]:
            root, ev = _resolve_down(points[i, 0], points[i, 1], z3[i],
                                     spec, anchor, tol)
            crossings[i] = root
            solutions[i] = replace(solutions[i], crossing_n=root,
                                   reinitialized=True,
                                   g_evals=solutions[i].g_evals + ev)
        new_anchor = _type1_quantile(crossings, target_power)
        if new_anchor == anchor:
            break
        anchor = new_anchor
    else:
        warnings.warn("safeguard did not stabilize after 3 rounds; "
                      "recommendation uses the last quantile",
                      RuntimeWarning, stacklevel=2)

    n_star_final = _type1_quantile(crossings, target_power)
    if math.isinf(n_star_final):
        raise _censoring_error(int(np.count_nonzero(np.isinf(crossings))),
                               m, B, target_power)
    rec_n1 = int(math.ceil(n_star_final - _RANK_EPS))
    rec_n2 = int(math.ceil(spec.q * n_star_final - _RANK_EPS))
    return PowerCurve(solutions=tuple(solutions),
                      n_star_initial=n_star_initial,
                      n_star_final=n_star_final,
                      rec_n1=rec_n1, rec_n2=rec_n2,
                      target_power=target_power)
