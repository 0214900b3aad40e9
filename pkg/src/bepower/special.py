"""Inverse CDF kernels.

Quantile functions for the standard normal, chi-square, and Student-t
distributions, the latter two with real-valued (not necessarily integer)
degrees of freedom.  These are the only distributional primitives the
power estimators need: chi-square quantiles map unit-cube coordinates to
sample variances, normal quantiles map them to mean differences, and t
quantiles set the rejection threshold.  Real degrees of freedom matter
because the sample-size search treats n as a continuous variable.

All three functions accept scalars or numpy arrays and broadcast like
ufuncs.  Probabilities must lie strictly inside (0, 1); any float in that
open interval produces a finite result (coordinates from the clamped
Sobol' stream can be as small as 2**-64, which is well inside the safe
range).
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

__all__ = ["inv_norm", "inv_chisq", "t_quantile"]

_TINY = np.finfo(float).tiny


def _checked_p(p):
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValueError("p must lie strictly inside (0, 1)")
    return arr


def _checked_df(df):
    arr = np.asarray(df, dtype=float)
    if not np.all(arr > 0.0):
        raise ValueError("df must be positive")
    return arr


def inv_norm(p):
    """Standard normal quantile.

    Parameters
    ----------
    p : float or array_like
        Probability in the open interval (0, 1).

    Returns
    -------
    float or ndarray
        z such that Phi(z) = p.

    Notes
    -----
    Relative error is at the 1e-15 level away from the center and the
    absolute error near z = 0 is at machine precision, comfortably
    inside the 1e-10 budget the root-finding tolerances assume.
    """
    arr = _checked_p(p)
    out = _sp.ndtri(arr)
    return out if out.ndim else float(out)


def inv_chisq(p, df):
    """Chi-square quantile with real degrees of freedom.

    Parameters
    ----------
    p : float or array_like
        Probability in (0, 1).
    df : float or array_like
        Degrees of freedom, any positive real.

    Returns
    -------
    float or ndarray
        x such that the regularized lower incomplete gamma function
        P(df/2, x/2) equals p.
    """
    arr = _checked_p(p)
    dfa = _checked_df(df)
    out = 2.0 * _sp.gammaincinv(0.5 * dfa, arr)
    return out if out.ndim else float(out)


def t_quantile(p, df):
    """Student-t quantile with real degrees of freedom.

    Parameters
    ----------
    p : float or array_like
        Probability in (0, 1).
    df : float or array_like
        Degrees of freedom, any positive real.

    Returns
    -------
    float or ndarray
        t such that the t CDF with df degrees of freedom equals p.

    Notes
    -----
    Inverts the incomplete beta representation: with
    w = df / (df + t**2), the two-sided tail mass is
    I_w(df/2, 1/2) = 2 * min(p, 1 - p), so w is recovered with one
    `betaincinv` call and t with one square root.  This is several
    times faster than the generic t inverse and agrees with it to
    about 5e-11 relative.  For tail masses below roughly 1e-300 the
    beta inverse underflows to zero; w is floored at the smallest
    normal double, which saturates |t| near sqrt(df) * 1e154 instead
    of overflowing.  Relative accuracy is ~1e-10 away from p = 0.5;
    near the center the error is absolute (t = 0 is returned exactly
    at p = 0.5).
    """
    arr = _checked_p(p)
    dfa = _checked_df(df)
    tail = np.minimum(arr, 1.0 - arr)
    w = _sp.betaincinv(0.5 * dfa, 0.5, 2.0 * tail)
    w = np.maximum(w, _TINY)
    t = np.sqrt(dfa * (1.0 - w) / w)
    out = np.where(arr < 0.5, -t, t)
    return out if out.ndim else float(out)
