"""Tricube product kernel with asymmetric, possibly infinite half-widths.

The smoothing weight attached to an observation is a product over dimensions.
Each dimension contributes ``(1/h) * tricube(diff / h)`` where ``h`` is the
lower half-width when the observation sits below the query in that dimension
and the upper half-width otherwise.  A half-width of ``inf`` is a first-class
state, not a large number: the dimension contributes a factor of exactly 1.0,
as if it did not exist.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DimensionMismatchError

# Normalizing constant: integral of (1 - u^2)^3 over [-1, 1] is 32/35.
TRICUBE_NORM = 35.0 / 32.0


def tricube(u):
    """Tricube kernel ``(35/32) * (1 - u^2)^3`` on ``|u| < 1``, else 0.

    Parameters
    ----------
    u : float or ndarray

    Returns
    -------
    float or ndarray
        Same shape as ``u``; strictly positive iff ``|u| < 1``.
    """
    a = np.asarray(u, dtype=float)
    inside = np.abs(a) < 1.0
    core = 1.0 - a * a
    out = np.where(inside, TRICUBE_NORM * core * core * core, 0.0)
    if np.isscalar(u) or np.ndim(u) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Bandwidth:
    """Per-dimension lower and upper half-widths.

    Both arrays must have the same length and strictly positive entries;
    ``np.inf`` marks a dimension that is unconstrained on that side.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        up = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or up.ndim != 1:
            raise ConfigurationError("half-width arrays must be 1-D")
        if lo.shape != up.shape:
            raise DimensionMismatchError(
                f"lower has {lo.shape[0]} entries, upper has {up.shape[0]}"
            )
        if np.any(np.isnan(lo)) or np.any(np.isnan(up)):
            raise ConfigurationError("half-widths may not be NaN")
        if np.any(lo <= 0.0) or np.any(up <= 0.0):
            raise ConfigurationError("half-widths must be strictly positive")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    @classmethod
    def symmetric(cls, h: float, d: int) -> "Bandwidth":
        """A bandwidth with the same half-width ``h`` on both sides of every
        dimension."""
        return cls(np.full(d, float(h)), np.full(d, float(h)))

    def is_symmetric(self) -> bool:
        return bool(np.all(self.lower == self.upper))


def kernel_weight(x_query, x_obs, bw: Bandwidth) -> float:
    """Kernel weight of a single observation relative to a query point.

    Dimensions where the observation lies below the query use the lower
    half-width, the rest use the upper one.  Ties (``x_obs == x_query``)
    count as the upper side.  The weight is zero as soon as one dimension
    puts the observation on or outside the window edge, and exactly 1.0
    when every half-width that applies is infinite.

    Raises
    ------
    DimensionMismatchError
        If the points and the bandwidth disagree on dimension.
    """
    q = np.asarray(x_query, dtype=float)
    o = np.asarray(x_obs, dtype=float)
    if q.shape != o.shape or q.ndim != 1:
        raise DimensionMismatchError(
            f"query has shape {q.shape}, observation has shape {o.shape}"
        )
    if q.shape[0] != bw.d:
        raise DimensionMismatchError(
            f"points have {q.shape[0]} dimensions, bandwidth has {bw.d}"
        )
    w = kernel_weights(q, o[np.newaxis, :], bw)
    return float(w[0])


def kernel_weights(x_query, X, bw: Bandwidth, normalized: bool = True):
    """Vectorized kernel weights for a matrix of observations.

    Parameters
    ----------
    x_query : (d,) array_like
    X : (n, d) array_like
    bw : Bandwidth
    normalized : bool
        When True each finite dimension contributes ``(1/h) tricube(u)``;
        when False the ``1/h`` factor is dropped.  The unnormalized form
        leaves weighted least squares and variance factors unchanged (the
        scaling cancels) but is the convention under which standardized
        selection scores are comparable across window sizes.

    Returns
    -------
    (n,) ndarray of nonnegative weights.
    """
    q = np.asarray(x_query, dtype=float)
    Xa = np.atleast_2d(np.asarray(X, dtype=float))
    if q.ndim != 1 or Xa.shape[1] != q.shape[0]:
        raise DimensionMismatchError(
            f"query has {q.shape[0]} dimensions, data has {Xa.shape[1]}"
        )
    if q.shape[0] != bw.d:
        raise DimensionMismatchError(
            f"points have {q.shape[0]} dimensions, bandwidth has {bw.d}"
        )
    diff = Xa - q
    h = np.where(diff < 0.0, bw.lower, bw.upper)
    finite = np.isfinite(h)
    # diff/inf underflows to 0 harmlessly; the np.where below discards it.
    u = np.where(finite, diff / h, 0.0)
    factors = tricube(u)
    if normalized:
        factors = np.where(finite, factors / np.where(finite, h, 1.0), 1.0)
    else:
        factors = np.where(finite, factors, 1.0)
    return np.prod(factors, axis=1)


@lru_cache(maxsize=1)
def kernel_constants():
    """Second moment and roughness of the tricube kernel, by quadrature.

    Returns
    -------
    (mu2, rk) : tuple of floats
        ``mu2`` is the integral of ``u^2 K(u)``, ``rk`` the integral of
        ``K(u)^2``, both over the support.  Computed with adaptive
        quadrature at absolute tolerance 1e-12.
    """
    mu2, _ = integrate.quad(lambda t: t * t * tricube(t), -1.0, 1.0,
                            epsabs=1e-12, epsrel=1e-12)
    rk, _ = integrate.quad(lambda t: tricube(t) ** 2, -1.0, 1.0,
                           epsabs=1e-12, epsrel=1e-12)
    return float(mu2), float(rk)
