"""Steady-state analysis of random spiking-neuron networks.

Two models live here. The general network (`RnnNetwork`) couples neurons
through excitatory/inhibitory rate weights; its stationary firing
probabilities solve

    q_i = (Lambda_i + sum_j q_j w+_ji) / (r_i + lambda_i + sum_j q_j w-_ji)

and are found by damped fixed-point iteration. The cluster model
(`ClusterParams`) packs n identical neurons that trigger each other's
firing; its stationary probability under external inhibition x solves the
balance equation

    q = (L+ + r q (n-1)(1-p) / (n - q p (n-1)))
        / (r + L- + x + r q p (n-1) / (n - q p (n-1)))

which clears to the quadratic a q^2 + b q + c = 0 with

    a = p (n-1) (L- + x)
    b = (n-1) (r (1-p) - L+ p) - n (r + L- + x)
    c = n L+

`zeta` returns the probability root of that quadratic and is the hidden
activation used by the classifier; `cluster_fixed_point` finds the same
root by bisection and serves as an independent oracle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    InvalidInputError,
    NoRealRootError,
    NoRootError,
    RootRangeError,
    ShapeError,
    UnstableNetworkError,
)

__all__ = [
    "ClusterParams",
    "DEFAULT_CLUSTER",
    "RnnNetwork",
    "cluster_quadratic",
    "zeta",
    "zeta_map",
    "cluster_fixed_point",
    "rnn_steady_state",
    "marginal_pmf",
]

# Roots within this distance of 0 or 1 are snapped to the boundary;
# anything further outside [0, 1] is an error.
_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ClusterParams:
    """Constants of a cluster of n packed neurons.

    n: cluster size (>= 2; the formulas contain n-1 factors)
    p: repeated-firing probability, 0 < p < 1
    r: firing rate, > 0
    lambda_plus: external excitatory Poisson rate, >= 0
    lambda_minus: external inhibitory Poisson rate, >= 0

    lambda_plus < r + lambda_minus is required; it keeps the default
    parameter space inside the regime where the cluster does not saturate.
    Saturation for a *specific* input is still possible near the low end of
    the input domain; `min_stable_input` gives the exact threshold.
    """

    n: int
    p: float
    r: float
    lambda_plus: float
    lambda_minus: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidInputError(f"cluster size n must be an integer >= 2, got {self.n}")
        if not 0.0 < self.p < 1.0:
            raise InvalidInputError(f"repeat-firing probability p must be in (0, 1), got {self.p}")
        if self.r <= 0.0:
            raise InvalidInputError(f"firing rate r must be > 0, got {self.r}")
        if self.lambda_plus < 0.0 or self.lambda_minus < 0.0:
            raise InvalidInputError("external rates must be non-negative")
        if self.lambda_plus >= self.r + self.lambda_minus:
            raise InvalidInputError(
                "lambda_plus must be below r + lambda_minus "
                f"(got {self.lambda_plus} >= {self.r + self.lambda_minus})"
            )

    @property
    def min_stable_input(self):
        """Smallest inhibition x at which the activation is a probability.

        The quadratic's root stays in [0, 1] exactly when
        x >= lambda_plus - lambda_minus - r (1 + m) / (n - m), m = (n-1) p.
        Zero for the library defaults, so the whole input domain is usable.
        """
        m = (self.n - 1) * self.p
        return max(
            0.0,
            self.lambda_plus - self.lambda_minus - self.r * (1.0 + m) / (self.n - m),
        )

    @property
    def stable_for_all_inputs(self):
        """True when zeta is defined for every input x >= 0."""
        return self.min_stable_input == 0.0


#: Classification defaults: stable for all x >= 0 and usefully non-flat on
#: the pre-activation range produced by [0,1] weights over image data.
DEFAULT_CLUSTER = ClusterParams(n=10, p=0.05, r=1.0, lambda_plus=0.05, lambda_minus=0.01)


def cluster_quadratic(params, x):
    """Coefficients (a, b, c) of the cluster balance quadratic at inhibition x.

    Clearing denominators in the balance equation gives
    a = p(n-1)(L- + x), b = (n-1)(r(1-p) - L+ p) - n(r + L- + x), c = n L+.
    """
    if x < 0.0:
        raise InvalidInputError(f"inhibition input x must be >= 0, got {x}")
    n, p, r = params.n, params.p, params.r
    lp, lm = params.lambda_plus, params.lambda_minus
    a = p * (n - 1) * (lm + x)
    b = (n - 1) * (r * (1.0 - p) - lp * p) - n * (r + lm + x)
    c = n * lp
    return a, b, c


def _probability_root(a, b, c):
    """Probability-branch root of a q^2 + b q + c = 0.

    b < 0 for every admissible parameter set, so the rationalized form
    2c / (-b + sqrt(b^2 - 4ac)) is cancellation-free, handles the
    degenerate a = 0 case, and returns exactly 0 when c = 0.
    """
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise NoRealRootError(f"negative discriminant {disc}")
    return 2.0 * c / (-b + np.sqrt(disc))


def zeta(params, x):
    """Cluster activation: the stationary firing probability at inhibition x.

    Raises RootRangeError when the root is not a probability (the cluster
    saturates; happens only for x below params.min_stable_input).
    """
    a, b, c = cluster_quadratic(params, x)
    q = _probability_root(a, b, c)
    if q > 1.0 + _BOUNDARY_TOL or q < -_BOUNDARY_TOL:
        raise RootRangeError(
            f"root {q} is not a probability; cluster saturates at input {x} "
            f"(needs x >= {params.min_stable_input})"
        )
    return min(max(q, 0.0), 1.0)


def zeta_map(params, x):
    """Element-wise zeta over a matrix of non-negative inputs.

    Vectorized; any offending element fails the whole call with its index.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size and x.min() < 0.0:
        idx = np.unravel_index(int(np.argmin(x)), x.shape)
        idx = tuple(int(i) for i in idx)
        raise InvalidInputError(f"negative input {x[idx]} at index {idx}")
    n, p, r = params.n, params.p, params.r
    lp, lm = params.lambda_plus, params.lambda_minus
    m = (n - 1) * p
    s = lm + x
    a = m * s
    neg_b = r * (1.0 + m) + n * s + m * lp  # -b, positive
    c = n * lp
    q = 2.0 * c / (neg_b + np.sqrt(neg_b * neg_b - 4.0 * a * c))
    if q.size and q.max() > 1.0 + _BOUNDARY_TOL:
        idx = np.unravel_index(int(np.argmax(q)), q.shape)
        idx = tuple(int(i) for i in idx)
        raise RootRangeError(
            f"root {q[idx]} at index {idx} is not a probability "
            f"(input {x[idx]} below saturation threshold {params.min_stable_input})"
        )
    return np.clip(q, 0.0, 1.0)


def cluster_fixed_point(params, x, tol=1e-12):
    """Root of the cluster quadratic on [0, 1] by bisection, refined to tol.

    Independent of the closed form in `zeta`: only evaluates the polynomial
    and halves the bracket. Returns q with |a q^2 + b q + c| <= tol.

    Raises NoRootError when the polynomial has no sign change on [0, 1].
    """
    a, b, c = cluster_quadratic(params, x)

    def poly(q):
        return (a * q + b) * q + c

    if c == 0.0:
        return 0.0  # no excitation: q = 0 solves exactly
    lo, hi = 0.0, 1.0
    flo, fhi = poly(lo), poly(hi)
    if abs(flo) <= tol:
        return lo
    if abs(fhi) <= tol:
        return hi
    if flo * fhi > 0.0:
        raise NoRootError(f"no sign change on [0, 1]: poly(0)={flo}, poly(1)={fhi}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = poly(mid)
        if abs(fmid) <= tol:
            return mid
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
        if hi - lo <= np.finfo(np.float64).eps * 2:
            break
    mid = 0.5 * (lo + hi)
    if abs(poly(mid)) <= tol:
        return mid
    raise ConvergenceError(
        f"bisection residual {poly(mid)} above tol {tol} at float64 resolution"
    )


@dataclass(frozen=True)
class RnnNetwork:
    """A general network of M spiking neurons with rate weights.

    w_plus[i, j] / w_minus[i, j] are the excitatory / inhibitory rates from
    neuron i to neuron j; ext_plus, ext_minus are the per-neuron external
    arrival rates and rates the firing rates. Row sums of w_plus + w_minus
    cannot exceed the firing rate (spike routing probabilities sum to <= 1).
    """

    size: int
    w_plus: np.ndarray
    w_minus: np.ndarray
    ext_plus: np.ndarray
    ext_minus: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        m = self.size
        for name in ("w_plus", "w_minus", "ext_plus", "ext_minus", "rates"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.w_plus.shape != (m, m) or self.w_minus.shape != (m, m):
            raise ShapeError(f"weight matrices must be {m}x{m}")
        for name in ("ext_plus", "ext_minus", "rates"):
            if getattr(self, name).shape != (m,):
                raise ShapeError(f"{name} must have length {m}")
        if (self.w_plus < 0).any() or (self.w_minus < 0).any():
            raise InvalidInputError("weights must be non-negative")
        if (self.ext_plus < 0).any() or (self.ext_minus < 0).any():
            raise InvalidInputError("external rates must be non-negative")
        if (self.rates <= 0).any():
            raise InvalidInputError("firing rates must be positive")
        row_sums = self.w_plus.sum(axis=1) + self.w_minus.sum(axis=1)
        if (row_sums > self.rates * (1.0 + 1e-12)).any():
            raise InvalidInputError("row sums of w_plus + w_minus exceed firing rates")


def rnn_steady_state(net, tol=1e-12, max_iter=10**6):
    """Stationary firing probabilities of a general network.

    Damped fixed-point iteration (factor 0.5) of

        F_i(q) = (ext_plus_i + (qT W+)_i) / (rates_i + ext_minus_i + (qT W-)_i)

    from q = 0 until the residual max|q - F(q)| drops below tol.

    Raises ConvergenceError after max_iter sweeps and UnstableNetworkError
    if the converged solution saturates (any q_i >= 1).
    """
    q = np.zeros(net.size)
    denom_base = net.rates + net.ext_minus
    for _ in range(max_iter):
        fq = (net.ext_plus + q @ net.w_plus) / (denom_base + q @ net.w_minus)
        if np.max(np.abs(q - fq)) <= tol:
            if (fq >= 1.0).any():
                raise UnstableNetworkError(
                    f"saturated neurons at indices {np.flatnonzero(fq >= 1.0).tolist()}"
                )
            return fq
        q = 0.5 * (q + fq)
    raise ConvergenceError(f"steady state not reached in {max_iter} iterations")


def marginal_pmf(q, k):
    """P[neuron excitation level = k] = q^k (1 - q) for stationary q in [0, 1)."""
    if not 0.0 <= q < 1.0:
        raise InvalidInputError(f"q must be in [0, 1), got {q}")
    if int(k) != k or k < 0:
        raise InvalidInputError(f"k must be a non-negative integer, got {k}")
    return q**k * (1.0 - q)
