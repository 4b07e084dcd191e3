"""Time evolution through the spectral data.

The flow linearizes on (lambda, w): eigenvalues stay put and the weights
evolve as w_j(t) proportional to w_j(0) exp(-t F(lambda_j)). A trajectory is
therefore direct transform once, evolve, inverse transform per sample.
Nothing here integrates in time.

Asymptotic predictors assume F strictly increasing. A decreasing F is
handled through w_j(t; F) = w_j(-t; -F): swap in -F and flip the direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import BidiagonalPencil, FlowSpec, NewtonianState, SpectralData, Trajectory
from .direct import direct_transform
from .errors import BracketFailure, DegenerateWeight, NonMonotoneFlow, Overflow, ValidationError
from .inverse import peel_all_log

PLUS = "plus_infinity"
MINUS = "minus_infinity"


def _direction(direction) -> int:
    if direction in (PLUS, "+", "+inf", "plus", 1, +1.0):
        return 1
    if direction in (MINUS, "-", "-inf", "minus", -1, -1.0):
        return -1
    raise ValidationError(f"direction must be {PLUS!r} or {MINUS!r}, got {direction!r}")


@dataclass(frozen=True)
class RatePrediction:
    """ln b_n(t) ~ ln(prefactor) - exponent * |t| as t runs off in ``direction``."""

    n: int
    exponent: float
    prefactor: float
    direction: str

    def log_b(self, t):
        return math.log(self.prefactor) - self.exponent * np.abs(np.asarray(t, dtype=float))


class ALimit(float):
    """Limit of a_n(t), carrying the first-order correction coefficients.

    lambda_lim - a_n(t) ~ c_plus * b_n(t) + c_minus * b_{n-1}(t).
    """

    def __new__(cls, value, c_plus=0.0, c_minus=0.0):
        obj = super().__new__(cls, value)
        obj.c_plus = float(c_plus)
        obj.c_minus = float(c_minus)
        return obj

    def __repr__(self):
        return f"ALimit({float(self)!r}, c_plus={self.c_plus!r}, c_minus={self.c_minus!r})"


def evolve_log_weights(s0: SpectralData, F: FlowSpec, t: float) -> np.ndarray:
    """Normalized log weights at time t."""
    with np.errstate(over="ignore", invalid="ignore"):
        ell = s0.log_w - t * F(s0.lam)
    if not np.all(np.isfinite(ell)):
        raise Overflow(f"t * F(lambda) is not finite at t={t!r}")
    return ell - logsumexp(ell)


def evolve_weights(s0: SpectralData, F: FlowSpec, t: float) -> SpectralData:
    return SpectralData.from_log_weights(s0.lam, evolve_log_weights(s0, F, t))


def _pencil_at(s0: SpectralData, F: FlowSpec, t: float):
    ell = evolve_log_weights(s0, F, t)
    if s0.N == 1:
        return s0.lam.copy(), np.empty(0)
    try:
        return peel_all_log(s0.lam, ell)
    except DegenerateWeight as exc:
        raise DegenerateWeight(exc.j, t=t, detail=exc.detail) from exc
    except BracketFailure as exc:
        raise DegenerateWeight(0, t=t, detail=str(exc)) from exc


def solve_trajectory(p0: BidiagonalPencil, F: FlowSpec, times) -> Trajectory:
    """Matrix data at each of ``times``, each computed independently from s0.

    b is reported alongside its logarithm; at long times b_n underflows
    while log b_n stays accurate.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    s0 = direct_transform(p0)
    a = np.empty((times.size, p0.N))
    log_b = np.empty((times.size, p0.N - 1))
    for i, t in enumerate(times):
        a[i], log_b[i] = _pencil_at(s0, F, float(t))
    spectral = tuple(s0.lam for _ in times)
    return Trajectory(times, a, np.exp(log_b), log_b=log_b, spectral=spectral)


def _increasing(s0: SpectralData, F: FlowSpec, d: int):
    """Reduce to increasing F. Returns (values of the increasing F at lambda, direction)."""
    vals = F(s0.lam)
    if F.direction < 0:
        vals, d = -vals, -d
    if s0.N > 1 and not np.all(np.diff(vals) > 0):
        raise NonMonotoneFlow(f"{F} is not strictly monotone on the spectrum")
    return vals, d


def _check_index(n, upper):
    if not 1 <= n <= upper:
        raise ValidationError(f"index n={n} outside 1..{upper}")


def predict_b_rate(s0: SpectralData, F: FlowSpec, n: int, direction) -> RatePrediction:
    """Exponential decay of b_n(t) in the given direction."""
    _check_index(n, s0.N - 1)
    d0 = _direction(direction)
    Fv, d = _increasing(s0, F, d0)
    lam, log_w = s0.lam, s0.log_w
    N = s0.N
    if d > 0:
        # lambda_{n+1} against lambda_1..lambda_n
        hi, lo = lam[n], lam[n - 1]
        exponent = Fv[n] - Fv[n - 1]
        log_pref = (
            log_w[n] - log_w[n - 1]
            + (n - 1) * math.log(lo) - n * math.log(hi)
            + 2.0 * (np.sum(np.log(hi - lam[:n])) - np.sum(np.log(lo - lam[: n - 1])))
        )
    else:
        # lambda_{N-n} against lambda_{N-n+1}..lambda_N
        k = N - n  # 1-based index of lambda_{N-n}
        lo, hi = lam[k - 1], lam[k]
        exponent = Fv[k] - Fv[k - 1]
        log_pref = (
            log_w[k - 1] - log_w[k]
            + (n - 1) * math.log(hi) - n * math.log(lo)
            + 2.0 * (np.sum(np.log(np.abs(lo - lam[k:]))) - np.sum(np.log(np.abs(hi - lam[k + 1 :]))))
        )
    return RatePrediction(n, float(exponent), float(math.exp(log_pref)), PLUS if d0 > 0 else MINUS)


def predict_a_limit(s0: SpectralData, F: FlowSpec, n: int, direction) -> ALimit:
    """lim a_n(t) in the given direction, with the first-order correction coefficients.

    For increasing F the limit at +inf is lambda_n, with
    c_plus = lambda_n / (lambda_n - lambda_{n+1}) and
    c_minus = -lambda_n / (lambda_{n-1} - lambda_n); at -inf the spectrum is
    read backwards.
    """
    N = s0.N
    _check_index(n, N)
    _, d = _increasing(s0, F, _direction(direction))
    lam = np.concatenate(([np.nan], s0.lam, [np.nan]))  # 1-based with guards
    if d > 0:
        k = n
        c_plus = lam[k] / (lam[k] - lam[k + 1]) if n < N else 0.0
        c_minus = -lam[k] / (lam[k - 1] - lam[k]) if n > 1 else 0.0
    else:
        k = N - n + 1
        c_plus = lam[k] / (lam[k] - lam[k - 1]) if n < N else 0.0
        c_minus = -lam[k] / (lam[k + 1] - lam[k]) if n > 1 else 0.0
    return ALimit(lam[k], c_plus, c_minus)


def _h(x, eps):
    with np.errstate(over="ignore"):
        return np.sqrt(1.0 + eps**2 * np.exp(x))


def newtonian_to_pencil(state: NewtonianState) -> BidiagonalPencil:
    """Matrix data from positions and momenta, h(x) = sqrt(1 + eps^2 e^x).

    q_0 = -inf and q_{N+1} = +inf, so both boundary h factors are 1.
    """
    q, p, eps = state.q, state.p, state.epsilon
    dq = q[:-1] - q[1:]  # q_n - q_{n+1}
    h = np.concatenate(([1.0], _h(dq, eps), [1.0]))  # h(q_{n-1} - q_n), n = 1..N+1
    with np.errstate(over="ignore", invalid="ignore"):
        a = h[:-1] * np.exp(p) / h[1:]
        b = eps**2 * np.exp(dq + p[:-1]) * h[:-2] / h[1:-1]
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise Overflow("exponential of a position difference overflowed")
    return BidiagonalPencil(a, b)


def q_gap_slopes(s0: SpectralData, direction) -> np.ndarray:
    """Asymptotic slopes of q_{n+1} - q_n along the F = identity flow."""
    gaps = np.diff(s0.lam)
    if _direction(direction) > 0:
        return gaps
    return -gaps[::-1]
