"""Recurrence polynomials of the pencil and zero isolation by interlacing.

P_n(z) = det(z M_n - L_n) is built from the top-left corner,

    P_n = (z - a_n) P_{n-1} - b_{n-1} z P_{n-2},   P_0 = 1, P_{-1} = 0,

and Delta_n from the bottom-right corner,

    Delta_n = (z - a_{N-n+1}) Delta_{n-1} - b_{N-n+1} z Delta_{n-2}.

Every function returns the whole sequence ``values[0..N]`` evaluated at ``z``;
``z`` may be a scalar or an array, in which case the trailing axes follow it.
No polynomial coefficients are ever formed.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .core import BidiagonalPencil
from .errors import BracketFailure

BISECT_RTOL = 1e-14
BISECT_MAXITER = 200
MAX_DOUBLINGS = 2100


def _p_sequence(a, b, z, n_max):
    z = np.asarray(z, dtype=float)
    vals = np.empty((n_max + 1,) + z.shape)
    vals[0] = 1.0
    if n_max >= 1:
        vals[1] = z - a[0]
    for n in range(2, n_max + 1):
        vals[n] = (z - a[n - 1]) * vals[n - 1] - b[n - 2] * z * vals[n - 2]
    return vals


def _p_last(a, b, z, n):
    # P_n alone with two rolling values; the hot path of bisection
    prev, cur = 1.0, z - a[0]
    for k in range(1, n):
        prev, cur = cur, (z - a[k]) * cur - (b[k - 1] * z) * prev
    return cur


def _p_with_derivative(a, b, z, n_max):
    z = np.asarray(z, dtype=float)
    vals = np.empty((n_max + 1,) + z.shape)
    ders = np.empty_like(vals)
    vals[0], ders[0] = 1.0, 0.0
    if n_max >= 1:
        vals[1], ders[1] = z - a[0], 1.0
    for n in range(2, n_max + 1):
        bn = b[n - 2]
        vals[n] = (z - a[n - 1]) * vals[n - 1] - bn * z * vals[n - 2]
        ders[n] = (
            vals[n - 1] + (z - a[n - 1]) * ders[n - 1] - bn * vals[n - 2] - bn * z * ders[n - 2]
        )
    return vals, ders


def eval_P(p: BidiagonalPencil, z) -> np.ndarray:
    return _p_sequence(p.a, p.b, z, p.N)


def eval_P_with_derivative(p: BidiagonalPencil, z) -> tuple[np.ndarray, np.ndarray]:
    return _p_with_derivative(p.a, p.b, z, p.N)


def _reversed(p: BidiagonalPencil):
    # Delta_n uses a_{N-n+1} and b_{N-n+1}: the P recurrence on reversed data.
    return p.a[::-1], p.b[::-1]


def eval_Delta(p: BidiagonalPencil, z) -> np.ndarray:
    a, b = _reversed(p)
    return _p_sequence(a, b, z, p.N)


def eval_Delta_with_derivative(p: BidiagonalPencil, z) -> tuple[np.ndarray, np.ndarray]:
    """Delta_n(z) and Delta_n'(z) for n = 0..N, by term-wise differentiation."""
    a, b = _reversed(p)
    return _p_with_derivative(a, b, z, p.N)


def _nonzero(x):
    # exact zeros of a ratio are nudged off, as in Sturm counts; the nudge
    # still squares to a normal number
    return np.where(x == 0, np.sqrt(np.finfo(x.dtype).tiny), x)


def _real(z):
    # keep extended precision when asked for, float otherwise
    z = np.asarray(z)
    return z if z.dtype == np.longdouble else z.astype(float)


def _ratios(a, b, z):
    """rho_k = P_k / P_{k-1} with rho_k' and sigma_k = z rho_k' - rho_k.

    The derivative recurrences
        rho_k'  = 1 + b_{k-1} sigma_{k-1} / rho_{k-1}^2
        sigma_k = a_k + b_{k-1} z^2 rho_{k-1}' / rho_{k-1}^2
    add positive terms only, so they carry no cancellation.
    """
    N = a.size
    rho = np.empty((N,) + z.shape, dtype=np.result_type(z, a))
    der = np.empty_like(rho)
    sig = np.empty_like(rho)
    rho[0], der[0], sig[0] = _nonzero(z - a[0]), 1.0, a[0]
    for k in range(1, N):
        r2 = rho[k - 1] ** 2
        rho[k] = _nonzero(z - a[k] - b[k - 1] * z / rho[k - 1])
        der[k] = 1.0 + b[k - 1] * sig[k - 1] / r2
        sig[k] = a[k] + b[k - 1] * z * z * der[k - 1] / r2
    return rho, der, sig


def forward_ratios(p: BidiagonalPencil, z):
    """(rho, rho', sigma) for rho_k = P_k / P_{k-1}, k = 1..N (row k-1)."""
    return _ratios(p.a, p.b, _real(z))


def backward_ratios(p: BidiagonalPencil, z):
    """(t, t', tau) for t_k = Delta_{N-k+1} / Delta_{N-k}, k = 1..N (row k-1)."""
    t, der, tau = _ratios(p.a[::-1], p.b[::-1], _real(z))
    return t[::-1], der[::-1], tau[::-1]


def twisted_pivots(p: BidiagonalPencil, z):
    """gamma_r(z) and gamma_r'(z) for r = 1..N, with gamma_r = 1 / ((zM - L)^{-1})_{rr}.

    det(zM - L) = P_{r-1}(z) Delta_{N-r}(z) gamma_r(z) for every split r, and
    gamma_r' is a sum of positive terms. Also returns the forward ratios.
    """
    z = _real(z)
    rho, rder, sig = forward_ratios(p, z)
    t, tder, tau = backward_ratios(p, z)
    b = p.b.reshape((-1,) + (1,) * z.ndim)
    gam = z - p.a.reshape((-1,) + (1,) * z.ndim)
    gder = np.ones_like(gam)
    gam[1:] -= b * z / rho[:-1]
    gder[1:] += b * sig[:-1] / rho[:-1] ** 2
    gam[:-1] -= b * z / t[1:]
    gder[:-1] += b * tau[1:] / t[1:] ** 2
    return gam, gder, rho, t


def _upper_bracket(evaluate, start, floor):
    U = max(float(start), 2.0 * float(floor), 1e-300)
    for _ in range(MAX_DOUBLINGS):
        val = evaluate(np.array([U]))[0]
        if val > 0:
            return U
        U *= 2.0
        if not np.isfinite(U):
            break
    raise BracketFailure((floor, U), "upper bracket not found by doubling")


def bisect_brackets(evaluate, lo, hi, f_lo, f_hi, rtol=BISECT_RTOL, maxiter=BISECT_MAXITER):
    """Vectorized bisection of sign changes inside ``[lo, hi]`` (elementwise).

    Returns the final (lo, hi) arrays. Raises :class:`BracketFailure` for a
    bracket without a sign change.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    s_lo = np.sign(f_lo)
    s_hi = np.sign(f_hi)
    bad = np.flatnonzero(s_lo * s_hi >= 0)
    if bad.size:
        k = int(bad[0])
        raise BracketFailure((float(lo[k]), float(hi[k])))
    # Brackets that are already narrow enough keep halving with the rest;
    # that only tightens them and saves a mask per iteration.
    for _ in range(maxiter):
        if np.all(hi - lo <= rtol * np.maximum(np.abs(lo), np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        s_m = np.sign(evaluate(mid))
        right = s_m == s_lo
        lo = np.where(right | (s_m == 0), mid, lo)
        hi = np.where(right, hi, mid)
    return lo, hi


def zeros_interlaced(
    evaluate: Callable[[np.ndarray], np.ndarray],
    prev_zeros,
    upper_hint: float,
    derivative: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Zeros of a degree-n member of an interlacing family.

    ``evaluate`` maps an array of points to the polynomial values (monic, so
    positive beyond the largest zero). ``prev_zeros`` are the n-1 sorted zeros
    of the previous member; the n zeros lie one each in (0, z_1),
    (z_1, z_2), ..., (z_{n-1}, U), with U found by doubling ``upper_hint``.
    Each bracket is bisected to relative width 1e-14 and, when ``derivative``
    is given, polished by one Newton step kept inside the final bracket.
    """
    prev = np.asarray(prev_zeros, dtype=float).reshape(-1)
    floor = prev[-1] if prev.size else 0.0
    U = _upper_bracket(evaluate, upper_hint, floor)
    ends = np.concatenate(([0.0], prev, [U]))
    n = prev.size + 1
    # Endpoint signs come from interlacing, not evaluation: when consecutive
    # members share a zero to within rounding, the computed sign there is noise.
    signs = (-1.0) ** (n - np.arange(n + 1))
    signs[-1] = 1.0
    lo, hi = bisect_brackets(evaluate, ends[:-1], ends[1:], signs[:-1], signs[1:])
    x = 0.5 * (lo + hi)
    if derivative is not None:
        fx = evaluate(x)
        dfx = derivative(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dfx != 0, fx / dfx, 0.0)
        cand = x - step
        ok = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        x = np.where(ok, cand, x)
    if x[0] <= 0 or np.any(np.diff(x) <= 0):
        raise BracketFailure((0.0, U), "isolated zeros are not strictly increasing")
    return x


def pencil_zeros(p: BidiagonalPencil, upto: int | None = None) -> list[np.ndarray]:
    """Zeros of P_1, ..., P_upto by cascading interlaced brackets."""
    a, b = p.a, p.b
    upto = p.N if upto is None else upto
    hint = float(np.sum(a) + np.sum(b) + 1.0)
    out = [np.array([a[0]])]
    for n in range(2, upto + 1):
        def ev(z, n=n):
            return _p_last(a, b, z, n)

        def dev(z, n=n):
            return _p_with_derivative(a, b, z, n)[1][n]

        out.append(zeros_interlaced(ev, out[-1], hint, dev))
    return out
