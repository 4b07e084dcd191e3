"""Inverse spectral transform: (eigenvalues, weights) -> pencil.

The primary route peels the T-fraction

    f(z) = 1 / (z - a - b z g(z)),    f, g in W_n, W_{n-1},

one level at a time, keeping every remainder in pole-residue form. Residues
are carried as logarithms and every zero of f is located as an offset from
its nearest pole, found by bisection on the log of that offset. This keeps
the peel accurate when the weights span hundreds of orders of magnitude,
where a zero may sit closer to a pole than the spacing of doubles.

The independent oracle builds the Laurent orthogonal polynomials on the
nodes and reads the coefficients off inner products.
"""

from __future__ import annotations

import numpy as np

from .core import BidiagonalPencil, SpectralData, WeylFunction
from .errors import (
    BracketFailure,
    DegenerateWeight,
    NonPositiveCoefficient,
    ZeroNorm,
)

WEIGHT_FLOOR = 1e-250
_LOG_RTOL = 1e-15
_MAXITER = 200


def _lse(x, mask=None, axis=-1):
    # plain numpy log-sum-exp; scipy's version carries per-call overhead
    # that dominates the small arrays of the zero searches
    x = np.asarray(x, dtype=float)
    if mask is not None:
        x = np.where(mask, x, -np.inf)
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def _signed_sum_sign(T, positive):
    """sign(sum_pos e^T - sum_neg e^T) row-wise, with one shared shift per row.

    This is the inner loop of every zero search, where scipy's logsumexp
    costs more in call overhead than in arithmetic.
    """
    m = np.max(T, axis=-1, keepdims=True)
    e = np.exp(T - m)
    return np.sign(np.sum(np.where(positive, e, -e), axis=-1))


def _log_a_b(lam, ell):
    log_lam = np.log(lam)
    log_a = -_lse(ell - log_lam)
    # b = sum w l - a, rewritten as a * sum_{j<k} w_j w_k (l_k - l_j)^2 / (l_j l_k):
    # same value, a sum of positive terms with no cancellation.
    j, k = np.triu_indices(lam.size, 1)
    terms = ell[j] + ell[k] + 2.0 * np.log(lam[k] - lam[j]) - log_lam[j] - log_lam[k]
    return log_a, log_a + _lse(terms)


def _offsets(lam, anchor, side, delta):
    """Signed distances z - lam_k for z = lam[anchor] + side * delta, row per zero."""
    D = (lam[anchor][:, None] - lam[None, :]) + (side * delta)[:, None]
    D[np.arange(anchor.size), anchor] = side * delta
    return D


def _sign_f(lam, ell, anchor, side, log_delta):
    """Sign of f at lam[anchor] + side * e^log_delta, with the terms it sums.

    Returns (sign, pos, T): term k is +e^T[k] where pos, else -e^T[k].
    """
    rows = np.arange(anchor.size)
    D = _offsets(lam, anchor, side, np.exp(log_delta))
    with np.errstate(divide="ignore"):
        T = ell[None, :] - np.log(np.abs(D))
    # The anchor term is ell - log(delta) exactly, and its sign is side even
    # when delta underflows to zero.
    T[rows, anchor] = ell[anchor] - log_delta
    pos = D > 0
    pos[rows, anchor] = side > 0
    return _signed_sum_sign(T, pos), pos, T


def _zeros_of_f(lam, ell):
    """Zeros of f = sum w_k/(z - l_k), one per gap, as (anchor, side, log offset)."""
    n = lam.size
    gaps = np.diff(lam)
    idx = np.arange(n - 1)
    half = np.log(gaps / 2.0)

    # sign at the gap midpoints decides which pole each zero hugs
    s_mid, _, _ = _sign_f(lam, ell, idx, np.ones(n - 1), half)
    right = s_mid > 0
    anchor = np.where(right, idx + 1, idx)
    side = np.where(right, -1.0, 1.0)

    # below this offset the anchor term dominates the rest of f
    left_room = np.concatenate(([np.inf], gaps))[anchor]
    right_room = np.concatenate((gaps, [np.inf]))[anchor]
    other = np.where(right, left_room, right_room)
    dmin = np.minimum(gaps / 2.0, other)
    others = np.array([_lse(np.delete(ell, k)) for k in anchor])
    lo = np.minimum(ell[anchor] + np.log(dmin) - others - np.log(2.0), half - 1.0)
    hi = half.copy()

    s_lo, _, _ = _sign_f(lam, ell, anchor, side, lo)
    target = side  # sign of f right next to the anchor pole
    if np.any(s_lo != target):
        k = int(np.flatnonzero(s_lo != target)[0])
        raise BracketFailure((float(lam[k]), float(lam[k + 1])), "zero of f not bracketed")

    # Newton on s = log(delta), falling back to bisection whenever the step
    # leaves the bracket; the bracket shrinks on every evaluation either way.
    x = 0.5 * (lo + hi)
    done = np.zeros(anchor.size, dtype=bool)
    for _ in range(_MAXITER):
        s, pos, T = _sign_f(lam, ell, anchor, side, x)
        near = s == target  # still on the pole's side of the zero
        lo = np.where(~done & near, x, lo)
        hi = np.where(~done & ~near & (s != 0), x, hi)
        done |= s == 0
        # f = sum +-e^T and df/ds = -side * sum e^(2T - ell + s), scaled by e^-m
        m = np.max(T, axis=1, keepdims=True)
        e = np.exp(T - m)
        fval = np.sum(np.where(pos, e, -e), axis=1)
        dval = np.exp(_lse(2.0 * T - ell[None, :] - m) + x)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            cand = x + side * fval / dval
        inside = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        tol = _LOG_RTOL * np.maximum(1.0, np.abs(x)) + 4.0 * np.spacing(np.abs(x))
        done |= (inside & (np.abs(cand - x) <= tol)) | (hi - lo <= tol)
        nxt = np.where(inside, cand, 0.5 * (lo + hi))
        x = np.where(done, x, nxt)
        if done.all():
            break
    # an exact zero at a gap midpoint was already found by the first probe
    log_delta = np.where(s_mid == 0, half, x)
    return anchor, side, log_delta


def peel_log(lam, ell):
    """One T-fraction step on (poles, log residues).

    Returns ``(a, log_b, poles_g, log_res_g, raw_sum)`` where ``raw_sum`` is
    the residue sum of g before renormalization (1 in exact arithmetic).
    """
    lam = np.asarray(lam, dtype=float)
    ell = np.asarray(ell, dtype=float)
    log_a, log_b = _log_a_b(lam, ell)
    anchor, side, log_delta = _zeros_of_f(lam, ell)
    zeros = lam[anchor] + side * np.exp(log_delta)
    if np.any(np.diff(zeros) <= 0) or zeros[0] <= 0:
        j = int(np.flatnonzero(np.diff(zeros) <= 0)[0]) + 1 if np.any(np.diff(zeros) <= 0) else 1
        raise DegenerateWeight(j, detail="two remainder poles collapsed onto one double")
    # g's residues: w*_i = -1 / (b z_i f'(z_i)), with -f' = sum_k w_k / (z_i - l_k)^2
    _, _, T = _sign_f(lam, ell, anchor, side, log_delta)
    log_fprime = _lse(2.0 * T - ell[None, :])  # terms ell_k - 2 log|d_k|
    log_res = -log_b - np.log(zeros) - log_fprime
    total = _lse(log_res)
    return float(np.exp(log_a)), float(log_b), zeros, log_res - total, float(np.exp(total))


def peel_all_log(lam, log_w) -> tuple[np.ndarray, np.ndarray]:
    """Full reconstruction from log weights: returns ``(a, log_b)``. No weight floor."""
    lam = np.asarray(lam, dtype=float)
    ell = np.asarray(log_w, dtype=float) - _lse(np.asarray(log_w, dtype=float))
    N = lam.size
    a = np.empty(N)
    log_b = np.empty(N - 1)
    for n in range(N - 1):
        a[n], log_b[n], lam, ell, _ = peel_log(lam, ell)
    a[N - 1] = lam[0]
    return a, log_b


def tfraction_peel_step(f: WeylFunction) -> tuple[float, float, WeylFunction]:
    """Split f = 1 / (z - a - b z g(z)) with a, b > 0 and g one pole shorter."""
    if f.n < 2:
        raise ValueError("a peel step needs at least two poles")
    a, log_b, poles, log_res, _ = peel_log(f.poles, np.log(f.residues))
    b = float(np.exp(log_b))
    if not (a > 0 and b > 0):
        raise NonPositiveCoefficient(f"peel produced a={a!r}, b={b!r}")
    res = np.exp(log_res)
    if np.any(res == 0):
        raise DegenerateWeight(int(np.flatnonzero(res == 0)[0]) + 1, detail="remainder residue underflowed")
    return a, b, WeylFunction(poles, res)


def _check_floor(s: SpectralData):
    tiny = np.flatnonzero(s.w < WEIGHT_FLOOR)
    if tiny.size:
        raise DegenerateWeight(int(tiny[0]) + 1, detail=f"below {WEIGHT_FLOOR:g}; use the log-space path")


def inverse_transform(s: SpectralData) -> BidiagonalPencil:
    """Matrix data whose T-fraction expansion reproduces the Weyl function of ``s``."""
    _check_floor(s)
    a, log_b = peel_all_log(s.lam, s.log_w)
    b = np.exp(log_b)
    if np.any(b <= 0):
        raise NonPositiveCoefficient("a reconstructed b underflowed")
    return BidiagonalPencil(a, b)


def inverse_transform_stieltjes(s: SpectralData) -> BidiagonalPencil:
    """Oracle inverse from Laurent orthogonality.

    With <f, g>_k = sum_j f(l_j) g(l_j) w_j / l_j^k the coefficients are
    a_n = <P_{n-1},P_{n-1}>_{n-1} / <P_{n-1},P_{n-1}>_n and
    b_n = <P_n,P_n>_n / <P_{n-1},P_{n-1}>_{n-1}.
    """
    _check_floor(s)
    # The recursion on the nodes is ill-conditioned when some weights are
    # tiny, so it runs in extended precision (80-bit on x86).
    ext = np.longdouble
    lam, w = s.lam.astype(ext), s.w.astype(ext)
    N = lam.size
    a = np.empty(N, dtype=ext)
    b = np.empty(N - 1, dtype=ext)
    p_prev, p_cur = np.zeros(N, dtype=ext), np.ones(N, dtype=ext)
    weight = w.copy()  # w / lam^(n-1)
    norm_prev = None
    for n in range(1, N + 1):
        sq = p_cur * p_cur * weight
        num = np.sum(sq)
        den = np.sum(sq / lam)
        if not (num > 0 and den > 0 and np.isfinite(num) and np.isfinite(den)):
            raise ZeroNorm(n)
        a[n - 1] = num / den
        if n >= 2:
            b[n - 2] = num / norm_prev
        if n == N:
            break
        bn = b[n - 2] if n >= 2 else 0.0
        p_prev, p_cur = p_cur, (lam - a[n - 1]) * p_cur - bn * lam * p_prev
        norm_prev = num
        weight = weight / lam
    a, b = a.astype(float), b.astype(float)
    return BidiagonalPencil(a, b)
