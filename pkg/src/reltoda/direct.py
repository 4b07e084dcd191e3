"""Direct spectral transform: pencil -> (eigenvalues, weights)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RENORMALIZE_TOL, BidiagonalPencil, SpectralData, WeylFunction
from .errors import NonPositiveWeight, NormalizationFailure, NumericalError, PoleEvaluation
from .poly import _real, eval_Delta, pencil_zeros, twisted_pivots


@dataclass(frozen=True, eq=False)
class EigenvectorPair:
    """Right and left generalized eigenvectors, both with first component 1."""

    right: np.ndarray
    left: np.ndarray


def generalized_eigenvalues(p: BidiagonalPencil) -> np.ndarray:
    """Sorted zeros of P_N = det(zM - L), isolated level by level."""
    if p.N == 1:
        return np.array([p.a[0]])
    lam = pencil_zeros(p)[-1]
    if lam[0] <= 0 or np.any(np.diff(lam) <= 0):
        raise NumericalError("eigenvalue cascade lost strict ordering")
    return lam


def _renormalize(w: np.ndarray) -> np.ndarray:
    bad = np.flatnonzero(~(w > 0))
    if bad.size:
        raise NonPositiveWeight(int(bad[0]) + 1)
    total = math.fsum(w)
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise NormalizationFailure(f"weights sum to {total!r}; eigenvalues are inaccurate")
    return w / total


def _twist(p: BidiagonalPencil, lam):
    gam, gder, rho, t = twisted_pivots(p, lam)
    # the smallest pivot marks where the eigenvector is largest
    r = np.argmin(np.abs(gam), axis=0)
    return r, gder[r, np.arange(lam.size)], rho, t


def log_weights_from_residues(p: BidiagonalPencil, lam) -> np.ndarray:
    """Unnormalized log weights from the twisted residue formula.

    The (r, r) resolvent entry 1/gamma_r has residue w_j v_r u_r at l_j, so

        w_j = l_j^(r-1) b_1...b_{r-1} / (gamma_r'(l_j) P_{r-1}(l_j)^2).

    With r = 1 this is Delta_{N-1}(l_j) / Delta_N'(l_j). Taking r where the
    eigenvector peaks keeps every factor free of cancellation, which matters
    for eigenvectors localized far from the first row.
    """
    lam = _real(lam)
    if p.N == 1:
        return np.zeros(1, dtype=lam.dtype)
    r, gder, rho, _ = _twist(p, lam)
    j = np.arange(lam.size)
    log_P = np.vstack([np.zeros((1, lam.size)), np.cumsum(np.log(np.abs(rho)), axis=0)])
    log_bprod = np.concatenate(([0.0], np.cumsum(np.log(p.b))))
    return r * np.log(lam) + log_bprod[r] - np.log(gder) - 2.0 * log_P[r, j]


def weights_from_residues(p: BidiagonalPencil, lam) -> np.ndarray:
    """Residues of the Weyl function ((zM - L)^{-1})_{11} at its poles."""
    return _renormalize(np.exp(log_weights_from_residues(p, lam)))


def eigenvector_matrices(p: BidiagonalPencil, lam) -> tuple[np.ndarray, np.ndarray]:
    """Matrices (U, V) whose j-th columns are the left/right eigenvectors for lam[j].

    v_j = (P_0, P_1, ..., P_{N-1})(l_j) and u_j has components
    P_k(l_j) / (l_j^k b_1 ... b_k). Components above the peak come from the
    forward ratios P_k / P_{k-1}, those below it from the backward ratios,
    so decaying tails are accurate componentwise.
    """
    lam = _real(lam)
    N = p.N
    V = np.ones((N, lam.size), dtype=lam.dtype)
    scale = np.ones_like(V)
    for k in range(1, N):
        scale[k] = scale[k - 1] * lam * p.b[k - 1]
    if N == 1:
        return V, V.copy()
    r, _, rho, t = _twist(p, lam)
    for k in range(1, N):
        up = k <= r
        V[k] = np.where(up, rho[k - 1] * V[k - 1], lam * p.b[k - 1] * V[k - 1] / t[k])
    return V / scale, V


def eigenvectors(p: BidiagonalPencil, lam) -> list[EigenvectorPair]:
    U, V = eigenvector_matrices(p, lam)
    return [EigenvectorPair(V[:, j].copy(), U[:, j].copy()) for j in range(V.shape[1])]


def _m_times(p: BidiagonalPencil, X: np.ndarray) -> np.ndarray:
    out = X.copy()
    out[1:] -= p.b[:, None] * X[:-1]
    return out


def weights_from_eigenvectors(p: BidiagonalPencil, lam) -> np.ndarray:
    """w_j = 1 / (u_j^T M v_j); the cross-check path for :func:`weights_from_residues`."""
    U, V = eigenvector_matrices(p, lam)
    return _renormalize(1.0 / np.sum(U * _m_times(p, V), axis=0))


def refine_eigenvalues(p: BidiagonalPencil, lam, dtype=np.longdouble, steps: int = 3) -> np.ndarray:
    """Newton steps on the smallest twisted pivot gamma_r, carried out in ``dtype``.

    Near l_j, 1/gamma_r is dominated by one pole, so gamma_r is close to linear
    and each step roughly squares the error.
    """
    lam = np.asarray(lam).astype(dtype)
    if p.N == 1:
        return lam
    j = np.arange(lam.size)
    for _ in range(steps):
        gam, gder, _, _ = twisted_pivots(p, lam)
        r = np.argmin(np.abs(gam), axis=0)
        lam = lam - gam[r, j] / gder[r, j]
    return lam


def laurent_gram(p: BidiagonalPencil, extended: bool = True) -> np.ndarray:
    """G[m, n] = sum_j P_m(l_j) P_n(l_j) w_j / l_j^n / (b_1 ... b_n) for m <= n.

    Orthogonality says G is the identity on and above the diagonal. The sum
    cancels heavily when some eigenvector is strongly localized, enough that
    rounding of the eigenvalues alone can move it by 1e-9, so by default the
    spectral data are refined and the sum formed in extended precision.
    """
    lam = generalized_eigenvalues(p)
    if extended:
        lam = refine_eigenvalues(p, lam)
    log_w = log_weights_from_residues(p, lam)
    w = np.exp(log_w - np.max(log_w))
    w = w / np.sum(w)
    _, V = eigenvector_matrices(p, lam)
    N = p.N
    G = np.zeros((N, N))
    bprod = np.concatenate(([1.0], np.cumprod(p.b))).astype(lam.dtype)
    for n in range(N):
        terms = V[: n + 1] * V[n] * (w / lam**n)
        G[: n + 1, n] = (np.sum(terms, axis=1) / bprod[n]).astype(float)
    return G


def direct_transform(p: BidiagonalPencil, method: str = "residues") -> SpectralData:
    lam = generalized_eigenvalues(p)
    if method == "residues":
        w = weights_from_residues(p, lam)
    elif method == "eigenvectors":
        w = weights_from_eigenvectors(p, lam)
    else:
        raise ValueError(f"unknown weight method {method!r}")
    return SpectralData(lam, w)


def weyl_eval(s: SpectralData | WeylFunction, z, derivative: bool = False):
    """f(z) = sum_j w_j / (z - l_j), optionally with f'(z) = -sum_j w_j / (z - l_j)^2."""
    if isinstance(s, SpectralData):
        poles, res = s.lam, s.w
    else:
        poles, res = s.poles, s.residues
    z = np.asarray(z, dtype=float)
    diff = z[..., None] - poles
    hit = np.argwhere(diff == 0)
    if hit.size:
        raise PoleEvaluation(int(hit[0][-1]) + 1)
    val = np.sum(res / diff, axis=-1)
    if not derivative:
        return val[()]
    return val[()], (-np.sum(res / diff**2, axis=-1))[()]


def resolvent_corner(p: BidiagonalPencil, z):
    """((zM - L)^{-1})_{11} = Delta_{N-1}(z) / Delta_N(z), straight from matrix data."""
    vals = eval_Delta(p, z)
    return vals[p.N - 1] / vals[p.N]
