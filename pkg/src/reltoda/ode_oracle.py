"""Direct time integration of the lattice equations, as an independent check.

Two closed-form vector fields (F(x) = 1/x and F(x) = x) and a general one
built from matrix functions of the pencil, all driven by fixed-step RK4.
"""

from __future__ import annotations

import math

import numpy as np

from .core import BidiagonalPencil, FlowSpec, Trajectory, assemble_dense
from .direct import eigenvector_matrices, generalized_eigenvalues, log_weights_from_residues
from .errors import PositivityLoss, SingularEigenvectorMatrix, ValidationError


def _rhs_reciprocal(a, b):
    # b_0 = b_N = 0 and the matching a_0, a_{N+1} terms drop out
    da = np.zeros_like(a)
    da[:-1] += b / a[1:]
    da[1:] -= b / a[:-1]
    db = b * (1.0 / a[:-1] - 1.0 / a[1:])
    return da, db


def _rhs_identity(a, b):
    bb = np.concatenate(([0.0], b, [0.0]))
    da = a * (bb[:-1] - bb[1:])
    db = b * (a[:-1] - a[1:] + bb[:-2] - bb[2:])
    return da, db


def rhs_reciprocal(p: BidiagonalPencil):
    """a_n' = b_n/a_{n+1} - b_{n-1}/a_{n-1},  b_n' = b_n (1/a_n - 1/a_{n+1})."""
    return _rhs_reciprocal(p.a, p.b)


def rhs_identity(p: BidiagonalPencil):
    """a_n' = a_n (b_{n-1} - b_n),  b_n' = b_n (a_n - a_{n+1} + b_{n-1} - b_{n+1})."""
    return _rhs_identity(p.a, p.b)


def lu_factor(A):
    """Doolittle LU with partial pivoting. Returns (LU, perm) with A[perm] = L U."""
    LU = np.array(A, dtype=float)
    n = LU.shape[0]
    perm = np.arange(n)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(LU[k:, k])))
        if LU[piv, k] == 0 or not np.isfinite(LU[piv, k]):
            raise SingularEigenvectorMatrix(f"zero pivot in column {k + 1}")
        if piv != k:
            LU[[k, piv]] = LU[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
        LU[k + 1 :, k] /= LU[k, k]
        LU[k + 1 :, k + 1 :] -= np.outer(LU[k + 1 :, k], LU[k, k + 1 :])
    return LU, perm


def lu_solve(factored, B):
    LU, perm = factored
    X = np.array(B, dtype=float)[perm]
    n = LU.shape[0]
    for k in range(n):
        X[k + 1 :] -= np.outer(LU[k + 1 :, k], X[k])
    for k in range(n - 1, -1, -1):
        X[k] /= LU[k, k]
        X[:k] -= np.outer(LU[:k, k], X[k])
    if not np.all(np.isfinite(X)):
        raise SingularEigenvectorMatrix("solve produced non-finite values")
    return X


def _equilibrate(X, sweeps=3):
    """Row and column scalings r, c with diag(1/r) X diag(1/c) of unit max-norm rows and columns."""
    r = np.ones(X.shape[0])
    c = np.ones(X.shape[1])
    Y = np.abs(X)
    for _ in range(sweeps):
        rs = np.max(Y, axis=1)
        r *= rs
        Y = Y / rs[:, None]
        cs = np.max(Y, axis=0)
        c *= cs
        Y = Y / cs[None, :]
    return r, c


def _similarity(X, f):
    """X diag(f) X^{-1}, solved on the equilibrated matrix.

    With X = D_r Y D_c the column scaling cancels and the row scaling
    commutes out, X diag(f) X^{-1} = D_r (Y diag(f) Y^{-1}) D_r^{-1}. Eigenvectors
    of a localized mode span many decades, so this removes most of the
    conditioning the bare solve would see.
    """
    r, c = _equilibrate(X)
    Y = X / r[:, None] / c[None, :]
    # Y diag(f) Y^{-1} = (Y^{-T} diag(f) Y^T)^T: one transposed solve
    Z = lu_solve(lu_factor(Y.T), f[:, None] * Y.T).T
    return r[:, None] * Z / r[None, :]


def matrix_functions(p: BidiagonalPencil, F: FlowSpec, method: str = "biorthogonal"):
    """F(M^{-1} L) = V diag(F) V^{-1} and F(L M^{-1}) = U^{-T} diag(F) U^T.

    The eigenvector matrices of random pencils are routinely conditioned
    beyond 1e15, which makes any solve with them useless. The default
    instead uses the biorthogonality V diag(w) U^T = M^{-1}, so that
    V^{-1} = diag(w) U^T M and U^{-T} = M V diag(w) exactly. ``method="solve"``
    keeps the equilibrated LU route for comparison.
    """
    lam = generalized_eigenvalues(p)
    U, V = eigenvector_matrices(p, lam)
    f = F(lam)
    if method == "solve":
        return _similarity(V, f), _similarity(U, f).T
    if method != "biorthogonal":
        raise ValidationError(f"unknown method {method!r}")
    w = np.exp(log_weights_from_residues(p, lam))
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise SingularEigenvectorMatrix("weights do not normalize the eigenvectors")
    _, M, _ = assemble_dense(p)
    Vfw = V * (f * w)
    return Vfw @ (U.T @ M), M @ Vfw @ U.T


def rhs_general(p: BidiagonalPencil, F: FlowSpec):
    """a_n' = F(LM^{-1})_{n,n-1} - F(M^{-1}L)_{n+1,n},  b_n' = F(M^{-1}L)_{n+1,n} - F(LM^{-1})_{n+1,n}."""
    N = p.N
    if N == 1:
        return np.zeros(1), np.zeros(0)
    FR, FL = matrix_functions(p, F)
    sub_R = np.diagonal(FR, -1)  # F(M^{-1}L)_{n+1,n}
    sub_L = np.diagonal(FL, -1)  # F(LM^{-1})_{n+1,n}
    da = np.concatenate(([0.0], sub_L)) - np.concatenate((sub_R, [0.0]))
    db = sub_R - sub_L
    return da, db


def _vector_field(F: FlowSpec):
    if F.kind == "reciprocal":
        return _rhs_reciprocal
    if F.kind == "identity":
        return _rhs_identity

    def field(a, b):
        return rhs_general(BidiagonalPencil(a, b), F)

    return field


def _rk4_step(field, a, b, h):
    k1a, k1b = field(a, b)
    k2a, k2b = field(a + 0.5 * h * k1a, b + 0.5 * h * k1b)
    k3a, k3b = field(a + 0.5 * h * k2a, b + 0.5 * h * k2b)
    k4a, k4b = field(a + h * k3a, b + h * k3b)
    return (
        a + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        b + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
    )


def _march(field, a, b, t0, t1, dt, record=None):
    """Fixed steps of size dt from t0 toward t1, the last one shortened to land on t1."""
    span = t1 - t0
    steps = max(1, math.ceil(abs(span) / dt - 1e-9)) if span != 0 else 0
    t = t0
    for i in range(steps):
        h = (span - i * dt * np.sign(span)) if i == steps - 1 else dt * np.sign(span)
        try:
            a, b = _rk4_step(field, a, b, h)
        except ValidationError as exc:
            # a stage left the positive cone
            raise PositivityLoss(t) from exc
        t = t0 + (i + 1) * dt * np.sign(span) if i < steps - 1 else t1
        if not (np.all(a > 0) and np.all(b > 0) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise PositivityLoss(t)
        if record is not None:
            record(t, a, b)
    return a, b


def integrate(p0: BidiagonalPencil, F: FlowSpec, t_final: float, dt: float) -> Trajectory:
    """RK4 from t = 0 to t_final (either sign), every step recorded."""
    if not dt > 0:
        raise ValidationError("dt must be positive")
    field = _vector_field(F)
    ts, As, Bs = [0.0], [p0.a.copy()], [p0.b.copy()]

    def record(t, a, b):
        ts.append(t)
        As.append(a)
        Bs.append(b)

    _march(field, p0.a.copy(), p0.b.copy(), 0.0, float(t_final), dt, record)
    return Trajectory(np.array(ts), np.array(As), np.array(Bs).reshape(len(ts), p0.N - 1))


def integrate_at(p0: BidiagonalPencil, F: FlowSpec, times, dt: float) -> Trajectory:
    """RK4 samples at arbitrary times, marching outward from t = 0 in both directions."""
    if not dt > 0:
        raise ValidationError("dt must be positive")
    times = np.asarray(times, dtype=float).reshape(-1)
    field = _vector_field(F)
    a_out = np.empty((times.size, p0.N))
    b_out = np.empty((times.size, p0.N - 1))
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(times * sign > 0)
        idx = idx[np.argsort(times[idx] * sign)]
        a, b, t = p0.a.copy(), p0.b.copy(), 0.0
        for i in idx:
            a, b = _march(field, a, b, t, times[i], dt)
            t = times[i]
            a_out[i], b_out[i] = a, b
    at_zero = np.flatnonzero(times == 0)
    a_out[at_zero], b_out[at_zero] = p0.a, p0.b
    return Trajectory(times, a_out, b_out)
