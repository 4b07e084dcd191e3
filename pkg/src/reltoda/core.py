"""Domain types and dense assembly of the bidiagonal pencil (L, M)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import (
    InvalidSpectralData,
    NonPositiveEntry,
    ShapeMismatch,
    ValidationError,
)

# |sum(w) - 1| above this is a real error, below it is rounding to absorb.
RENORMALIZE_TOL = 1e-9


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BidiagonalPencil:
    """Matrix data of the pencil: diagonal ``a`` of L and subdiagonal ``b`` of M.

    The boundary conventions b_0 = b_N = 0 are implicit and never stored.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen(self.a))
        object.__setattr__(self, "b", _frozen(self.b))
        validate_pencil(self)

    @property
    def N(self) -> int:
        return self.a.size

    def __eq__(self, other):
        if not isinstance(other, BidiagonalPencil):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((self.a.tobytes(), self.b.tobytes()))

    def __repr__(self):
        return f"BidiagonalPencil(a={self.a.tolist()}, b={self.b.tolist()})"

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist()}


def validate_pencil(p: BidiagonalPencil) -> None:
    """Raise :class:`NonPositiveEntry` (1-based index) unless every entry is positive."""
    if p.a.size < 1:
        raise ShapeMismatch("a pencil needs at least one diagonal entry")
    if p.b.size != p.a.size - 1:
        raise ShapeMismatch(f"expected {p.a.size - 1} b entries, got {p.b.size}")
    for which, vec in (("a", p.a), ("b", p.b)):
        bad = np.flatnonzero(~(np.isfinite(vec) & (vec > 0)))
        if bad.size:
            raise NonPositiveEntry(int(bad[0]) + 1, which)


def _normalized_log_weights(log_w: np.ndarray) -> np.ndarray:
    return log_w - logsumexp(log_w)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Generalized eigenvalues ``lam`` and weights ``w`` of a pencil.

    ``log_w`` carries the same weights in log form. It stays exact when the
    ordinary weights underflow, which happens along long-time flows.
    """

    lam: np.ndarray
    w: np.ndarray
    log_w: np.ndarray = field(default=None)

    def __post_init__(self):
        lam = _frozen(self.lam)
        if lam.size < 1:
            raise InvalidSpectralData("spectral data must be non-empty")
        if not np.all(np.isfinite(lam)) or lam[0] <= 0:
            raise InvalidSpectralData("eigenvalues must be positive and finite")
        if np.any(np.diff(lam) <= 0):
            raise InvalidSpectralData("eigenvalues must be strictly increasing")

        if self.log_w is not None:
            log_w = np.asarray(self.log_w, dtype=float).reshape(-1)
            if log_w.shape != lam.shape or not np.all(np.isfinite(log_w)):
                raise InvalidSpectralData("log weights must be finite, one per eigenvalue")
            log_w = _normalized_log_weights(log_w)
            w = np.exp(log_w)
        else:
            w = np.asarray(self.w, dtype=float).reshape(-1)
            if w.shape != lam.shape:
                raise ShapeMismatch("need exactly one weight per eigenvalue")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                j = int(np.flatnonzero(~(np.isfinite(w) & (w > 0)))[0]) + 1
                raise InvalidSpectralData(f"weight {j} must be positive")
            total = math.fsum(w)
            if abs(total - 1.0) > RENORMALIZE_TOL:
                raise InvalidSpectralData(f"weights sum to {total!r}, not 1")
            w = w / total
            log_w = np.log(w)

        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "w", _frozen(w))
        object.__setattr__(self, "log_w", _frozen(log_w))

    @classmethod
    def from_log_weights(cls, lam, log_w) -> "SpectralData":
        """Build from unnormalized log weights; normalization is exact in log space."""
        return cls(lam, None, log_w)

    @property
    def N(self) -> int:
        return self.lam.size

    def weyl(self) -> "WeylFunction":
        return WeylFunction(self.lam, self.w)

    def to_dict(self) -> dict:
        return {"lambda": self.lam.tolist(), "w": self.w.tolist()}

    def __repr__(self):
        return f"SpectralData(lam={self.lam.tolist()}, w={self.w.tolist()})"


@dataclass(frozen=True, eq=False)
class WeylFunction:
    """Rational function sum_j residues[j] / (z - poles[j]) in the class W_n."""

    poles: np.ndarray
    residues: np.ndarray

    def __post_init__(self):
        poles = _frozen(self.poles)
        res = np.asarray(self.residues, dtype=float).reshape(-1)
        if poles.size < 1 or res.shape != poles.shape:
            raise ShapeMismatch("poles and residues must be non-empty and equally long")
        if poles[0] <= 0 or np.any(np.diff(poles) <= 0) or not np.all(np.isfinite(poles)):
            raise ValidationError("poles must be positive and strictly increasing")
        if not np.all(np.isfinite(res)) or np.any(res <= 0):
            raise ValidationError("residues must be positive")
        total = math.fsum(res)
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise ValidationError(f"residues sum to {total!r}, not 1")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", _frozen(res / total))

    @property
    def n(self) -> int:
        return self.poles.size

    def __call__(self, z):
        from .direct import weyl_eval

        return weyl_eval(self, z)


_FLOW_KINDS = ("reciprocal", "identity", "power", "log")


@dataclass(frozen=True)
class FlowSpec:
    """The function F driving the generalized flow, from a small monotone family."""

    kind: str
    exponent: float | None = None

    def __post_init__(self):
        if self.kind not in _FLOW_KINDS:
            raise ValidationError(f"unknown flow kind {self.kind!r}; choose from {_FLOW_KINDS}")
        if self.kind == "power":
            if self.exponent is None or not math.isfinite(self.exponent) or self.exponent == 0:
                raise ValidationError("power flow needs a finite nonzero exponent")
            object.__setattr__(self, "exponent", float(self.exponent))
        elif self.exponent is not None:
            raise ValidationError(f"{self.kind} flow takes no exponent")

    @classmethod
    def parse(cls, text: str) -> "FlowSpec":
        """Parse ``reciprocal``, ``identity``, ``log`` or ``power:<p>``."""
        text = text.strip()
        if text.startswith("power:"):
            try:
                p = float(text.split(":", 1)[1])
            except ValueError:
                raise ValidationError(f"bad power exponent in {text!r}") from None
            return cls("power", p)
        return cls(text)

    def __str__(self):
        return f"power:{self.exponent:g}" if self.kind == "power" else self.kind

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "reciprocal":
            return 1.0 / x
        if self.kind == "identity":
            return x.copy()
        if self.kind == "log":
            return np.log(x)
        return x**self.exponent

    @property
    def direction(self) -> int:
        """+1 if F is strictly increasing on the positive axis, -1 if decreasing."""
        if self.kind == "reciprocal":
            return -1
        if self.kind == "power":
            return 1 if self.exponent > 0 else -1
        return 1


@dataclass(frozen=True, eq=False)
class NewtonianState:
    q: np.ndarray
    p: np.ndarray
    epsilon: float

    def __post_init__(self):
        q, p = _frozen(self.q), _frozen(self.p)
        if q.size < 1 or q.shape != p.shape:
            raise ShapeMismatch("q and p must be non-empty and equally long")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValidationError("positions and momenta must be finite")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValidationError("epsilon must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "epsilon", float(self.epsilon))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Matrix data sampled on a time grid.

    ``a`` has shape (T, N) and ``b`` shape (T, N-1). ``log_b`` is kept
    alongside ``b`` because b_n decays exponentially and underflows long
    before the spectral reconstruction loses accuracy.
    """

    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    log_b: np.ndarray | None = None
    spectral: tuple | None = None

    def __post_init__(self):
        times = _frozen(self.times)
        a = np.array(self.a, dtype=float, ndmin=2)
        b = np.array(self.b, dtype=float).reshape(a.shape[0], a.shape[1] - 1)
        if a.shape[0] != times.size:
            raise ShapeMismatch("one sample per time required")
        log_b = np.log(b) if self.log_b is None else np.array(self.log_b, dtype=float).reshape(b.shape)
        for arr in (a, b, log_b):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "log_b", log_b)
        if self.spectral is not None:
            if len(self.spectral) != times.size:
                raise ShapeMismatch("one spectral sample per time required")
            object.__setattr__(self, "spectral", tuple(self.spectral))

    @property
    def N(self) -> int:
        return self.a.shape[1]

    def __len__(self):
        return self.times.size

    def sample(self, i: int) -> BidiagonalPencil:
        """The pencil at ``times[i]``; raises if some b_n underflowed to zero."""
        return BidiagonalPencil(self.a[i], self.b[i])

    @property
    def samples(self) -> list[BidiagonalPencil]:
        return [self.sample(i) for i in range(len(self))]

    def stacked(self) -> np.ndarray:
        """Rows (a_1..a_N, b_1..b_{N-1}) per time."""
        return np.hstack([self.a, self.b])


def assemble_dense(p: BidiagonalPencil) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense L, M and the explicit lower-triangular inverse of M.

    ``Minv[i, j] = b_j * ... * b_{i-1}`` (1-based) below the diagonal.
    """
    N = p.N
    L = np.diag(p.a) + np.diag(np.ones(N - 1), 1)
    M = np.eye(N) - np.diag(p.b, -1)
    Minv = np.eye(N)
    # Minv[i, j] = b_j * Minv[i, j+1], so Minv @ M cancels exactly
    for i in range(1, N):
        for j in range(i - 1, -1, -1):
            Minv[i, j] = p.b[j] * Minv[i, j + 1]
    return L, M, Minv
