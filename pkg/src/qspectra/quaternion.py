"""Quaternions as 2x2 complex blocks.

A quaternion ``a e + b i + c j + d k`` is stored through its complex block

    [[ a+bi,  c+di],
     [-c+di,  a-bi]]

so that products, conjugates and norms of quaternion matrices reduce to the
corresponding complex-matrix operations on the 2p x 2n embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Quaternion:
    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"quaternion coefficient {name}={value} is not finite")
            object.__setattr__(self, name, value)

    @classmethod
    def from_block(cls, block) -> "Quaternion":
        block = np.asarray(block)
        lam, omega = block[0, 0], block[0, 1]
        return cls(lam.real, lam.imag, omega.real, omega.imag)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    @property
    def norm2(self) -> float:
        return self.a**2 + self.b**2 + self.c**2 + self.d**2

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm2))

    def conj(self) -> "Quaternion":
        return quaternion_conj(self)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __mul__(self, other):
        # Product taken in the block representation so that embed() is a
        # homomorphism by construction.
        if isinstance(other, Quaternion):
            return Quaternion.from_block(embed(self) @ embed(other))
        return Quaternion(self.a * other, self.b * other, self.c * other, self.d * other)

    __rmul__ = __mul__

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.a, -self.b, -self.c, -self.d)


ZERO = Quaternion(0.0)
E = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def embed(q: Quaternion) -> np.ndarray:
    """Return the 2x2 complex block of ``q``."""
    lam = complex(q.a, q.b)
    omega = complex(q.c, q.d)
    return np.array([[lam, omega], [-omega.conjugate(), lam.conjugate()]])


def quaternion_conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.a, -q.b, -q.c, -q.d)


class QuaternionMatrix:
    """A dense p x n quaternion matrix.

    Coefficients live in a read-only ``(p, n, 4)`` float array ordered
    ``(a, b, c, d)``.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[2] != 4:
            raise ValueError(f"expected coefficient array of shape (p, n, 4), got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("quaternion matrix has non-finite coefficients")
        coeffs.setflags(write=False)
        self._coeffs = coeffs

    @classmethod
    def from_entries(cls, rows) -> "QuaternionMatrix":
        return cls([[q.coeffs for q in row] for row in rows])

    @classmethod
    def from_embedding(cls, M) -> "QuaternionMatrix":
        """Inverse of :func:`embed_matrix`; reads the first row of every block."""
        M = np.asarray(M)
        lam = M[0::2, 0::2]
        omega = M[0::2, 1::2]
        return cls(np.stack([lam.real, lam.imag, omega.real, omega.imag], axis=-1))

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def shape(self) -> tuple[int, int]:
        return self._coeffs.shape[:2]

    @property
    def p(self) -> int:
        return self._coeffs.shape[0]

    @property
    def n(self) -> int:
        return self._coeffs.shape[1]

    @property
    def lam(self) -> np.ndarray:
        return self._coeffs[..., 0] + 1j * self._coeffs[..., 1]

    @property
    def omega(self) -> np.ndarray:
        return self._coeffs[..., 2] + 1j * self._coeffs[..., 3]

    def norms(self) -> np.ndarray:
        """Entrywise quaternion norms, shape (p, n)."""
        return np.sqrt(np.sum(self._coeffs**2, axis=-1))

    def __getitem__(self, idx) -> Quaternion:
        j, k = idx
        return Quaternion(*self._coeffs[j, k])

    def conj_transpose(self) -> "QuaternionMatrix":
        c = self._coeffs.transpose(1, 0, 2) * np.array([1.0, -1.0, -1.0, -1.0])
        return QuaternionMatrix(c)

    def __matmul__(self, other: "QuaternionMatrix") -> "QuaternionMatrix":
        if self.n != other.p:
            raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
        return QuaternionMatrix.from_embedding(embed_matrix(self) @ embed_matrix(other))

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuaternionMatrix):
            return NotImplemented
        return np.array_equal(self._coeffs, other._coeffs)

    def __repr__(self) -> str:
        return f"QuaternionMatrix(p={self.p}, n={self.n})"


def embed_matrix(M: QuaternionMatrix) -> np.ndarray:
    """The 2p x 2n complex representation whose (j, k) block is embed(M[j, k])."""
    p, n = M.shape
    lam, omega = M.lam, M.omega
    out = np.empty((2 * p, 2 * n), dtype=complex)
    out[0::2, 0::2] = lam
    out[0::2, 1::2] = omega
    out[1::2, 0::2] = -omega.conj()
    out[1::2, 1::2] = lam.conj()
    return out


@dataclass(frozen=True)
class StructureReport:
    is_type1: bool
    is_type3: bool
    max_violation: float
    type1_violation: float
    type3_violation: float
    tol: float


def _blocks(C: np.ndarray) -> np.ndarray:
    m = C.shape[0] // 2
    return C.reshape(m, 2, m, 2).transpose(0, 2, 1, 3)


def classify_structure(C, tol: float | None = None) -> StructureReport:
    """Test a 2n x 2n complex matrix for the Type-I and Type-III block patterns.

    Both patterns need scalar diagonal blocks ``t_k I``. For the off-diagonal
    block ``[[a, b], [c, d]]`` at (j, k), Type-I asks for ``[[d, -b], [-c, a]]``
    at (k, j); Type-III asks the (j, k) block to be quaternion-shaped
    ``[[a, b], [-conj(b), conj(a)]]`` with ``[[conj(a), -b], [conj(b), a]]`` at
    (k, j). Violations are absolute entry deviations.
    """
    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {C.shape}")
    if C.shape[0] % 2:
        raise ValueError(f"dimension {C.shape[0]} is odd")
    if tol is None:
        tol = 1e-10 * (1.0 + (np.max(np.abs(C)) if C.size else 0.0))

    Bk = _blocks(C)
    m = Bk.shape[0]
    a, b, c, d = Bk[..., 0, 0], Bk[..., 0, 1], Bk[..., 1, 0], Bk[..., 1, 1]
    # transposed-position blocks
    aT, bT, cT, dT = a.T, b.T, c.T, d.T

    diag = np.eye(m, dtype=bool)
    off = ~diag
    diag_dev = 0.0
    if m:
        diag_dev = max(
            np.max(np.abs(b[diag])),
            np.max(np.abs(c[diag])),
            np.max(np.abs(a[diag] - d[diag])),
        )

    t1 = diag_dev
    t3 = diag_dev
    if m > 1:
        # mirror condition checked from both sides covers every pair
        t1 = max(
            t1,
            np.max(np.abs((aT - d)[off])),
            np.max(np.abs((bT + b)[off])),
            np.max(np.abs((cT + c)[off])),
            np.max(np.abs((dT - a)[off])),
        )
        upper = np.triu(np.ones((m, m), dtype=bool), 1)
        t3 = max(
            t3,
            np.max(np.abs((c + b.conj())[upper])),
            np.max(np.abs((d - a.conj())[upper])),
            np.max(np.abs((aT - a.conj())[upper])),
            np.max(np.abs((bT + b)[upper])),
            np.max(np.abs((cT - b.conj())[upper])),
            np.max(np.abs((dT - a)[upper])),
        )
    t1, t3 = float(t1), float(t3)
    return StructureReport(
        is_type1=t1 <= tol,
        is_type3=t3 <= tol,
        max_violation=max(t1, t3),
        type1_violation=t1,
        type3_violation=t3,
        tol=float(tol),
    )
