"""Hermitian eigenvalues, empirical spectral distributions and CDF distances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class NotHermitianError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.sort(np.asarray(self.eigenvalues, dtype=float))
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def pairing_deviation(self) -> float:
        """max_k |l_2k - l_2k-1| / (1 + |l_2k|) over consecutive pairs."""
        ev = self.eigenvalues
        if ev.size % 2:
            raise ValueError("pairing needs an even number of eigenvalues")
        lo, hi = ev[0::2], ev[1::2]
        return float(np.max(np.abs(hi - lo) / (1.0 + np.abs(hi)))) if ev.size else 0.0


# ---------------------------------------------------------------- eigensolver


def hermitian_deviation(H: np.ndarray) -> float:
    return float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0


def tridiagonalize(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction of a Hermitian matrix to real symmetric tridiagonal form.

    Returns the diagonal ``d`` and the sub-diagonal ``e`` (length m-1). The
    complex sub-diagonal produced by the reflections is made real by a
    diagonal unitary similarity, which replaces each entry by its modulus.
    """
    A = np.array(H, dtype=complex)
    m = A.shape[0]
    d = np.empty(m)
    e = np.zeros(max(m - 1, 0), dtype=complex)
    for k in range(m - 2):
        x = A[k + 1 :, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            e[k] = 0.0
            d[k] = A[k, k].real
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        alpha = -phase * xnorm
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        A22 = A[k + 1 :, k + 1 :]
        p = A22 @ v
        c = np.vdot(v, p).real
        q = 2.0 * p - 2.0 * c * v
        U = np.stack((v, q), axis=1)
        A22 -= U @ U[:, ::-1].conj().T
        d[k] = A[k, k].real
        e[k] = alpha
    if m >= 2:
        d[m - 2] = A[m - 2, m - 2].real
        e[m - 2] = A[m - 1, m - 2]
    if m >= 1:
        d[m - 1] = A[m - 1, m - 1].real
    return d, np.abs(e)


def tridiagonal_ql(d, e, max_iter: int | None = None) -> np.ndarray:
    """Eigenvalues of a real symmetric tridiagonal matrix by implicit-shift QL.

    ``d`` is the diagonal and ``e`` the sub-diagonal. Raises
    :class:`ConvergenceError` if the total sweep count exceeds ``max_iter``
    (default 30 times the dimension).
    """
    d = [float(x) for x in d]
    n = len(d)
    e = [float(x) for x in e] + [0.0]
    if max_iter is None:
        max_iter = 30 * max(n, 1)
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 1e-300 or abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > max_iter:
                raise ConvergenceError(f"QL iteration did not converge within {max_iter} sweeps (n={n})")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(np.array(d))


def eigenvalues_hermitian(H, tol: float = 1e-10) -> Spectrum:
    """All eigenvalues of a complex Hermitian matrix, ascending.

    The input must be Hermitian within ``tol * (1 + max|H|)``.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if H.shape[0] == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    scale = 1.0 + float(np.max(np.abs(H)))
    dev = hermitian_deviation(H)
    if dev > tol * scale:
        raise NotHermitianError(f"matrix deviates from Hermitian by {dev:.3e} (tolerance {tol * scale:.3e})")
    H = 0.5 * (H + H.conj().T)
    d, e = tridiagonalize(H)
    return Spectrum(tridiagonal_ql(d, e))


def eigenpair_residual(H, lam: float, iters: int = 3, seed: int = 0) -> float:
    """||Hv - lam v|| for a unit v obtained by inverse iteration at ``lam``."""
    H = np.asarray(H, dtype=complex)
    m = H.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.normal(size=m) + 1j * rng.normal(size=m)
    v /= np.linalg.norm(v)
    shift = lam + 1e-12 * (1.0 + abs(lam))
    M = H - shift * np.eye(m)
    for _ in range(iters):
        try:
            w = np.linalg.solve(M, v)
        except np.linalg.LinAlgError:
            shift += 1e-10 * (1.0 + abs(lam))
            M = H - shift * np.eye(m)
            continue
        v = w / np.linalg.norm(w)
    return float(np.linalg.norm(H @ v - lam * v))


# ------------------------------------------------------------------ step CDFs


@dataclass(frozen=True)
class StepCDF:
    """Right-continuous step function with jumps at ``jump_points``.

    ``cumulative_weights[j]`` is the value on ``[x_j, x_{j+1})``; the value
    left of the first jump is 0.
    """

    jump_points: np.ndarray
    cumulative_weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.jump_points, dtype=float)
        w = np.asarray(self.cumulative_weights, dtype=float)
        if x.shape != w.shape or x.ndim != 1:
            raise ValueError("jump_points and cumulative_weights must be 1-d of equal length")
        if x.size == 0:
            raise ValueError("a step CDF needs at least one jump")
        if np.any(np.diff(x) <= 0):
            raise ValueError("jump points must be strictly increasing")
        if np.any(np.diff(w) < 0) or w[0] < 0 or abs(w[-1] - 1.0) > 1e-12:
            raise ValueError("weights must be nondecreasing and end at 1")
        w = w.copy()
        w[-1] = 1.0
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "jump_points", x)
        object.__setattr__(self, "cumulative_weights", w)

    @classmethod
    def from_samples(cls, values) -> "StepCDF":
        values = np.sort(np.asarray(values, dtype=float).ravel())
        if values.size == 0:
            raise ValueError("empty sample")
        x, counts = np.unique(values, return_counts=True)
        return cls(x, np.cumsum(counts) / values.size)

    def __call__(self, x):
        idx = np.searchsorted(self.jump_points, x, side="right")
        w = np.concatenate(([0.0], self.cumulative_weights))
        return w[idx]

    def left(self, x):
        """Left limit F(x-)."""
        idx = np.searchsorted(self.jump_points, x, side="left")
        w = np.concatenate(([0.0], self.cumulative_weights))
        return w[idx]

    @property
    def masses(self) -> np.ndarray:
        return np.diff(np.concatenate(([0.0], self.cumulative_weights)))

    def shifted(self, t: float) -> "StepCDF":
        """x -> F(x - t); jumps that coincide after rounding are merged."""
        x = self.jump_points + t
        last = np.concatenate((np.diff(x) > 0, [True]))
        return StepCDF(x[last], self.cumulative_weights[last])


def esd(s: Spectrum) -> StepCDF:
    """F(x) = #{l_j <= x} / N for the spectrum's N eigenvalues."""
    ev = s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s, dtype=float)
    if ev.size == 0:
        raise ValueError("empty spectrum")
    return StepCDF.from_samples(ev)


def pooled_esd(spectra) -> StepCDF:
    """Average of the ESDs of equally sized spectra (mass 1/(R N) per eigenvalue)."""
    spectra = list(spectra)
    sizes = {s.dimension for s in spectra}
    if len(sizes) != 1:
        raise ValueError(f"pooling needs spectra of equal dimension, got {sorted(sizes)}")
    return StepCDF.from_samples(np.concatenate([s.eigenvalues for s in spectra]))


# ------------------------------------------------------------------ distances


def kolmogorov_distance(F: StepCDF, G, atoms=()) -> float:
    """sup_x |F(x) - G(x)| for a step CDF F and a CDF G.

    G is a vectorised callable, continuous except for the listed
    ``atoms`` (pairs of location and mass), where it is right-continuous.
    Between jumps F is constant and G monotone, so the supremum is attained
    at a jump (from the left or at the point).
    """
    x = F.jump_points
    w = F.cumulative_weights
    w_prev = np.concatenate(([0.0], w[:-1]))
    g = np.asarray(G(x), dtype=float)
    g_left = g.copy()
    for loc, mass in atoms:
        g_left[x == loc] -= mass
    dist = max(np.max(np.abs(g - w)), np.max(np.abs(g_left - w_prev)))
    for loc, mass in atoms:
        gl = float(G(np.array([loc]))[0])
        dist = max(dist, abs(gl - float(F(loc))), abs(gl - mass - float(F.left(loc))))
    return float(dist)


def _levy_holds(F: StepCDF, G: StepCDF, eps: float) -> bool:
    # Both sides are right-continuous step functions of x, constant between
    # breakpoints; probing interval midpoints avoids rounding at the jumps.
    bp = np.unique(np.concatenate((G.jump_points, F.jump_points + eps, F.jump_points - eps)))
    pts = np.concatenate((0.5 * (bp[:-1] + bp[1:]), [bp[-1] + 1.0]))
    g = G(pts)
    lower = F(pts - eps) - eps
    upper = F(pts + eps) + eps
    slack = 1e-13
    return bool(np.all(lower <= g + slack) and np.all(g <= upper + slack))


def levy_distance(F: StepCDF, G: StepCDF, tol: float = 1e-9) -> float:
    """Levy distance by bisection on the band width."""
    if _levy_holds(F, G, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _levy_holds(F, G, mid):
            hi = mid
        else:
            lo = mid
    return hi
