"""Empirical Stieltjes transforms and the finite-n Marchenko-Pastur self-consistency equation.

For the mean transform m = E s_p(z) the equation reads

    m = 1 / (1 - z - y - y z m) + delta,

which is the quadratic  y z m^2 - ((1 - z - y) + y z delta) m + (1 + delta (1 - z - y)) = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from qspectra.mp_law import MPLaw, UpperHalfPoint
from qspectra.spectra import Spectrum


class DegeneratePointError(ArithmeticError):
    pass


class BranchError(ArithmeticError):
    pass


def empirical_stieltjes(s, z) -> complex:
    """s_p(z) = (1/N) sum_j 1 / (l_j - z).

    ``s`` may be a :class:`Spectrum` or an array of eigenvalues.
    """
    ev = s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s, dtype=float)
    z = UpperHalfPoint.of(z).z
    return complex(np.mean(1.0 / (ev - z)))


def empirical_stieltjes_grid(s, u, v: float) -> np.ndarray:
    """Vectorised s_p(u + iv) over an array of real parts."""
    ev = s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s, dtype=float)
    z = np.asarray(u, dtype=float) + 1j * v
    return np.mean(1.0 / (ev[None, :] - z[:, None]), axis=1)


def mean_stieltjes(spectra, z) -> complex:
    """Monte Carlo estimate of E s_p(z); summed in the given (replication) order."""
    total = 0j
    count = 0
    for s in spectra:
        total += empirical_stieltjes(s, z)
        count += 1
    if count == 0:
        raise ValueError("no spectra supplied")
    return total / count


def delta_residual(sp_mean: complex, z, y_p: float) -> complex:
    """delta = sp_mean - 1 / (1 - z - y - y z sp_mean)."""
    z = UpperHalfPoint.of(z).z
    denom = 1 - z - y_p - y_p * z * sp_mean
    if abs(denom) < 1e-300:
        raise DegeneratePointError(f"denominator vanishes at z={z}, y={y_p}, sp_mean={sp_mean}")
    return sp_mean - 1 / denom


def solve_fixed_point(z, y_p: float, delta: complex) -> complex:
    """Root of the self-consistency quadratic lying in the upper half plane.

    If both roots are in the upper half plane, the one continuing the
    delta = 0 (Marchenko-Pastur) branch is returned.
    """
    if not y_p > 0:
        raise ValueError(f"y_p must be positive, got {y_p}")
    z = UpperHalfPoint.of(z).z
    c0 = 1 - z - y_p
    lin = c0 + y_p * z * delta
    root = cmath.sqrt(lin * lin - 4 * y_p * z * (1 + delta * c0))
    m1 = (lin + root) / (2 * y_p * z)
    m2 = (lin - root) / (2 * y_p * z)
    upper = [m for m in (m1, m2) if m.imag > 0]
    if not upper:
        raise BranchError(f"no root in the upper half plane at z={z}, y={y_p}, delta={delta}")
    if len(upper) == 1:
        return upper[0]
    ref = MPLaw(y_p).stieltjes(z)
    return min(upper, key=lambda m: abs(m - ref))


@dataclass(frozen=True)
class FixedPointDiagnostics:
    z: UpperHalfPoint
    y_p: float
    sp_mean: complex
    delta_n: complex
    b_n: complex
    v_y: float
    A: float
    leb_condition: bool
    leb_bound_holds: bool

    @property
    def leb_threshold(self) -> float:
        return self.z.v / (self.v_y * 10 * (self.A + 1) ** 2)

    @property
    def b_bound(self) -> float:
        return 2 / math.sqrt(self.y_p * abs(self.z.z))


def diagnostics(sp_mean: complex, z, y_p: float, A: float | None = None) -> FixedPointDiagnostics:
    """delta_n, b_n and the two gating conditions at one point z.

    ``A`` defaults to the Bai constant A for the law's upper edge.
    """
    z = UpperHalfPoint.of(z)
    if A is None:
        from qspectra.bai_bound import make_constants

        A = make_constants(MPLaw(y_p).b).A
    if not A > 0:
        raise ValueError(f"A must be positive, got {A}")
    zc = z.z
    delta = delta_residual(sp_mean, z, y_p)
    b_n = 1 / (zc + y_p - 1 + y_p * zc * sp_mean)
    v_y = abs(1 - math.sqrt(y_p)) + math.sqrt(z.v)
    threshold = z.v / (v_y * 10 * (A + 1) ** 2)
    return FixedPointDiagnostics(
        z=z,
        y_p=y_p,
        sp_mean=complex(sp_mean),
        delta_n=delta,
        b_n=b_n,
        v_y=v_y,
        A=float(A),
        leb_condition=abs(delta) <= threshold,
        leb_bound_holds=abs(b_n) <= 2 / math.sqrt(y_p * abs(zc)),
    )
