"""Numerical right-hand side of Bai's smoothing inequality against the Marchenko-Pastur law.

For a distribution F and the reference G,

    ||F - G|| <= [ int_{-A}^{A} |f(u+iv) - g(u+iv)| du
                   + 2 pi / v int_{|x|>B} |F - G| dx
                   + 1 / v sup_x int_{|s| <= 2 v a} |G(x+s) - G(x)| ds ] / (pi (1 - kappa) (2 gamma - 1))

with f, g the Stieltjes transforms, gamma = (2/pi) arctan(a) > 1/2 and
kappa = 4B / (pi (A - B) (2 gamma - 1)) < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from qspectra.mp_law import MPLaw, QuadratureError, window_bound, window_sup
from qspectra.spectra import StepCDF, kolmogorov_distance


@dataclass(frozen=True)
class BaiConstants:
    bai_a: float
    gamma: float
    A: float
    B: float
    kappa: float

    def __post_init__(self):
        if not self.gamma > 0.5:
            raise ValueError(f"gamma = {self.gamma} must exceed 1/2 (needs bai_a > 1, got {self.bai_a})")
        if not (self.A > self.B > 0):
            raise ValueError(f"need A > B > 0, got A={self.A}, B={self.B}")
        if not self.kappa < 1:
            raise ValueError(f"kappa = {self.kappa} must be below 1")

    @classmethod
    def from_parameters(cls, bai_a: float, A: float, B: float) -> "BaiConstants":
        gamma = 2 / math.pi * math.atan(bai_a)
        if not gamma > 0.5:
            raise ValueError(f"gamma = {gamma} must exceed 1/2 (needs bai_a > 1, got {bai_a})")
        if not A > B:
            raise ValueError(f"need A > B, got A={A}, B={B}")
        kappa = 4 * B / (math.pi * (A - B) * (2 * gamma - 1))
        return cls(bai_a=bai_a, gamma=gamma, A=A, B=B, kappa=kappa)

    @property
    def prefactor(self) -> float:
        return 1 / (math.pi * (1 - self.kappa) * (2 * self.gamma - 1))


def make_constants(b_support: float) -> BaiConstants:
    """a = sqrt(3) (gamma = 2/3), B = b + 1, A = 5B + 1."""
    if not b_support > 0:
        raise ValueError(f"upper support edge must be positive, got {b_support}")
    B = b_support + 1
    return BaiConstants.from_parameters(math.sqrt(3.0), 5 * B + 1, B)


@dataclass(frozen=True)
class BaiBoundReport:
    term_stieltjes: float
    term_tail: float
    term_smoothing: float
    prefactor: float
    total: float
    observed_ks: float
    v: float
    term_smoothing_grid: float
    term_smoothing_closed: float

    @property
    def holds(self) -> bool:
        return self.observed_ks <= self.total


def _stieltjes_term(F: StepCDF, law: MPLaw, v: float, A: float) -> float:
    x, mass = F.jump_points, F.masses

    def integrand(u):
        z = complex(u, v)
        f = complex(np.sum(mass / (x - z)))
        return abs(f - law.stieltjes(z))

    points = [p for p in (0.0, law.a, law.b, x[0], x[-1]) if -A < p < A]
    val, err = integrate.quad(integrand, -A, A, points=sorted(set(points)), limit=1000, epsabs=1e-9, epsrel=1e-9)
    if not np.isfinite(val) or err > 1e-6 * max(1.0, val):
        raise QuadratureError(f"Stieltjes-difference integral did not converge (err {err:.2e})")
    # the quadrature error is added so the term never underestimates
    return val + err


def _tail_term(F: StepCDF, law: MPLaw, B: float) -> float:
    """int_{|x| > B} |F(x) - G(x)| dx, piecewise over F's constant stretches."""
    lo_support = min(law.a, 0.0)
    x = F.jump_points

    def piece(l, r):
        # F is constant on [l, r); G is 0 left of lo_support and 1 right of b
        if r <= l:
            return 0.0
        fv = float(F(l))
        if l >= law.b:
            return abs(1.0 - fv) * (r - l)
        if r <= lo_support:
            return fv * (r - l)
        val, err = integrate.quad(lambda t: abs(fv - float(law.cdf(t))), l, r, epsabs=1e-12, limit=200)
        return val + err

    total = 0.0
    right_end = max(x[-1], law.b)
    if right_end > B:
        cuts = np.unique(np.concatenate(([B, right_end], x[(x > B) & (x < right_end)], [c for c in (law.b, 0.0) if B < c < right_end])))
        total += sum(piece(l, r) for l, r in zip(cuts[:-1], cuts[1:]))
    left_end = min(x[0], lo_support)
    if left_end < -B:
        cuts = np.unique(np.concatenate(([left_end, -B], x[(x > left_end) & (x < -B)], [c for c in (law.a, 0.0) if left_end < c < -B])))
        total += sum(piece(l, r) for l, r in zip(cuts[:-1], cuts[1:]))
    return total


def bai_rhs(F: StepCDF, law: MPLaw, v: float, c: BaiConstants | None = None) -> BaiBoundReport:
    """Evaluate every term of the smoothing inequality for F against ``law``.

    The smoothing term takes the larger of the direct sup (grid plus local
    refinement) and the closed-form window bound, when the latter applies
    (y <= 1).
    """
    if not v > 0:
        raise ValueError(f"v must be positive, got {v}")
    if c is None:
        c = make_constants(law.b)
    t_stieltjes = _stieltjes_term(F, law, v, c.A)
    t_tail = 2 * math.pi / v * _tail_term(F, law, c.B)
    w = 2 * v * c.bai_a
    grid = window_sup(law, w) / v
    closed = window_bound(law, w) / v if law.y <= 1 else 0.0
    t_smooth = max(grid, closed)
    total = c.prefactor * (t_stieltjes + t_tail + t_smooth)
    return BaiBoundReport(
        term_stieltjes=t_stieltjes,
        term_tail=t_tail,
        term_smoothing=t_smooth,
        prefactor=c.prefactor,
        total=total,
        observed_ks=kolmogorov_distance(F, law.cdf, law.atoms),
        v=v,
        term_smoothing_grid=grid,
        term_smoothing_closed=closed,
    )


def stieltjes_difference(F: StepCDF, law: MPLaw, u, v: float) -> np.ndarray:
    """|f(u+iv) - g(u+iv)| on an array of u (diagnostic)."""
    f = np.array([complex(np.sum(F.masses / (F.jump_points - complex(t, v)))) for t in np.atleast_1d(u)])
    g = np.array([law.stieltjes(complex(t, v)) for t in np.atleast_1d(u)])
    return np.abs(f - g)


__all__ = [
    "BaiBoundReport",
    "BaiConstants",
    "bai_rhs",
    "make_constants",
    "stieltjes_difference",
]
