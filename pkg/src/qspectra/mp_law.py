"""The Marchenko-Pastur law: density, CDF, Stieltjes transform and smoothing moduli."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

CDF_TOL = 1e-10


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class UpperHalfPoint:
    u: float
    v: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"imaginary part must be positive, got v={self.v}")

    @property
    def z(self) -> complex:
        return complex(self.u, self.v)

    @classmethod
    def of(cls, z) -> "UpperHalfPoint":
        if isinstance(z, UpperHalfPoint):
            return z
        z = complex(z)
        return cls(z.real, z.imag)


@dataclass(frozen=True)
class SmoothingScale:
    v: float
    v_y: float

    @classmethod
    def at(cls, y: float, v: float) -> "SmoothingScale":
        if not v > 0:
            raise ValueError(f"v must be positive, got {v}")
        return cls(v, abs(1 - math.sqrt(y)) + math.sqrt(v))


@dataclass(frozen=True)
class MPLaw:
    y: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not (self.y > 0 and math.isfinite(self.y)):
            raise ValueError(f"ratio y must be positive and finite, got {self.y}")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"scale sigma2 must be positive and finite, got {self.sigma2}")

    @property
    def a(self) -> float:
        return self.sigma2 * (1 - math.sqrt(self.y)) ** 2

    @property
    def b(self) -> float:
        return self.sigma2 * (1 + math.sqrt(self.y)) ** 2

    @property
    def atom(self) -> float:
        """Mass at the origin (nonzero only for y > 1)."""
        return 1 - 1 / self.y if self.y > 1 else 0.0

    @property
    def atoms(self) -> tuple:
        return ((0.0, self.atom),) if self.atom > 0 else ()

    # -------------------------------------------------------------- density

    def density(self, x):
        """Absolutely continuous part; zero at and outside the support edges."""
        x = np.asarray(x, dtype=float)
        a, b = self.a, self.b
        inside = (x > a) & (x < b)
        out = np.zeros_like(x)
        xi = x[inside]
        out[inside] = np.sqrt((b - xi) * (xi - a)) / (2 * np.pi * xi * self.y * self.sigma2)
        return out if out.ndim else float(out)

    # ------------------------------------------------------------------ cdf

    def _theta(self, x):
        # x = a + (b - a) sin^2(theta) removes the square-root edges
        s = np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)
        return np.arcsin(np.sqrt(s))

    def _theta_integrand(self, theta: float) -> float:
        a, b = self.a, self.b
        s = math.sin(theta) ** 2
        ratio = 1.0 / (b - a) if a == 0.0 else s / (a + (b - a) * s)
        return (b - a) ** 2 * math.cos(theta) ** 2 * ratio / (math.pi * self.y * self.sigma2)

    def _segment(self, t0: float, t1: float) -> float:
        if t1 <= t0:
            return 0.0
        if t1 - t0 < 1e-8:
            # bounded smooth integrand: midpoint error is O((t1 - t0)^3)
            return self._theta_integrand(0.5 * (t0 + t1)) * (t1 - t0)
        val, err = integrate.quad(self._theta_integrand, t0, t1, epsabs=CDF_TOL * 1e-2, epsrel=CDF_TOL, limit=200)
        if err > CDF_TOL:
            raise QuadratureError(f"cdf quadrature error {err:.2e} on theta in [{t0}, {t1}] for y={self.y}")
        return val

    def continuous_mass(self) -> float:
        return self._segment(0.0, math.pi / 2)

    def cdf(self, x):
        """F(x) = atom * I(x >= 0) + int_a^min(x, b) density.

        Arrays are integrated segment by segment between sorted points.
        """
        x_arr = np.asarray(x, dtype=float)
        flat = x_arr.ravel()
        order = np.argsort(flat, kind="stable")
        theta = self._theta(flat[order])
        out = np.empty_like(flat)
        acc, prev = 0.0, 0.0
        for i, t in zip(order, theta):
            if t > prev:
                acc += self._segment(prev, t)
                prev = t
            out[i] = acc
        out += np.where(flat >= 0, self.atom, 0.0)
        out = np.clip(out, 0.0, 1.0)
        # exact values off the support
        out[flat < min(self.a, 0.0)] = 0.0
        out[flat >= self.b] = 1.0
        out = out.reshape(x_arr.shape)
        return out if out.ndim else float(out)

    __call__ = cdf

    def partial_mean(self, t):
        """int_{x <= t} x dF(x), closed form in the arcsine variable."""
        theta = self._theta(t)
        c = (self.b - self.a) ** 2 / (4 * np.pi * self.y * self.sigma2)
        return c * (theta / 2 - np.sin(4 * theta) / 8)

    def integrated_cdf(self, t):
        """I(t) = int_{-inf}^t F(s) ds = t F(t) - int_{x <= t} x dF(x)."""
        t = np.asarray(t, dtype=float)
        val = np.where(t > 0, t * self.cdf(t) - self.partial_mean(t), 0.0)
        return val if val.ndim else float(val)

    # ------------------------------------------------------------ Stieltjes

    def stieltjes(self, z) -> complex:
        """s(z) = int dF(x) / (x - z), z in the upper half plane (sigma2 = 1).

        The principal root is taken and flipped when it would put s(z)
        outside the upper half plane.
        """
        if self.sigma2 != 1.0:
            raise ValueError("the closed-form Stieltjes transform is for sigma2 = 1")
        z = UpperHalfPoint.of(z).z
        y = self.y
        root = cmath.sqrt((z - 1 - y) ** 2 - 4 * y)
        s = (1 - y - z + root) / (2 * y * z)
        if s.imag <= 0:
            s = (1 - y - z - root) / (2 * y * z)
        return s


def smoothing_scale(law: MPLaw, v: float) -> SmoothingScale:
    return SmoothingScale.at(law.y, v)


def smoothing_modulus(law: MPLaw, v: float) -> float:
    """g(v) = 2v / (y (sqrt(a) + sqrt(v))), a modulus for sup_x |F(x+v) - F(x)| when y <= 1."""
    if law.y > 1:
        raise ValueError(f"smoothing modulus is only available for y <= 1, got y={law.y}")
    if not v > 0:
        raise ValueError(f"v must be positive, got {v}")
    return 2 * v / (law.y * (math.sqrt(law.a) + math.sqrt(v)))


def window_integral(law: MPLaw, x, w: float):
    """int_{|s| <= w} |F(x+s) - F(x)| ds, exact via the integrated CDF.

    F is nondecreasing, so the integral is the second difference
    I(x+w) - 2 I(x) + I(x-w).
    """
    x = np.asarray(x, dtype=float)
    return law.integrated_cdf(x + w) - 2 * law.integrated_cdf(x) + law.integrated_cdf(x - w)


def window_sup(law: MPLaw, w: float, grid: int = 400) -> float:
    """sup_x of :func:`window_integral`, by a grid search refined locally."""
    lo = min(law.a, 0.0) - w
    hi = law.b + w
    xs = np.linspace(lo, hi, grid)
    vals = window_integral(law, xs, w)
    best = float(np.max(vals))
    step = xs[1] - xs[0]
    for i in np.argsort(vals)[-3:]:
        res = optimize.minimize_scalar(
            lambda t: -float(window_integral(law, t, w)),
            bounds=(xs[i] - step, xs[i] + step),
            method="bounded",
            options={"xatol": 1e-10},
        )
        best = max(best, -float(res.fun))
    if law.atom > 0:
        best = max(best, float(window_integral(law, 0.0, w)))
    return best


def window_bound(law: MPLaw, w: float) -> float:
    """Closed-form bound C(y) w^2 / (sqrt(a) + sqrt(w)) on sup_x int_{|s|<w} |F(x+s) - F(x)| ds (y <= 1)."""
    if law.y > 1:
        raise ValueError(f"window bound is only available for y <= 1, got y={law.y}")
    y = law.y
    const = 11 * math.sqrt(2 * (1 + y)) / (3 * math.pi * y)
    return const * w**2 / smoothing_scale(law, w).v_y


def modulus_sup(law: MPLaw, theta: float, grid: int = 4000) -> float:
    """Dense-grid estimate of sup_x |F(x + theta) - F(x)|."""
    xs = np.linspace(min(law.a, 0.0) - theta, law.b, grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return float(np.max(np.abs(law.cdf(xs + theta) - law.cdf(xs))))
