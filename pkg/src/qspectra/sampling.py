"""Random quaternion matrices and the truncation / centering / rescaling pipeline."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from qspectra.quaternion import Quaternion, QuaternionMatrix, embed_matrix

KINDS = ("q_gaussian", "q_rademacher", "q_bounded_mix")

_HALF_WIDTH = np.sqrt(3.0) / 2.0  # q_bounded_mix coefficient range


def _sixth_moment(kind: str) -> float:
    """E||x||^6 for unit-variance entries of the given kind."""
    if kind == "q_gaussian":
        # ||x||^2 = chi2_4 / 4, and E chi2_4^3 = 4 * 6 * 8
        return 4 * 6 * 8 / 64
    if kind == "q_rademacher":
        return 1.0
    if kind == "q_bounded_mix":
        # S = sum of four iid w = c^2, c ~ U[-h, h]; E w^k = h^(2k) / (2k + 1)
        h2 = _HALF_WIDTH**2
        m1, m2, m3 = h2 / 3, h2**2 / 5, h2**3 / 7
        return 4 * m3 + 36 * m2 * m1 + 24 * m1**3
    raise ValueError(f"unknown distribution kind {kind!r}; expected one of {KINDS}")


@dataclass(frozen=True)
class EntryDistribution:
    kind: str = "q_gaussian"
    sixth_moment_bound: float = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}; expected one of {KINDS}")
        exact = _sixth_moment(self.kind)
        if self.sixth_moment_bound is None:
            object.__setattr__(self, "sixth_moment_bound", exact)
        elif self.sixth_moment_bound < exact:
            raise ValueError(
                f"sixth moment bound {self.sixth_moment_bound} is below E||x||^6 = {exact} for {self.kind}"
            )

    def draw_coeffs(self, rng: np.random.Generator, shape) -> np.ndarray:
        shape = tuple(shape) + (4,)
        if self.kind == "q_gaussian":
            return rng.normal(0.0, 0.5, size=shape)
        if self.kind == "q_rademacher":
            return rng.choice(np.array([-0.5, 0.5]), size=shape)
        return rng.uniform(-_HALF_WIDTH, _HALF_WIDTH, size=shape)

    def truncated_moments(self, threshold: float) -> tuple[Quaternion, float]:
        """Return (E x I(||x|| < t), E ||x||^2 I(||x|| < t)).

        All three kinds are symmetric under x -> -x, so the truncated mean is
        the zero quaternion.
        """
        t2 = threshold**2
        if self.kind == "q_rademacher":
            second = 1.0 if t2 > 1.0 else 0.0
        elif self.kind == "q_gaussian":
            # E[chi2_4 / 4; chi2_4 < 4 t^2] = P(chi2_6 < 4 t^2)
            c = 4.0 * t2
            second = -np.expm1(-c / 2) - np.exp(-c / 2) * (c / 2 + c**2 / 8)
        else:
            second = _bounded_mix_truncated_second(t2)
        return Quaternion(0.0), float(second)


def _pair_area(u: float) -> float:
    """Area of {s^2 + t^2 <= u} inside [0, h]^2."""
    h = _HALF_WIDTH
    if u <= 0.0:
        return 0.0
    if u <= h * h:
        return np.pi * u / 4
    if u >= 2 * h * h:
        return h * h
    return h * np.sqrt(u - h * h) + u / 2 * (np.pi / 2 - 2 * np.arccos(min(1.0, h / np.sqrt(u))))


def _pair_area_rate(u: float) -> float:
    # d(area)/du: quarter-arc length inside the square over 2r
    h = _HALF_WIDTH
    if u <= h * h:
        return np.pi / 4
    if u >= 2 * h * h:
        return 0.0
    return np.pi / 4 - np.arccos(min(1.0, h / np.sqrt(u)))


def _bounded_mix_truncated_second(t2: float) -> float:
    """E ||x||^2 I(||x||^2 < t2) for coefficients uniform on [-h, h].

    Write ||x||^2 = U + V with U, V the squared radii of two coefficient
    pairs. By symmetry the moment is 2 E[U; U + V < t2], a single integral
    over U against the closed-form distribution of V.
    """
    h = _HALF_WIDTH
    if t2 >= 4 * h * h:
        return 1.0
    top = min(2 * h * h, t2)
    points = []
    for c in sorted((h * h, t2 - h * h, t2 - 2 * h * h)):
        # merge kinks that coincide up to rounding
        if 1e-12 < c < top - 1e-12 and (not points or c - points[-1] > 1e-12):
            points.append(c)
    # the rate has square-root kinks at the listed points; quadpack may
    # flag them even when the returned error estimate is tiny
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            lambda u: u * _pair_area_rate(u) * _pair_area(t2 - u),
            0.0,
            top,
            points=points or None,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
    if err > 1e-10:
        raise ArithmeticError(f"truncated-moment quadrature error {err:.2e} at t^2={t2}")
    return float(2 * val / h**4)


def replication_rng(master_seed: int, index: int, *keys: int) -> np.random.Generator:
    """Independent generator for replication ``index`` of ``master_seed``.

    Extra integer ``keys`` (e.g. the sample size) select further independent
    streams. The stream depends only on these integers, never on scheduling.
    """
    spawn_key = (int(index),) + tuple(int(k) for k in keys)
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.PCG64(ss))


def sample_matrix(p: int, n: int, dist: EntryDistribution, seed) -> QuaternionMatrix:
    """A p x n matrix of iid entries from ``dist``.

    ``seed`` is an integer or an existing ``numpy.random.Generator``.
    """
    if p < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got p={p}, n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return QuaternionMatrix(dist.draw_coeffs(rng, (p, n)))


@dataclass(frozen=True)
class PreprocessReport:
    truncation_threshold: float
    truncated_count: int
    recentering_shift: Quaternion
    rescale_factors: np.ndarray


def preprocess(X: QuaternionMatrix, n: int, dist: EntryDistribution):
    """Truncate at n^(1/4), recenter by the true truncated mean, rescale to unit variance.

    The moments come from the generating distribution, not from the sample.
    Returns the processed matrix and a :class:`PreprocessReport`.
    """
    if X.n != n:
        raise ValueError(f"n={n} does not match the column count {X.n}")
    if not isinstance(dist, EntryDistribution):
        raise TypeError("preprocess needs the generating EntryDistribution for its truncated moments")
    threshold = float(n) ** 0.25
    mean, second = dist.truncated_moments(threshold)
    sigma2 = second - mean.norm2
    if not sigma2 > 0:
        raise ValueError(f"truncation at {threshold} leaves no mass for {dist.kind} (sigma^2={sigma2})")
    sigma = np.sqrt(min(sigma2, 1.0))

    coeffs = np.array(X.coeffs)
    keep = X.norms() < threshold
    coeffs[~keep] = 0.0
    coeffs = (coeffs - mean.coeffs) / sigma
    factors = np.full(X.shape, 1.0 / sigma)
    factors.setflags(write=False)
    report = PreprocessReport(
        truncation_threshold=threshold,
        truncated_count=int(np.count_nonzero(~keep)),
        recentering_shift=mean,
        rescale_factors=factors,
    )
    return QuaternionMatrix(coeffs), report


def sample_covariance(X: QuaternionMatrix) -> np.ndarray:
    """(1/n) psi(X) psi(X)^*, a 2p x 2p complex Hermitian matrix."""
    Y = embed_matrix(X)
    H = (Y @ Y.conj().T) / X.n
    return 0.5 * (H + H.conj().T)
