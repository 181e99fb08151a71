"""Seeded Monte Carlo experiments: rate sweeps, variance scaling, extreme eigenvalues, reflection."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from qspectra.fixed_point import empirical_stieltjes
from qspectra.mp_law import MPLaw, UpperHalfPoint
from qspectra.quaternion import QuaternionMatrix, embed_matrix
from qspectra.sampling import EntryDistribution, KINDS, preprocess, replication_rng, sample_covariance, sample_matrix
from qspectra.spectra import ConvergenceError, Spectrum, StepCDF, eigenvalues_hermitian, esd, kolmogorov_distance, pooled_esd

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    distribution: str = "q_gaussian"
    y: float = 0.25
    n_grid: list = field(default_factory=lambda: [100, 200, 400, 800, 1600])
    replications: int = 20
    seed: int = 0
    v: object = "auto"
    out: str | None = None
    workers: int = 1
    preprocess: bool = True

    def __post_init__(self):
        if self.distribution not in KINDS:
            raise ConfigError(f"distribution must be one of {KINDS}, got {self.distribution!r}")
        try:
            self.y = float(self.y)
            self.n_grid = [int(n) for n in self.n_grid]
            self.replications = int(self.replications)
            self.seed = int(self.seed)
            self.workers = int(self.workers)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from None
        if not (self.y > 0 and math.isfinite(self.y)):
            raise ConfigError(f"y must be positive, got {self.y}")
        if not self.n_grid:
            raise ConfigError("n_grid is empty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing, got {self.n_grid}")
        if self.replications < 1:
            raise ConfigError(f"replications must be at least 1, got {self.replications}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        for n in self.n_grid:
            if self.p_for(n) < 1:
                raise ConfigError(f"p = round(y n) is zero at n={n}")
        if self.v != "auto":
            try:
                self.v = float(self.v)
            except (TypeError, ValueError):
                raise ConfigError(f"v must be a positive number or 'auto', got {self.v!r}") from None
            if not self.v > 0:
                raise ConfigError(f"v must be positive, got {self.v}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def p_for(self, n: int) -> int:
        return int(round(self.y * n))

    def v_for(self, n: int) -> float:
        """Smoothing offset; ``auto`` is n^(-2/5) with unit multiplier."""
        return float(n) ** -0.4 if self.v == "auto" else float(self.v)

    def to_dict(self) -> dict:
        return asdict(self)


# ------------------------------------------------------------- rate bounds


def lower_edge(y_p: float) -> float:
    return (1 - math.sqrt(y_p)) ** 2


def pooled_rate_bound(n: int, y_p: float) -> float:
    """n^(-1/2) a_n^(-3/4) if a_n > n^(-2/5), else n^(-1/5)."""
    a_n = lower_edge(y_p)
    if a_n > n ** -0.4:
        return n**-0.5 * a_n**-0.75
    return n**-0.2


def replication_rate_bound(n: int, y_p: float) -> float:
    """n^(-2/5) a_n^(-2/5) if a_n >= n^(-2/5), else n^(-1/5)."""
    a_n = lower_edge(y_p)
    if a_n >= n ** -0.4:
        return n**-0.4 * a_n**-0.4
    return n**-0.2


def loglog_slope(x, y) -> float:
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if x.size < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


# ------------------------------------------------------------ replications

ZERO_TOL = 1e-10


def covariance_spectrum(X: QuaternionMatrix) -> Spectrum:
    """Eigenvalues of (1/n) psi(X) psi(X)^*, with rounding-level values set to exactly 0.

    For p > n the covariance has 2(p - n) zero eigenvalues; leaving them at
    +-1e-16 would open a spurious gap against the law's atom at the origin.
    """
    ev = np.array(eigenvalues_hermitian(sample_covariance(X)).eigenvalues)
    ev[np.abs(ev) <= ZERO_TOL * max(1.0, abs(ev[-1]))] = 0.0
    return Spectrum(ev)



def replication_spectrum(task) -> np.ndarray:
    """Eigenvalues for one replication; ``task`` = (kind, p, n, seed, index, do_preprocess)."""
    kind, p, n, seed, index, do_pre = task
    dist = EntryDistribution(kind)
    X = sample_matrix(p, n, dist, replication_rng(seed, index, n))
    if do_pre:
        X, _ = preprocess(X, n, dist)
    try:
        return np.asarray(covariance_spectrum(X).eigenvalues)
    except ConvergenceError as exc:
        raise ConvergenceError(f"{exc} [n={n}, p={p}, seed={seed}, replication={index}]") from None


def run_replications(cfg: ExperimentConfig, n: int) -> list[Spectrum]:
    p = cfg.p_for(n)
    tasks = [(cfg.distribution, p, n, cfg.seed, r, cfg.preprocess) for r in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(replication_spectrum, tasks))
    else:
        results = [replication_spectrum(t) for t in tasks]
    return [Spectrum(ev) for ev in results]


# --------------------------------------------------------------- rate sweep


@dataclass(frozen=True)
class RateRow:
    n: int
    p: int
    y_p: float
    a_n: float
    mean_ks: float
    ks_std: float
    pooled_ks: float
    bound_thm1: float
    bound_thm2: float


RATE_COLUMNS = [f for f in RateRow.__dataclass_fields__]


@dataclass
class RateReport:
    rows: list
    slope_mean_ks: float
    slope_pooled_ks: float
    ordering_violations: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def rate_sweep(cfg: ExperimentConfig, spectra_by_n: dict | None = None) -> RateReport:
    """Per-replication and pooled Kolmogorov distances to MP(y_p) across the n grid.

    ``spectra_by_n`` receives the replication spectra when a dict is passed.
    """
    rows = []
    violations = []
    for n in cfg.n_grid:
        p = cfg.p_for(n)
        y_p = p / n
        law = MPLaw(y_p)
        spectra = run_replications(cfg, n)
        if spectra_by_n is not None:
            spectra_by_n[n] = spectra
        ks = np.array([kolmogorov_distance(esd(s), law.cdf, law.atoms) for s in spectra])
        pooled = kolmogorov_distance(pooled_esd(spectra), law.cdf, law.atoms)
        row = RateRow(
            n=n,
            p=p,
            y_p=y_p,
            a_n=lower_edge(y_p),
            mean_ks=float(ks.mean()),
            ks_std=float(ks.std(ddof=1)) if ks.size > 1 else 0.0,
            pooled_ks=float(pooled),
            bound_thm1=pooled_rate_bound(n, y_p),
            bound_thm2=replication_rate_bound(n, y_p),
        )
        slack = 2 / math.sqrt(cfg.replications * 2 * p)
        if row.pooled_ks > row.mean_ks + slack:
            log.warning("pooled_ks %.4g exceeds mean_ks %.4g + %.4g at n=%d", row.pooled_ks, row.mean_ks, slack, n)
            violations.append(n)
        rows.append(row)
    ns = [r.n for r in rows]
    return RateReport(
        rows=rows,
        slope_mean_ks=loglog_slope(ns, [r.mean_ks for r in rows]),
        slope_pooled_ks=loglog_slope(ns, [r.pooled_ks for r in rows]),
        ordering_violations=violations,
    )


def envelope_ratio(values, bounds) -> np.ndarray:
    """values(n) / (C bound(n)) with C calibrated at the first grid point."""
    values, bounds = np.asarray(values, float), np.asarray(bounds, float)
    C = values[0] / bounds[0]
    return values / (C * bounds)


# ---------------------------------------------------------- variance scaling

LOW_CONFIDENCE_REPLICATIONS = 10


@dataclass(frozen=True)
class VarianceRow:
    n: int
    p: int
    v: float
    var_re: float
    var_im: float
    low_confidence: bool


@dataclass
class VarianceReport:
    rows: list
    slope_re: float
    slope_im: float


def variance_scaling(cfg: ExperimentConfig, z=1j) -> VarianceReport:
    """Across-replication variance of Re and Im s_p(z) for each n."""
    z = UpperHalfPoint.of(z)
    if z.v <= cfg.n_grid[-1] ** -0.5:
        raise ConfigError(f"v={z.v} must exceed n^(-1/2) for the largest n={cfg.n_grid[-1]}")
    rows = []
    for n in cfg.n_grid:
        values = np.array([empirical_stieltjes(s, z) for s in run_replications(cfg, n)])
        ddof = 1 if values.size > 1 else 0
        rows.append(
            VarianceRow(
                n=n,
                p=cfg.p_for(n),
                v=z.v,
                var_re=float(np.var(values.real, ddof=ddof)),
                var_im=float(np.var(values.imag, ddof=ddof)),
                low_confidence=cfg.replications < LOW_CONFIDENCE_REPLICATIONS,
            )
        )
    ns = [r.n for r in rows]
    return VarianceReport(
        rows=rows,
        slope_re=loglog_slope(ns, [r.var_re for r in rows]),
        slope_im=loglog_slope(ns, [r.var_im for r in rows]),
    )


# -------------------------------------------------------------- lambda max


@dataclass(frozen=True)
class LambdaMaxRow:
    n: int
    p: int
    max_lambda: float
    threshold: float
    exceedances: int


def lambda_max_check(cfg: ExperimentConfig, margin: float = 0.3) -> list[LambdaMaxRow]:
    """Largest eigenvalue per replication against (1 + sqrt(y_p))^2 + margin."""
    rows = []
    for n in cfg.n_grid:
        p = cfg.p_for(n)
        threshold = MPLaw(p / n).b + margin
        lmax = np.array([s.lambda_max for s in run_replications(cfg, n)])
        rows.append(
            LambdaMaxRow(n=n, p=p, max_lambda=float(lmax.max()), threshold=threshold, exceedances=int(np.sum(lmax > threshold)))
        )
    return rows


# --------------------------------------------------------------- reflection


@dataclass(frozen=True)
class ReflectionReport:
    p: int
    n: int
    multiset_deviation: float
    zero_count: int
    expected_zero_count: int
    identity_deviation: float
    norm_identity_gap: float


def _cluster_midpoints(points, scale: float) -> np.ndarray:
    pts = np.sort(points)
    keep = np.concatenate(([True], np.diff(pts) > 1e-9 * scale))
    reps = pts[keep]
    mids = 0.5 * (reps[:-1] + reps[1:])
    return np.concatenate(([reps[0] - 1.0], mids, [reps[-1] + 1.0]))


def reflection_check(X: QuaternionMatrix) -> ReflectionReport:
    """Compare S = (1/n) X X^* with W = (1/p) X^* X for p > n.

    Reports the deviation between the nonzero spectra of (1/n) X X^* and
    (1/n) X^* X, the count of numerically zero eigenvalues of S, and the sup
    deviation in F^S(x) = G(x / y) / y + (1 - 1/y) I(x >= 0) where G is the
    ESD of W.
    """
    p, n = X.shape
    if p <= n:
        raise ValueError(f"reflection needs p > n, got p={p}, n={n}")
    y = p / n
    Y = embed_matrix(X)
    small = Y.conj().T @ Y / n
    small = 0.5 * (small + small.conj().T)
    ev_S = covariance_spectrum(X).eigenvalues
    ev_small = eigenvalues_hermitian(small).eigenvalues
    scale = max(1.0, float(ev_S[-1]))

    top = ev_S[-2 * n :]
    multiset_dev = float(np.max(np.abs(top - ev_small)) / scale)
    zero_count = int(np.sum(ev_S == 0.0))

    ev_W = ev_small / y  # W = (1/p) X^* X
    F_S = esd(ev_S)
    G = esd(ev_W)
    xs = _cluster_midpoints(np.concatenate((ev_S, y * ev_W, [0.0])), scale)
    rhs = G(xs / y) / y + (1 - 1 / y) * (xs >= 0)
    identity_dev = float(np.max(np.abs(F_S(xs) - rhs)))

    law, law_inv = MPLaw(y), MPLaw(1 / y)
    lhs_norm = kolmogorov_distance(F_S, law.cdf, law.atoms)
    rhs_norm = kolmogorov_distance(G, law_inv.cdf, law_inv.atoms) / y
    return ReflectionReport(
        p=p,
        n=n,
        multiset_deviation=multiset_dev,
        zero_count=zero_count,
        expected_zero_count=2 * (p - n),
        identity_deviation=identity_dev,
        norm_identity_gap=abs(lhs_norm - rhs_norm),
    )


def quantile_discretization(law: MPLaw, N: int, grid: int = 20001) -> StepCDF:
    """Step CDF with mass 1/N at the midpoint quantiles of ``law`` (y <= 1).

    Quantiles are interpolated from the CDF on a dense arcsine grid.
    """
    if law.atom:
        raise ValueError("quantile discretization is implemented for y <= 1")
    theta = np.linspace(0.0, np.pi / 2, grid)
    xs = law.a + (law.b - law.a) * np.sin(theta) ** 2
    cdf = law.cdf(xs)
    probs = (np.arange(N) + 0.5) / N
    return StepCDF.from_samples(np.interp(probs, cdf, xs))
