"""Quaternion sample covariance spectra and Marchenko-Pastur convergence checks."""

from qspectra.quaternion import (
    Quaternion,
    QuaternionMatrix,
    StructureReport,
    classify_structure,
    embed,
    embed_matrix,
    quaternion_conj,
)
from qspectra.sampling import (
    EntryDistribution,
    PreprocessReport,
    preprocess,
    replication_rng,
    sample_covariance,
    sample_matrix,
)
from qspectra.spectra import (
    Spectrum,
    StepCDF,
    eigenvalues_hermitian,
    esd,
    kolmogorov_distance,
    levy_distance,
    pooled_esd,
)
from qspectra.mp_law import MPLaw, SmoothingScale, UpperHalfPoint, smoothing_modulus
from qspectra.fixed_point import (
    FixedPointDiagnostics,
    delta_residual,
    diagnostics,
    empirical_stieltjes,
    solve_fixed_point,
)
from qspectra.bai_bound import BaiBoundReport, BaiConstants, bai_rhs, make_constants

__version__ = "0.1.0"
