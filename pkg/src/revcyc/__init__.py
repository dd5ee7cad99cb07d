"""Random reverse-cyclic matrix ensembles: spectra, eigenvalue laws, and the
screened harmonic oscillator whose ground state reproduces their JPDF."""

__version__ = "0.1.0"

from .core import DenseMatrix, GeneratorVector, entry, to_dense, weight_exponent
from .ensemble import EnsembleConfig, sample_ensemble, sample_generator, sample_spectra
from .laws import AnalyticLaw, LawKind, calibrate_unit_mean, cdf, pdf, sample_law
from .spectral import (
    SpectrumBatch,
    SpectrumDecomposition,
    dft,
    eigenvector_matrix,
    jacobi_eigenvalues,
    jacobian3,
    map_eigen_to_matrix3,
    reconstruct,
    spectrum,
)

__all__ = [
    "AnalyticLaw", "DenseMatrix", "EnsembleConfig", "GeneratorVector", "LawKind",
    "SpectrumBatch", "SpectrumDecomposition", "calibrate_unit_mean", "cdf", "dft",
    "eigenvector_matrix", "entry", "jacobi_eigenvalues", "jacobian3",
    "map_eigen_to_matrix3", "pdf", "reconstruct", "sample_ensemble", "sample_generator",
    "sample_law", "sample_spectra", "spectrum", "to_dense", "weight_exponent",
]
