"""Limited-aperture multi-frequency inverse source reconstruction.

A direct sampling indicator locates a disc containing the source; the source
is then expanded in Dirichlet eigenfunctions of that disc and the expansion
coefficients are sampled with preconditioned Crank-Nicolson MCMC.
"""

from ._backend import NAME as BACKEND
from .dsm import SamplingGrid, estimate_disc, indicator, indicator_field
from .errors import (ConfigError, ContractError, DomainError, StageError, StateError,
                     ThresholdError)
from .expansion import (BasisIndex, CoefficientVector, assemble_forward_operator, eval_f_be,
                        project)
from .forward import aperture, far_field, generate_dataset, perturb
from .geometry import Disc, Ellipse, Square
from .mcmc import LikelihoodSpec, PriorSpec, misfit, run_chain, summarize
from .pipeline import ExperimentConfig, error_metrics, run_pipeline
from .sources import build_mesh, custom_source, example_source, quadrature
from .special import DiscEigenfunction, bessel_j, bessel_zero

__version__ = "0.1.0"
