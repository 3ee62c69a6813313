"""Support recovery for a sparse leading eigenvector of an incompletely
observed, noisily measured symmetric matrix, by an l1-penalized semidefinite
relaxation with a primal-dual certificate."""

from .errors import (GenerationFailed, InvalidInput, NoConvergence,
                     RefusesToCertify)
from .linalg import (norms, project_simplex, project_spectraplex,
                     soft_threshold, sym_eig, symmetrize)
from .solver import (SdpConfig, SdpSolution, extract_support, kkt_check,
                     objective_value, solve)
from .synth import (GroundTruth, NoiseSpec, Observation, generate_ground_truth,
                    incomplete_covariance, noise_spec, sample_observation,
                    truncated_variance)
from .theory import (bernstein_constants, coherence, corollary1_report,
                     corollary2_report, rescaled_parameter, theorem1_margins,
                     theory_report)
from .witness import WitnessTriple, certify_solution, check, construct

__version__ = "0.1.0"

__all__ = [
    "GenerationFailed", "InvalidInput", "NoConvergence", "RefusesToCertify",
    "norms", "project_simplex", "project_spectraplex", "soft_threshold",
    "sym_eig", "symmetrize",
    "SdpConfig", "SdpSolution", "extract_support", "kkt_check",
    "objective_value", "solve",
    "GroundTruth", "NoiseSpec", "Observation", "generate_ground_truth",
    "incomplete_covariance", "noise_spec", "sample_observation",
    "truncated_variance",
    "bernstein_constants", "coherence", "corollary1_report",
    "corollary2_report", "rescaled_parameter", "theorem1_margins",
    "theory_report",
    "WitnessTriple", "certify_solution", "check", "construct",
]
