"""Effective and modified quantum-Zeno decay rates for a strongly coupled
two-level system, with brute-force oracles and a reproduction CLI."""

from .bath import (BathPhases, SpectralDensity, Temperature,
                   ZERO_TEMPERATURE, discretize)
from .errors import (ConfigError, DivergentIntegralError, IntegrationError,
                     NoCrossingError, NumericsError, TruncationLeakageError,
                     ZenoscopeError)
from .quadrature import (QuadratureSpec, integrate_semi_infinite,
                         integrate_square, integrate_triangle)
from .state import (InitialState, ProjectorDecomposition, decompose_projector,
                    make_state, normalization_Z)
from .rates import (ModelParams, PerturbativeValidityWarning, RateDefinition,
                    RateResult, gamma_excited, gamma_general, gamma_modified,
                    gamma_modified_excited, gamma_superposition,
                    survival_chain, survival_excited, survival_general)
from .analysis import (CriticalAngleResult, DecayCurve, PeakResult,
                       RegimeSegmentation, TauGrid, classify_regimes,
                       critical_angle, find_peak, sample_curve)
from .oracle import (DiscreteBathSystem, bath_trace_check,
                     bath_trace_reference, build_hamiltonians, exact_survival,
                     polaron_identity_residual, refine_quadrature)

__version__ = "0.1.0"
