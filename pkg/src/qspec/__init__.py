"""Measurement-based noise spectroscopy of a dephasing qubit."""

from .filters import (MeasurementProtocol, PiecewiseFilter, Segment,
                      SignPattern, alternating_signs, build_filter,
                      comb_coefficient, comb_power_approx, comb_protocol,
                      dd_filter, filter_fourier, filter_power)
from .gaussianchi import (AttenuationResult, chi_overlap, cxx_two_measurement,
                          decay_rate, g_gaussian)
from .montecarlo import (CorrelatorEstimate, PhaseVector, all_axis_correlators,
                         combine_to_g, correlator_axes, correlator_g,
                         no_reprep_expectation, phases, projection_correlators,
                         same_axis_decomposition_check)
from .noise import (CompositeSource, ConfigurationError, Lorentzian,
                    NarrowPeak, NoiseTrajectory, OUSource, PowerLaw,
                    QuadraticSource, RngStream, SpectrumModel, SpectrumSource,
                    White, ZeroSource, gaussian_trajectory, ou_trajectory,
                    quadratic_transform, zero_trajectory)
from .nongaussian import (WitnessReport, cp2_protocol, cp2_witness_sweep,
                          gaussian_truncation_cp2, quadratic_ou_source,
                          second_cumulant_spectrum, witness_cxy, witness_cxyx)
from .spectroscopy import (PeakLocalization, ReconstructionResult,
                           SpectroscopyScan, jitter_smear, peak_localization,
                           reconstruct, scan)

__version__ = "0.1.0"
