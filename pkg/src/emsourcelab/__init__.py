"""Numerical laboratory for inverse source problems in electrodynamics.

The package synthesizes boundary measurements of a divergence-free
current pulse via retarded potentials, probes them with plane waves to
obtain Fourier samples of the source, reconstructs the band-limited part,
and checks the analytic inequalities that control how the reconstruction
error grows with noise and bandwidth.
"""

import os

# Pick the portable numba threading layer before anything imports numba;
# tbb/omp availability varies across environments and the workqueue layer
# keeps runs reproducible.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from .boundary import (BoundaryRecord, NoiseSpec, RecordFamily, add_noise,
                       load_record, measurement_epsilon, record_boundary_data,
                       record_difference, record_family, save_record)
from .errors import (AccuracyError, BandwidthError, ConfigError,
                     GeometryError, RegionError)
from .forward import (huygens_horizon, huygens_residual, retarded_curl,
                      retarded_field, sample_ball_points, sphere_snapshot)
from .geometry import (MediumParams, PolarizationProbe, SphereGrid,
                       SpectralNodeSet, TimeGrid, curl_plane_wave,
                       direction_grid, fourier_time_profile, gauss_legendre,
                       make_probe, plane_wave_field, require_bandwidth,
                       verify_bandwidth_condition)
from .oracle import (direct_fourier_oracle, sobolev_h1_norm, spatial_l2_norm,
                     spatial_transform, transverse_fourier_oracle)
from .probing import (ReconstructionGrid, ReconstructionResult,
                      SpectralSamples, assemble_spectrum_ip1, band_energy,
                      ip2_band_energy, load_samples, probing_functional,
                      reconstruct_source, save_samples, spectral_sample_ip1,
                      spectral_sample_ip2, spectral_sample_ip3)
from .sources import (BumpProfile, SourceModel, build_source,
                      gaussian_curl_source, ring_current_source)
from .stability import (BandSplit, ContinuationReport, SweepPoint,
                        SweepReport, TailEstimate, ball_continuation_estimate,
                        choose_s, continuation_check, continuation_exponent,
                        continuation_profile, envelope, fit_constant,
                        lowpass_energy, lowpass_energy_bound,
                        split_fit_constants, sweep_envelope, tail_energy)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "BandSplit", "BandwidthError", "BoundaryRecord",
    "BumpProfile", "ConfigError", "ContinuationReport", "GeometryError",
    "MediumParams", "NoiseSpec", "PolarizationProbe", "ReconstructionGrid",
    "ReconstructionResult", "RecordFamily", "RegionError", "SourceModel",
    "SpectralNodeSet", "SpectralSamples", "SphereGrid", "SweepPoint",
    "SweepReport", "TailEstimate", "TimeGrid", "add_noise",
    "assemble_spectrum_ip1", "ball_continuation_estimate", "band_energy",
    "build_source", "choose_s", "continuation_check",
    "continuation_exponent", "continuation_profile", "curl_plane_wave",
    "direct_fourier_oracle", "direction_grid", "envelope", "fit_constant",
    "fourier_time_profile", "gauss_legendre", "gaussian_curl_source",
    "huygens_horizon", "huygens_residual", "ip2_band_energy", "load_record",
    "load_samples", "lowpass_energy", "lowpass_energy_bound", "make_probe",
    "measurement_epsilon", "plane_wave_field", "probing_functional",
    "reconstruct_source", "record_boundary_data", "record_difference",
    "record_family", "require_bandwidth", "retarded_curl", "retarded_field",
    "ring_current_source", "sample_ball_points", "save_record",
    "save_samples", "sobolev_h1_norm", "spatial_l2_norm",
    "spatial_transform", "spectral_sample_ip1", "spectral_sample_ip2",
    "spectral_sample_ip3", "sphere_snapshot", "split_fit_constants",
    "sweep_envelope", "tail_energy", "transverse_fourier_oracle",
    "verify_bandwidth_condition",
]
