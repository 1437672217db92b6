"""ditherlab: estimation from subtractively-dithered quantized Gaussian
measurements.

Simulation of midtread quantization with and without subtractive dither, a
family of location estimators (mean, midrange, interval-censored ML via EM,
generalized Gaussian ML, and order-statistics weight families), the matching
performance bounds, regime boundaries of the noise ratio sigma_z/delta, and a
reproducible Monte Carlo harness with a CSV-emitting CLI.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bounds import (BoundCurve, RegimeBoundaries, bound_curve, ncrb,
                     nmse_mean, nmse_mid, nmse_q, regime_boundaries, xi1,
                     xi1_fit_cubic, xi1_fit_linear, xi2, xi2_fit)
from .estimators import (EmTrace, EstimatorKind, WeightVector, apply_weights,
                         est_dml, est_ggml, est_mean, est_midrange,
                         est_nonlinear, est_q_mean, est_qml,
                         weights_alpha_outer, weights_nearly_best)
from .ggapprox import (GGParams, ShapeFit, beta_coefficient, fit_shape,
                       gg_cdf, gg_inv_cdf, gg_pdf, gg_excess_kurtosis,
                       nvar_ggml, sum_excess_kurtosis, true_total_noise_pdf)
from .harness import (SweepConfig, SweepResult, SweepRow, TrialResult,
                      emit_csv, parse_csv, run_sweep, run_trial)
from .numerics import (NonConvergenceError, RandomStream, ToleranceConfig,
                       find_root, integrate, ln_gamma, minimize_1d,
                       reg_lower_inc_gamma, std_normal_cdf,
                       std_normal_inv_cdf, std_normal_pdf)
from .quantize import (MeasurementBatch, QuantizerSpec, SignalModel,
                       draw_dithered_batch, draw_quantized_batch, load_batch,
                       quantization_error, quantize, save_batch)

__version__ = "0.1.0"
