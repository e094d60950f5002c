"""Heralded single-photon preparation from a continuous-wave OPO.

Deterministic Gaussian-state toolkit: two-time correlation kernels,
covariance assembly for click and dark-window conditioning, Wigner and
one-photon-fidelity evaluation, temporal-mode optimization, heralding-rate
formulas, and a degenerate-source variant.
"""

from .opo_model import (GAMMA, OpoParams, ExpSumKernel, lambda_mu,
                        anomalous_kernel, normal_kernel, kernel_anomalous,
                        kernel_normal, mean_intensity)
from .mode_functions import (ModeGrid, ClickMode, norm_matrix, normalize,
                             exp_mode, kernel_quadratic_form,
                             kernel_convolution, convolution_weight_matrix,
                             gram_matrix)
from .gaussian_conditioning import (Cov, WindowSpec, RadialWigner,
                                    two_mode_cov, signal_variance,
                                    build_click_signal_cov,
                                    build_extended_cov, vacuum_condition,
                                    windowed_click_signal_cov,
                                    click_condition, wigner_eval,
                                    wigner_one_photon, fidelity_one_photon,
                                    windowed_fidelity,
                                    symplectic_eigenvalues)
from .mode_optimizer import (OptimizerConfig, ConvergenceError,
                             optimize_fixed_point, optimize_general,
                             general_objective, phase_stationarity_check)
from .heralding_rates import (click_rate, trigger_only_cov,
                              vac_click_probability,
                              production_rate_windowed)
from .oracle_suite import (McConfig, quad2d, direct_vacuum_projection,
                           mc_vac_click, oracle_record)
from .degenerate_appendix import (DegenerateParams, AxialWigner,
                                  build_cov_degenerate,
                                  click_condition_degenerate,
                                  fidelity_degenerate)

__version__ = "1.0.0"
