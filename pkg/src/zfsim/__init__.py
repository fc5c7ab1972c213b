"""Zero-forcing precoding simulator and closed-form performance analysis
for planar-array multi-user downlinks with finite-multipath channels."""

from .analytics import (DimensionMismatch, MomentSummary, NonUniformBeta,
                        compute_D, expected_snr_approx, laplace_gap,
                        moment_oracle, sum_se_approx, sum_se_per_ue)
from .channel import (ArrayGeometry, CovarianceSet, Drop, InvalidDistance,
                      UEGeometry, WrongGeometry, build_covariance_set,
                      compute_covariance, compute_mean_gram, draw_channel,
                      draw_drop, link_gain, steering_matrix,
                      steering_vector_ula, steering_vector_upa, substream)
from .config import ParseError, SimulationConfig, default_config, dump_config, load_config
from .experiments import (ResultTable, read_results, run_ns_accuracy,
                          run_oracle, run_se_sweep, run_snr_sweep,
                          upa_shape_for, write_results)
from .linalg import SingularMatrix, gram, hermitian_inverse, inverse, kron_row
from .neumann import (NotEvaluable, error_magnitude, frobenius_error,
                      neumann_inverse, neumann_order2)
from .precoding import (SumSeEstimate, TooManySingular, ZfResult,
                        ergodic_sum_se, exact_snr, snr_from_trace, zf_precode)

__version__ = "0.1.0"
