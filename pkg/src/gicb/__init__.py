"""Capacity bounds for Gaussian interference channels and networks."""

from .channel_model import (ChannelClass, InterferenceNetwork, build_gaussian_system, classify,
                            standardize)
from .errors import (DomainError, GICBError, InfeasibleGenieError, InputError,
                     InvalidChannelError, InvalidCovarianceError, InvalidGenieError,
                     InvalidOrderingError, LabelError, PreconditionError)
from .gaussian_core import (CovMatrix, EntropyValue, GaussianSystem, conditional_cov,
                            differential_entropy, epi_lower_bound, markov_test,
                            mutual_information, scalar_markov_pair_test,
                            verify_extremal_inequality)
from .genies import EtwGenie, GenieSpec2, GenieSpec3Sym, OrderingFunction, VectorGenie
from .io import __version__
from .network import (build_vector_genie, many_to_one_sum_capacity, many_to_one_test,
                      m_user_tin_sum_rate, one_to_many_sum_capacity, one_to_many_test,
                      three_user_feasible, three_user_inr_threshold, three_user_smart_conditions,
                      three_user_useful_test, vector_genie_sum_bound)
from .regions import HalfPlane, RateRegion
from .two_user import (broadcast_outer_constraint, epi_2r1r2_constraint, epi_onebit_constraint,
                       epi_outer_region, etw_outer_region, hk_gaussian_inner_region,
                       inr_threshold, low_interference_test, sum_capacity, tin_sum_rate)
