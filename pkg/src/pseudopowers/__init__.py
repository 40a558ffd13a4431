"""Simulation and exact checks for sumsets of pseudo s-th power sequences."""

from .events import (EXACT_UNIVERSE_CAP, EventSystem, GuardError, IntervalSpec,
                     JansonPreconditionError, LemmaSumResult, OmegaSet, RepPattern,
                     build_interval_system, build_system, dependence_sum, enumerate_omega,
                     exact_family_probability, exact_gap_probability, independent_product,
                     janson_bounds, lemma_sum_i, lemma_sum_ii, lemma_sum_iii,
                     montecarlo_gap_probability, omega_probability_sum,
                     pairwise_dependence_sum, rep_patterns)
from .modelmath import (gamma_reciprocal_power, gap_constant, lambda_s, membership_probability,
                        poisson_pmf)
from .sampler import PseudoSequence, count_variance, expected_count, sample_sequence
from .stats import (PoissonProfile, PowerFit, TrialReport, aggregate, exponent_fit,
                    poisson_profile, poisson_reference, run_trial, sumset_density,
                    total_variation)
from .sumset import (GapRecord, GapTable, NoDataError, RepCountTable, SumsetProfile, gaps,
                     max_normalized_gap, representation_counts, sumset)

__version__ = "0.1.0"
