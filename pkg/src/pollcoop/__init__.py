"""Characteristic functions and cooperative solutions for an n-player pollution game."""

from .analytic import (AffineControl, ControlProfile, Trajectory, cooperative_agreement, nash_equilibrium,
                       player_payoff, pollution_gap, state_trajectory)
from .charfun import (BASIC_KINDS, BoundsGap, CFKind, CFTable, alignment_coefficient, cf_table, cf_value,
                      cover_by_enumeration, distances, superadditive_cover, verify_partial_order,
                      verify_superadditivity)
from .game import (Aggregates, Coalition, GameSpec, PlayerParams, coalition_aggregates, enumerate_coalitions,
                   random_regular_spec, validate_spec)
from .oracle import (DiscretizedControl, OracleResult, integrate_payoffs, oracle_cf, oracle_max_coalition,
                     oracle_min_complement, oracle_nash, validate_against_closed_forms)
from .solutions import (Imputation, check_imputation, compare_shapley, imputation_vertices, shapley,
                        shapley_closed_form)

__version__ = "0.1.0"
