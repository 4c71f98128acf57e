"""Budgeted and baseline random walks for partial graph exploration."""

from .budget import BudgetProbe, closed_form_p, empirical_vs_closed_form, probe_graph
from .estimator import (BoundsReport, CoverCurve, TrialResult, check_bounds, estimate_curve,
                        estimate_pct_max, oracle_hitting_time, oracle_pct, run_trial)
from .graph import (Graph, GraphError, GraphStats, degree_histogram, generate, load_edge_list,
                    save_edge_list, stats, validate)
from .stopping import RewardModel, expected_reward, optimal_cutoff, secretary_select, success_probability
from .strategies import AD, EP, MD, MDW, RWC, SRW, StrategySpec, WalkState, step

__version__ = "0.1.0"
