"""Cantor sets from gap sequences, gauge-function checks and Hausdorff-measure estimates."""

__version__ = "0.1.0"

from .core import (Address, DomainError, GapSpec, GapTable, FloorPowerGaps, IntervalGeometry,
                   LevelGeometry, MiddleThirdsGaps, NaryPowerGaps, PowerGaps, UnsupportedRigorError,
                   cantor_measure, dump_gap_table, interval_geometry, level_geometry,
                   load_gap_table, near_basic_interval)
from .gauge import (ConditionReport, GaugeError, GaugeFunction, check_doubling,
                    check_symmetric_condition_i, check_theorem2_condition_i)
from .hypotheses import (QRBounds, StaircasePoint, check_assumption_ii, check_assumption_ii_mirror,
                         check_decreasing_gaps, check_lemma_equivalence, estimate_qr,
                         staircase_profile)
from .measure import (CoverSolution, MeasureEstimate, TheoremNotApplicable, dp_optimal_cover,
                      example_convergence_series, mdp_lower_bound, thm1_bounds, thm2_bounds,
                      uniform_cover_sum)
from .catalog import Family, family_from_name, make_Cp, make_Cpn, make_Cpx, make_middle_thirds
