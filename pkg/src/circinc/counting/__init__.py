"""Incidence counters: tangent pairs, multiplicity, typed rectangles, multi-fold
points, neighbourhood intersections and three-circle volumes."""
from .multiplicity import (MultiplicityGrid, arc_multiplicity, high_multiplicity_fraction,
                           multiplicity_grid)
from .mufold import mu_fold_points, tangency_groups
from .pairs import (NeighborhoodCount, count_delta_tangent_pairs, count_exact_tangent_pairs,
                    count_exact_tangent_pairs_bruteforce, eps_t_neighborhood,
                    neighborhood_intersection_count, pairs_bruteforce, two_circle_bound)
from .rectangles import (RectangleTypeRecord, RectMode, incidence_count, is_good, type_rectangles,
                         uncovered_tangent_pairs, wolff_bound)
from .report import IncidenceReport, incidence_report
from .volumes import VolumeEstimate, common_tangent_circles, generic_triple, three_circle_set_volume

__all__ = [
    "IncidenceReport", "MultiplicityGrid", "NeighborhoodCount", "RectMode", "RectangleTypeRecord",
    "VolumeEstimate", "arc_multiplicity", "common_tangent_circles", "count_delta_tangent_pairs",
    "count_exact_tangent_pairs", "count_exact_tangent_pairs_bruteforce", "eps_t_neighborhood",
    "generic_triple", "high_multiplicity_fraction", "incidence_count", "incidence_report", "is_good",
    "mu_fold_points", "multiplicity_grid", "neighborhood_intersection_count", "pairs_bruteforce",
    "tangency_groups", "three_circle_set_volume", "two_circle_bound", "type_rectangles",
    "uncovered_tangent_pairs", "wolff_bound",
]
