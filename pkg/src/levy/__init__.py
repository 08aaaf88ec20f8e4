"""Численное ядро: устойчивые плотности, мосты Леви, бифуркации и первое прохождение."""

from src.levy.bifurcation import (
    BifurcationEvent,
    BifurcationLength,
    CriticalIndex,
    CriticalPoint,
    ExtremaDiagram,
    MidpointExtrema,
    alpha_critical,
    bifurcation_diagram,
    bifurcation_length,
    critical_index,
    lb_asymptote,
    midpoint_extrema,
    nagaev_bifurcation_length,
    nagaev_pdf,
)
from src.levy.bridge_kernel import (
    JumpCensus,
    MidpointDensity,
    Path,
    effective_jump_census,
    midpoint_density,
    midpoint_pdf,
    recursive_bridge_batch,
    sample_bridge_recursive,
    sample_bridge_stretched,
    sample_midpoint,
    sample_unconditioned_path,
    stretched_bridge_batch,
)
from src.levy.passage import (
    FirstPassageHistogram,
    McEstimate,
    ThresholdSweep,
    brownian_crossing_prob,
    crossing_probability,
    crossing_probability_unconditioned,
    first_passage_histogram,
    gaussian_bridge_crossing_prob,
    gaussian_bridge_fp_density,
    threshold_sweep,
    uniformity_pvalue,
)
from src.levy.rng import RngStream, cms_standard
from src.levy.stable_core import (
    StableDensity,
    sample_stable_increment,
    stable_cdf,
    stable_pdf,
    stable_pdf_derivative,
    stable_quantile,
    stable_tail_constant,
    standard_law,
)

__all__ = [
    # Stable densities
    "StableDensity",
    "standard_law",
    "stable_pdf",
    "stable_pdf_derivative",
    "stable_cdf",
    "stable_quantile",
    "stable_tail_constant",
    "sample_stable_increment",
    # Random streams
    "RngStream",
    "cms_standard",
    # Bridges
    "Path",
    "MidpointDensity",
    "midpoint_density",
    "midpoint_pdf",
    "sample_midpoint",
    "recursive_bridge_batch",
    "sample_bridge_recursive",
    "stretched_bridge_batch",
    "sample_bridge_stretched",
    "sample_unconditioned_path",
    "JumpCensus",
    "effective_jump_census",
    # Bifurcation
    "CriticalPoint",
    "MidpointExtrema",
    "BifurcationLength",
    "CriticalIndex",
    "BifurcationEvent",
    "ExtremaDiagram",
    "midpoint_extrema",
    "bifurcation_length",
    "critical_index",
    "alpha_critical",
    "lb_asymptote",
    "nagaev_pdf",
    "nagaev_bifurcation_length",
    "bifurcation_diagram",
    # First passage
    "McEstimate",
    "FirstPassageHistogram",
    "ThresholdSweep",
    "crossing_probability",
    "crossing_probability_unconditioned",
    "first_passage_histogram",
    "threshold_sweep",
    "uniformity_pvalue",
    "gaussian_bridge_fp_density",
    "gaussian_bridge_crossing_prob",
    "brownian_crossing_prob",
]
