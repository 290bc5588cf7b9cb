"""Stable heat kernels, Levy-driven mild solutions, tail functionals,
Monte Carlo verification and spatial-growth integral tests."""

__version__ = "0.1.0"

from .kernel import StableKernel, get_kernel
from .levy import (CheckResult, HypothesisError, LevyMeasure, ModelConfig,
                   check_condition, load_model_config)
from .tails import (RegionA, TailCurve, asymptote, eta0_bar, eta_a_bar,
                    eta_bar, log_slope_profile, sample_curve, tau_bar)
from .sim import (AtomSet, Grid, Lattice, MCResult, SimWindow, char_function,
                  max_atom, mc_tail, mild_solution, sample_prm, size_window,
                  sup_field, truncation_bias, truncation_mass,
                  x_a_functionals)
from .growthtest import (PowerLogFunction, TailAsymptote, classify_growth,
                         classify_numeric, classify_power_log, regime_table,
                         verdict_to_limsup)
