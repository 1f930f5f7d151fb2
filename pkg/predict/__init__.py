"""
Predict Module
Control scenarios and posterior-predictive replicate simulation
"""

from .scenario import ScenarioSpec
from .simulation import (
    ReplicateSummary,
    PairedDifference,
    ScenarioRun,
    kth_largest,
    exceedance_probability,
    simulate_site_year,
    scenario_concentrations,
    interpolate_to_cells,
    run_scenario_set,
    run_scenario,
)

__all__ = [
    'ScenarioSpec',
    'ReplicateSummary',
    'PairedDifference',
    'ScenarioRun',
    'kth_largest',
    'exceedance_probability',
    'simulate_site_year',
    'scenario_concentrations',
    'interpolate_to_cells',
    'run_scenario_set',
    'run_scenario',
]
