"""
Scenario Simulation
Posterior-predictive replicate summers on the grid: draw parameters, krige the
site coefficients to every cell, push an AR(1) Gaussian copula through the
conditional quantile function, and summarize order statistics
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
import pandas as pd
from scipy.special import ndtr

from inference.copula import ar1_latent
from rfm import compose_perturbation, evaluate_rfm_field, negative_fraction
from spatial import CoefficientField, KrigingOperator
from src.errors import InputError
from src.seeding import substream
from tail import ConditionalModelParams, conditional_quantile
from tail.quantile_basis import clamp_tau


def kth_largest(values, k, axis=0):
    """
    k-th order statistic from the top

    Args:
        values: Array of values
        k: 1 for the maximum, 4 for the fourth largest, ...
        axis: Axis holding the series

    Returns:
        float for 1-d input, otherwise an array without `axis`
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[axis] if values.ndim else 0
    if not 1 <= k <= n:
        raise InputError(f"k must lie in 1..{n}, got {k}")
    out = -np.take(np.partition(-values, k - 1, axis=axis), k - 1, axis=axis)
    return float(out) if np.ndim(out) == 0 else out


def exceedance_probability(statistics, threshold):
    """
    Fraction of replicates whose statistic exceeds the threshold

    Args:
        statistics: (R,) or (R, n_cells) replicate statistics
        threshold: ppb (may be -inf)

    Returns:
        float or (n_cells,) array
    """
    statistics = np.asarray(statistics, dtype=float)
    if statistics.ndim == 0 or statistics.shape[0] < 1:
        raise InputError("need at least one replicate")
    out = np.mean(statistics > threshold, axis=0)
    return float(out) if np.ndim(out) == 0 else out


def simulate_site_year(C_series, model, site, phi, rng, z=None):
    """
    One simulated season at one location

    Args:
        C_series: Reduced-form concentrations per day, shape (n_T,)
        model: ConditionalModelParams
        site: Row of `model` to use
        phi: Temporal range of the latent AR(1) process (days, > 0)
        rng: numpy Generator for the latent series
        z: Optional fixed latent series (n_T,), replacing the AR(1) draw

    Returns:
        numpy array (n_T,) in ppb
    """
    C = np.asarray(C_series, dtype=float).ravel()
    if z is None:
        z = ar1_latent(C.shape[0], phi, rng)
    resolved = model.resolve(C, np.full(C.shape[0], site))
    return conditional_quantile(clamp_tau(ndtr(np.asarray(z, dtype=float))), resolved)


def scenario_concentrations(field, alpha, eta):
    """RFM field (n_T, n_cells) under the calibrated perturbation plus a control"""
    return evaluate_rfm_field(field, compose_perturbation(alpha, eta))


def interpolate_to_cells(state, site_xy, cell_xy, rng):
    """
    Krige every site-varying process of a posterior draw to grid cells

    Args:
        state: PosteriorState
        site_xy: (n_sites, 2) monitor coordinates, km
        cell_xy: (n_cells, 2) grid-cell coordinates, km
        rng: numpy Generator

    Returns:
        ConditionalModelParams with one row per cell
    """
    operator = KrigingOperator(site_xy, cell_xy, state.gp_range)
    src = state.model
    cells = ConditionalModelParams.zeros(src.basis, src.order, len(cell_xy), src.use_gpd)
    for k, proc in enumerate(state.process_names):
        coefficients = CoefficientField(proc, site_xy, src.process(proc))
        cells.process(proc)[:] = coefficients.interpolate(state.hypers(k), cell_xy, rng, operator)
    cells.xi = src.xi.copy()
    cells.d = src.d.copy()
    cells.l_thr, cells.u_thr = src.l_thr, src.u_thr
    return cells


@dataclass
class ReplicateSummary:
    """Streaming per-cell summaries of one scenario over R replicates"""
    name: str
    cell_ids: np.ndarray
    xy: np.ndarray
    k: int
    thresholds: list
    n_replicates: int = 0
    sum_kth: np.ndarray = None
    sum_max: np.ndarray = None
    exceed_counts: np.ndarray = None
    kth_draws: list = None
    draw_indices: list = dc_field(default_factory=list)
    negative_share: float = 0.0

    def __post_init__(self):
        n_cells = len(self.cell_ids)
        if self.sum_kth is None:
            self.sum_kth = np.zeros(n_cells)
            self.sum_max = np.zeros(n_cells)
            self.exceed_counts = np.zeros((len(self.thresholds), n_cells), dtype=int)

    def add(self, kth, maximum, draw_index):
        self.n_replicates += 1
        self.sum_kth += kth
        self.sum_max += maximum
        for i, c in enumerate(self.thresholds):
            self.exceed_counts[i] += kth > c
        self.draw_indices.append(int(draw_index))
        if self.kth_draws is not None:
            self.kth_draws.append(np.array(kth, copy=True))

    @property
    def mean_kth(self):
        return self.sum_kth / self.n_replicates

    @property
    def mean_max(self):
        return self.sum_max / self.n_replicates

    def p_exceed(self, threshold):
        i = self.thresholds.index(float(threshold))
        return self.exceed_counts[i] / self.n_replicates

    def to_frame(self):
        frame = pd.DataFrame({
            'cell_id': self.cell_ids,
            'x_km': self.xy[:, 0],
            'y_km': self.xy[:, 1],
            'mean_kth': self.mean_kth,
            'mean_max': self.mean_max,
        })
        for c in self.thresholds:
            frame[f"p_exceed_{c:g}"] = self.p_exceed(c)
        return frame


@dataclass
class PairedDifference:
    """Replicate-paired comparison of a scenario against a baseline"""
    name: str
    baseline: str
    sum_diff: np.ndarray
    count_greater: np.ndarray
    n_replicates: int = 0

    def add(self, kth, baseline_kth):
        self.n_replicates += 1
        self.sum_diff += kth - baseline_kth
        self.count_greater += kth > baseline_kth

    def to_frame(self, cell_ids, xy):
        return pd.DataFrame({
            'cell_id': cell_ids,
            'x_km': xy[:, 0],
            'y_km': xy[:, 1],
            'mean_diff_kth': self.sum_diff / self.n_replicates,
            'p_greater': self.count_greater / self.n_replicates,
        })


@dataclass
class ScenarioRun:
    summaries: dict
    differences: dict


def run_scenario_set(specs, draws, field, copula, seed, baseline=None,
                     keep_draws=False, verbose=False):
    """
    Simulate several scenarios on shared replicate substreams

    Replicate r uses substream (seed, r, 0) for the posterior draw and the
    kriging, and (seed, r, 1 + cell) for the latent series of each cell.
    Scenarios only change the reduced-form field, so their replicates are
    paired.

    Args:
        specs: List of ScenarioSpec sharing replicates and k
        draws: PosteriorDraws
        field: SensitivityField of the prediction grid
        copula: CopulaParams
        seed: Master seed
        baseline: Name of the scenario others are differenced against
            (default: first spec)
        keep_draws: Retain per-replicate k-th largest values
        verbose: Print progress

    Returns:
        ScenarioRun
    """
    if not specs:
        raise InputError("no scenarios to run")
    if len(draws) == 0:
        raise InputError("posterior has no draws")
    R, k = specs[0].replicates, specs[0].k
    if any(s.replicates != R or s.k != k for s in specs):
        raise InputError("scenarios run together must share replicates and k")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise InputError("scenario names must be unique")
    for spec in specs:
        compose_perturbation(np.zeros(field.n_inputs), spec.eta)
    if k > field.n_days:
        raise InputError(f"k={k} exceeds the {field.n_days}-day season")
    baseline = baseline or names[0]
    if baseline not in names:
        raise InputError(f"baseline scenario '{baseline}' is not in the run")

    n_days, n_cells = field.n_days, field.n_cells
    cell_rows = np.tile(np.arange(n_cells), n_days)
    summaries = {
        s.name: ReplicateSummary(s.name, field.cell_ids, field.xy, k, list(s.thresholds),
                                 kth_draws=[] if keep_draws else None)
        for s in specs
    }
    differences = {
        s.name: PairedDifference(s.name, baseline, np.zeros(n_cells), np.zeros(n_cells, dtype=int))
        for s in specs if s.name != baseline
    }

    if verbose:
        print(f"🎲 Simulating {R} replicate season(s) x {n_cells} cells for "
              f"{', '.join(names)}")

    for r in range(R):
        rng = substream(seed, 'replicate', r, 0)
        draw_index = int(rng.integers(len(draws)))
        state = draws.state(draw_index)
        cell_model = interpolate_to_cells(state, draws.site_xy, field.xy, rng)
        z = np.stack([ar1_latent(n_days, copula.phi, substream(seed, 'replicate', r, 1 + c))
                      for c in range(n_cells)], axis=1)
        tau = clamp_tau(ndtr(z)).ravel()

        kth_by_name = {}
        for spec in specs:
            C = scenario_concentrations(field, state.alpha, spec.eta)
            summary = summaries[spec.name]
            summary.negative_share = max(summary.negative_share, negative_fraction(C))
            y = conditional_quantile(tau, cell_model.resolve(C.ravel(), cell_rows))
            y = y.reshape(n_days, n_cells)
            kth = kth_largest(y, k, axis=0)
            summary.add(kth, y.max(axis=0), draw_index)
            kth_by_name[spec.name] = kth
        for name, diff in differences.items():
            diff.add(kth_by_name[name], kth_by_name[baseline])

        if verbose and (r + 1) % max(1, R // 10) == 0:
            print(f"   replicate {r + 1}/{R}")

    if verbose:
        for summary in summaries.values():
            if summary.negative_share > 0:
                print(f"⚠️  {summary.name}: up to {100 * summary.negative_share:.2f}% of "
                      f"reduced-form values were negative (kept as is)")
    return ScenarioRun(summaries, differences)


def run_scenario(spec, draws, field, copula, seed, keep_draws=False, verbose=False):
    """
    Simulate a single scenario

    Returns:
        ReplicateSummary
    """
    run = run_scenario_set([spec], draws, field, copula, seed,
                           keep_draws=keep_draws, verbose=verbose)
    return run.summaries[spec.name]
