"""
Posterior State
Full parameter set of the calibrated model, its flat column layout, and
containers/summaries for retained MCMC draws
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
import pandas as pd

from src.errors import InputError
from spatial import GpHyper
from tail import ConditionalModelParams


@dataclass
class PosteriorState:
    """
    One point in parameter space

    gp_mean / gp_variance are (n_processes, M + 1), with rows in the order of
    model.site_process_names(); gp_range is the shared spatial range in km.
    """
    alpha: np.ndarray
    model: ConditionalModelParams
    gp_mean: np.ndarray
    gp_variance: np.ndarray
    gp_range: float

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float).ravel()
        shape = (len(self.process_names), self.model.order + 1)
        self.gp_mean = np.asarray(self.gp_mean, dtype=float).reshape(shape)
        self.gp_variance = np.asarray(self.gp_variance, dtype=float).reshape(shape)
        self.gp_range = float(self.gp_range)

    @property
    def process_names(self):
        return self.model.site_process_names()

    def hyper(self, k, j):
        """GpHyper of coefficient j of process k (index into process_names)"""
        return GpHyper(self.gp_mean[k, j], self.gp_variance[k, j], self.gp_range)

    def hypers(self, k):
        return [self.hyper(k, j) for j in range(self.model.order + 1)]

    def validate(self):
        if np.any(self.alpha <= -1.0):
            raise InputError("alpha components must exceed -1")
        if np.any(self.gp_variance <= 0) or not self.gp_range > 0:
            raise InputError("GP variances and range must be positive")
        if not 0.8 <= self.model.l_thr <= self.model.u_thr <= 1.0:
            raise InputError("threshold bounds need 0.8 <= l <= u <= 1")
        return self

    def copy(self):
        return PosteriorState(self.alpha.copy(), self.model.copy(), self.gp_mean.copy(),
                              self.gp_variance.copy(), self.gp_range)


def parameter_names(state, site_ids, input_names=None):
    """
    Column names of the flat layout, in flatten_state order

    Site coefficients are named '<process>:<site_id>:<j>', global tail
    coefficients 'xi:<j>' and 'd:<j>', GP hypers 'gp_mean:<process>:<j>'
    and 'gp_var:<process>:<j>'.
    """
    d = len(state.alpha)
    if input_names is None:
        input_names = [str(j + 1) for j in range(d)]
    names = [f"alpha:{name}" for name in input_names]
    m1 = state.model.order + 1
    for proc in state.process_names:
        names += [f"{proc}:{sid}:{j}" for sid in site_ids for j in range(m1)]
    if state.model.use_gpd:
        names += [f"xi:{j}" for j in range(m1)]
        names += [f"d:{j}" for j in range(m1)]
        names += ['l_thr', 'u_thr']
    for proc in state.process_names:
        names += [f"gp_mean:{proc}:{j}" for j in range(m1)]
    for proc in state.process_names:
        names += [f"gp_var:{proc}:{j}" for j in range(m1)]
    names.append('gp_range')
    return names


def flatten_state(state):
    parts = [state.alpha]
    for proc in state.process_names:
        parts.append(state.model.process(proc).ravel())
    if state.model.use_gpd:
        parts += [state.model.xi, state.model.d, [state.model.l_thr, state.model.u_thr]]
    parts += [state.gp_mean.ravel(), state.gp_variance.ravel(), [state.gp_range]]
    return np.concatenate([np.asarray(p, dtype=float).ravel() for p in parts])


def unflatten_state(vector, template):
    """
    Rebuild a PosteriorState from a flat vector

    Args:
        vector: Values in flatten_state order
        template: PosteriorState supplying shapes and model settings

    Returns:
        PosteriorState (new object; template is not modified)
    """
    vector = np.asarray(vector, dtype=float).ravel()
    expected = flatten_state(template).shape[0]
    if vector.shape[0] != expected:
        raise InputError(f"flat vector has {vector.shape[0]} values, layout needs {expected}")
    state = template.copy()
    pos = 0

    def take(n):
        nonlocal pos
        out = vector[pos:pos + n]
        pos += n
        return out

    state.alpha = take(len(template.alpha)).copy()
    n_sites, m1 = state.model.n_sites, state.model.order + 1
    for proc in state.process_names:
        state.model.process(proc)[:] = take(n_sites * m1).reshape(n_sites, m1)
    if state.model.use_gpd:
        state.model.xi = take(m1).copy()
        state.model.d = take(m1).copy()
        state.model.l_thr, state.model.u_thr = (float(v) for v in take(2))
    shape = state.gp_mean.shape
    state.gp_mean = take(state.gp_mean.size).reshape(shape).copy()
    state.gp_variance = take(state.gp_variance.size).reshape(shape).copy()
    state.gp_range = float(take(1)[0])
    return state


@dataclass
class PosteriorDraws:
    """Retained draws (one row per draw) plus the geometry needed to use them"""
    values: np.ndarray          # (n_draws, n_params)
    names: list
    template: PosteriorState
    site_ids: np.ndarray
    site_xy: np.ndarray
    input_names: list = dc_field(default_factory=list)

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.shape[1] != len(self.names):
            raise InputError(
                f"draws have {self.values.shape[1]} columns, layout names {len(self.names)}")
        self.site_xy = np.asarray(self.site_xy, dtype=float).reshape(-1, 2)

    def __len__(self):
        return self.values.shape[0]

    def state(self, i):
        return unflatten_state(self.values[i], self.template)

    def mean_state(self):
        """Posterior mean of every parameter, as one state"""
        if len(self) == 0:
            raise InputError("posterior has no draws")
        return unflatten_state(self.values.mean(axis=0), self.template)

    def column(self, name):
        return self.values[:, self.names.index(name)]

    def to_frame(self):
        return pd.DataFrame(self.values, columns=self.names)


def summarize_draws(draws, level=0.95):
    """
    Posterior mean, s.d. and equal-tailed interval per parameter

    Args:
        draws: PosteriorDraws
        level: Interval coverage

    Returns:
        pandas DataFrame with columns parameter, mean, sd, lower, upper
    """
    lo, hi = (1.0 - level) / 2.0, 1.0 - (1.0 - level) / 2.0
    values = draws.values
    return pd.DataFrame({
        'parameter': draws.names,
        'mean': values.mean(axis=0),
        'sd': values.std(axis=0, ddof=1) if len(draws) > 1 else np.zeros(values.shape[1]),
        'lower': np.quantile(values, lo, axis=0),
        'upper': np.quantile(values, hi, axis=0),
    })
