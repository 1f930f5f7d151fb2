"""
Stage-One Likelihood
Sum of conditional log densities of monitor values given reduced-form output,
plus the cached evaluation context the sampler works against
"""

import numpy as np

from rfm import evaluate_rfm_at
from tail import conditional_log_density


def record_log_density(model, C, sites, y):
    """
    Per-record log density; non-finite or NaN terms become -inf

    Args:
        model: ConditionalModelParams
        C: Reduced-form concentration per record
        sites: Site index per record
        y: Observation per record

    Returns:
        numpy array (n,)
    """
    if len(y) == 0:
        return np.zeros(0)
    with np.errstate(all='ignore'):
        out = conditional_log_density(y, model.resolve(C, sites))
    return np.where(np.isfinite(out), out, -np.inf)


def log_likelihood(state, data, field):
    """
    Stage-one log likelihood of a PosteriorState

    Args:
        state: PosteriorState
        data: MonitorDataset
        field: SensitivityField

    Returns:
        float (-inf when any record has zero density)
    """
    C = evaluate_rfm_at(field, data.day, data.record_cells(field), state.alpha)
    return float(np.sum(record_log_density(state.model, C, data.site, data.y)))


class LikelihoodContext:
    def __init__(self, data, field):
        """
        Cached pieces of the likelihood for one dataset

        Holds the record cells, the current concentrations and per-record
        log densities, and a pending slot for a candidate awaiting accept or
        reject.

        Args:
            data: MonitorDataset
            field: SensitivityField
        """
        self.data = data
        self.field = field
        self.cells = data.record_cells(field)
        self.C = None
        self.record_loglik = None
        self.correlation = None
        self.pending = None

    def concentrations(self, alpha):
        return evaluate_rfm_at(self.field, self.data.day, self.cells, alpha)

    def evaluate(self, model, C=None):
        """Per-record log densities under `model` (current C by default)"""
        if C is None:
            C = self.C
        return record_log_density(model, C, self.data.site, self.data.y)

    def refresh(self, state):
        """Recompute every cached quantity from scratch"""
        self.C = self.concentrations(state.alpha)
        self.record_loglik = self.evaluate(state.model)
        self.pending = None

    def total(self):
        return float(np.sum(self.record_loglik))

    def site_totals(self, record_loglik=None):
        """Log likelihood per site"""
        if record_loglik is None:
            record_loglik = self.record_loglik
        n_sites = self.data.n_sites
        if len(record_loglik) == 0:
            return np.zeros(n_sites)
        return np.bincount(self.data.site, weights=record_loglik, minlength=n_sites)
