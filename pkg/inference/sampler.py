"""
Metropolis-Hastings Sampler
One-at-a-time random-walk updates of the perturbation, tail, site-coefficient,
GP-hyper and threshold-bound parameters, with burn-in-only scale adaptation
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist
from scipy.special import expit, log_expit, logit

from rfm import evaluate_rfm_at
from spatial import ExponentialCorrelation, GpHyperPrior, gp_log_density
from src.errors import InputError, NumericalError
from src.seeding import substream
from tail import ConditionalModelParams, covariate_row

from .likelihood import LikelihoodContext
from .posterior import PosteriorDraws, PosteriorState, flatten_state, parameter_names


@dataclass
class McmcConfig:
    iterations: int = 25000
    burn_in: int = 10000
    target_acceptance: float = 0.4
    seed: int = 0
    adapt_window: int = 50
    initial_sd: float = None      # None: per-block defaults
    alpha_prior_sd: float = 0.5
    hyperprior: GpHyperPrior = dc_field(default_factory=GpHyperPrior)
    thin: int = 1
    progress_every: int = 1000

    def __post_init__(self):
        if self.iterations < 1 or self.burn_in < 0:
            raise InputError("iterations must be >= 1 and burn_in >= 0")
        if self.burn_in >= self.iterations:
            raise InputError(
                f"burn_in ({self.burn_in}) must be smaller than iterations ({self.iterations})")
        if not 0.0 < self.target_acceptance < 1.0:
            raise InputError("target acceptance must lie in (0, 1)")
        if self.adapt_window < 1 or self.thin < 1:
            raise InputError("adapt_window and thin must be >= 1")
        if not self.alpha_prior_sd > 0:
            raise InputError("alpha prior s.d. must be positive")

    @property
    def n_retained(self):
        return -(-(self.iterations - self.burn_in) // self.thin)


class ParameterBlock:
    """
    One scalar parameter updated by a random walk on an unconstrained scale

    Subclasses map the parameter to and from that scale (get/set) and
    supply the log prior (including any Jacobian) and the log likelihood.
    """
    name = 'block'
    initial_sd = 0.1

    def get(self, state):
        raise NotImplementedError

    def set(self, state, value):
        raise NotImplementedError

    def save(self, state):
        return self.get(state)

    def restore(self, state, token):
        self.set(state, token)

    def log_prior(self, state, ctx):
        return 0.0

    def log_likelihood(self, state, ctx, cached):
        return 0.0

    def commit(self, ctx):
        pass

    def discard(self, ctx):
        pass

    def update(self, state, ctx, sd, rng):
        """One update; returns the acceptance fraction (0 or 1 here)"""
        return float(mh_step(self, state, ctx, sd, rng))


def mh_step(block, state, ctx, sd, rng):
    """
    Gaussian random-walk Metropolis-Hastings update of one block

    Args:
        block: ParameterBlock
        state: Mutable parameter state the block reads and writes
        ctx: Likelihood context passed through to the block (may be None)
        sd: Proposal standard deviation on the unconstrained scale (> 0)
        rng: numpy Generator

    Returns:
        bool: True if the candidate was accepted
    """
    if not sd > 0:
        raise InputError(f"proposal s.d. must be positive, got {sd}")
    token = block.save(state)
    current = block.get(state)
    log_current = block.log_prior(state, ctx) + block.log_likelihood(state, ctx, cached=True)

    block.set(state, current + sd * rng.standard_normal())
    log_candidate = block.log_prior(state, ctx)
    if np.isfinite(log_candidate):
        log_candidate += block.log_likelihood(state, ctx, cached=False)

    log_u = np.log(rng.uniform())
    if np.isfinite(log_candidate) and log_u < log_candidate - log_current:
        block.commit(ctx)
        return True
    block.restore(state, token)
    block.discard(ctx)
    return False


class _RecordLikelihoodBlock(ParameterBlock):
    """Block whose change touches every record's density"""

    def candidate_concentrations(self, state, ctx):
        return ctx.C

    def log_likelihood(self, state, ctx, cached):
        if cached:
            return ctx.total()
        C = self.candidate_concentrations(state, ctx)
        loglik = ctx.evaluate(state.model, C)
        ctx.pending = (C, loglik)
        return float(np.sum(loglik))

    def commit(self, ctx):
        ctx.C, ctx.record_loglik = ctx.pending
        ctx.pending = None

    def discard(self, ctx):
        ctx.pending = None


class AlphaBlock(_RecordLikelihoodBlock):
    initial_sd = 0.02

    def __init__(self, j, prior_sd=0.5):
        self.j = j
        self.prior_sd = prior_sd
        self.name = f"alpha:{j + 1}"

    def get(self, state):
        return state.alpha[self.j]

    def set(self, state, value):
        state.alpha[self.j] = value

    def log_prior(self, state, ctx):
        a = state.alpha[self.j]
        if a <= -1.0:
            return -np.inf
        return -0.5 * (a / self.prior_sd) ** 2

    def candidate_concentrations(self, state, ctx):
        return ctx.concentrations(state.alpha)


class GlobalTailBlock(_RecordLikelihoodBlock):
    """Coefficient j of the shape (xi) or threshold-link (d) polynomial"""

    def __init__(self, kind, j, c1=100.0):
        self.kind = kind
        self.j = j
        self.c1 = c1
        self.name = f"{kind}:{j}"
        self.initial_sd = 0.05 if kind == 'xi' else 0.2

    def get(self, state):
        return getattr(state.model, self.kind)[self.j]

    def set(self, state, value):
        getattr(state.model, self.kind)[self.j] = value

    def log_prior(self, state, ctx):
        return -0.5 * (self.get(state) / self.c1) ** 2


def _bound_logits(l_thr, u_thr):
    x = logit(np.clip((l_thr - 0.8) / 0.2, 0.0, 1.0))
    y = logit(np.clip((u_thr - l_thr) / (1.0 - l_thr), 0.0, 1.0)) if l_thr < 1.0 else 0.0
    return x, y


class ThresholdBlock(_RecordLikelihoodBlock):
    """
    Threshold bounds l ~ U(0.8, 1), u | l ~ U(l, 1), walked on
    x = logit((l - 0.8) / 0.2) and y = logit((u - l) / (1 - l))
    """
    initial_sd = 0.3

    def __init__(self, which):
        if which not in ('l_thr', 'u_thr'):
            raise InputError(f"unknown threshold bound '{which}'")
        self.which = which
        self.name = which

    def get(self, state):
        x, y = _bound_logits(state.model.l_thr, state.model.u_thr)
        return x if self.which == 'l_thr' else y

    def set(self, state, value):
        x, y = _bound_logits(state.model.l_thr, state.model.u_thr)
        if self.which == 'l_thr':
            x = value
        else:
            y = value
        l_thr = 0.8 + 0.2 * expit(x)
        state.model.l_thr = float(l_thr)
        state.model.u_thr = float(l_thr + (1.0 - l_thr) * expit(y))

    def save(self, state):
        return state.model.l_thr, state.model.u_thr

    def restore(self, state, token):
        state.model.l_thr, state.model.u_thr = token

    def log_prior(self, state, ctx):
        # uniform priors times the Jacobian of both logit maps
        x, y = _bound_logits(state.model.l_thr, state.model.u_thr)
        if not (np.isfinite(x) and np.isfinite(y)):
            return -np.inf
        return float(log_expit(x) + log_expit(-x) + log_expit(y) + log_expit(-y))


class SiteCoefficientBlock(ParameterBlock):
    """
    Coefficient j of a site-varying process, updated site by site

    Each site gets its own Metropolis step in a fixed order. The candidate
    values of all sites are scored in one vectorized likelihood pass, which
    is exact since a site's likelihood involves only its own coefficients;
    the GP prior ratio uses the conditional quadratic form, kept current as
    sites are accepted.
    """
    initial_sd = 0.05

    def __init__(self, k, proc, j):
        self.k = k
        self.proc = proc
        self.j = j
        self.name = f"{proc}:{j}"

    def update(self, state, ctx, sd, rng):
        values = state.model.process(self.proc)[:, self.j]
        n_sites = values.shape[0]
        current = values.copy()
        candidate = current + sd * rng.standard_normal(n_sites)

        values[:] = candidate
        candidate_loglik = ctx.evaluate(state.model)
        values[:] = current
        site_current = ctx.site_totals()
        site_candidate = ctx.site_totals(candidate_loglik)

        mean = state.gp_mean[self.k, self.j]
        variance = state.gp_variance[self.k, self.j]
        Q = ctx.correlation.precision
        r = Q @ (current - mean)
        log_u = np.log(rng.uniform(size=n_sites))

        accepted = np.zeros(n_sites, dtype=bool)
        for s in range(n_sites):
            if not np.isfinite(site_candidate[s]):
                continue
            step = candidate[s] - values[s]
            log_ratio = (site_candidate[s] - site_current[s]
                         - step * (2.0 * r[s] + Q[s, s] * step) / (2.0 * variance))
            if log_u[s] < log_ratio:
                values[s] = candidate[s]
                r += Q[:, s] * step
                accepted[s] = True

        if accepted.any():
            rows = accepted[ctx.data.site]
            ctx.record_loglik = np.where(rows, candidate_loglik, ctx.record_loglik)
        return float(accepted.mean()) if n_sites else 0.0


def _process_log_density(state, k, j, ctx):
    values = state.model.process(state.process_names[k])[:, j]
    corr = ctx.correlation
    return gp_log_density(values, state.hyper(k, j), corr.sites, corr)


class GpMeanBlock(ParameterBlock):
    initial_sd = 0.1

    def __init__(self, k, proc, j, prior):
        self.k, self.j, self.prior = k, j, prior
        self.name = f"gp_mean:{proc}:{j}"

    def get(self, state):
        return state.gp_mean[self.k, self.j]

    def set(self, state, value):
        state.gp_mean[self.k, self.j] = value

    def log_prior(self, state, ctx):
        return (self.prior.log_prior_mean(state.gp_mean[self.k, self.j])
                + _process_log_density(state, self.k, self.j, ctx))


class GpVarianceBlock(GpMeanBlock):
    """GP variance walked on the log scale"""
    initial_sd = 0.3

    def __init__(self, k, proc, j, prior):
        super().__init__(k, proc, j, prior)
        self.name = f"gp_var:{proc}:{j}"

    def get(self, state):
        return np.log(state.gp_variance[self.k, self.j])

    def set(self, state, value):
        state.gp_variance[self.k, self.j] = np.exp(value)

    def log_prior(self, state, ctx):
        variance = state.gp_variance[self.k, self.j]
        if not 0.0 < variance < np.inf:
            return -np.inf
        return (self.prior.log_prior_variance(variance) + np.log(variance)
                + _process_log_density(state, self.k, self.j, ctx))


class GpRangeBlock(ParameterBlock):
    """Shared spatial range, walked on the log scale"""
    name = 'gp_range'
    initial_sd = 0.2

    def __init__(self, prior):
        self.prior = prior
        self._pending = None

    def get(self, state):
        return np.log(state.gp_range)

    def set(self, state, value):
        state.gp_range = float(np.exp(value))

    def _correlation(self, state, ctx):
        if ctx.correlation.rho == state.gp_range:
            self._pending = ctx.correlation
            return ctx.correlation
        try:
            self._pending = ExponentialCorrelation(ctx.data.site_xy, state.gp_range)
        except (NumericalError, InputError):
            self._pending = None
        return self._pending

    def log_prior(self, state, ctx):
        if not 0.0 < state.gp_range < np.inf:
            return -np.inf
        corr = self._correlation(state, ctx)
        if corr is None:
            return -np.inf
        total = self.prior.log_prior_log_range(np.log(state.gp_range))
        m1 = state.model.order + 1
        for k in range(len(state.process_names)):
            values = state.model.process(state.process_names[k])
            for j in range(m1):
                total += gp_log_density(values[:, j], state.hyper(k, j), corr.sites, corr)
        return total

    def commit(self, ctx):
        ctx.correlation = self._pending
        self._pending = None

    def discard(self, ctx):
        self._pending = None


def build_blocks(state, config):
    """Blocks in scan order: alpha, global tail, site processes, GP hypers, bounds"""
    prior = config.hyperprior
    m1 = state.model.order + 1
    blocks = [AlphaBlock(j, config.alpha_prior_sd) for j in range(len(state.alpha))]
    if state.model.use_gpd:
        blocks += [GlobalTailBlock('xi', j, prior.c1) for j in range(m1)]
        blocks += [GlobalTailBlock('d', j, prior.c1) for j in range(m1)]
    for k, proc in enumerate(state.process_names):
        blocks += [SiteCoefficientBlock(k, proc, j) for j in range(m1)]
    for k, proc in enumerate(state.process_names):
        for j in range(m1):
            blocks += [GpMeanBlock(k, proc, j, prior), GpVarianceBlock(k, proc, j, prior)]
    blocks.append(GpRangeBlock(prior))
    if state.model.use_gpd:
        blocks += [ThresholdBlock('l_thr'), ThresholdBlock('u_thr')]
    return blocks


class MetropolisSampler:
    def __init__(self, blocks, config):
        """
        Fixed-scan sampler with batch Robbins-Monro scale adaptation

        Every adapt_window iterations during burn-in, each block's log proposal
        s.d. moves by (window acceptance - target) / sqrt(batch number). After
        burn-in the scales are frozen.

        Args:
            blocks: List of ParameterBlock, in scan order
            config: McmcConfig
        """
        self.blocks = blocks
        self.config = config
        self.log_sd = np.log([config.initial_sd or b.initial_sd for b in blocks])
        self.accepted_burn_in = np.zeros(len(blocks))
        self.accepted = np.zeros(len(blocks))
        self._window = np.zeros(len(blocks))
        self._batches = 0

    def _adapt(self):
        self._batches += 1
        rate = self._window / self.config.adapt_window
        self.log_sd += (rate - self.config.target_acceptance) / np.sqrt(self._batches)
        self._window[:] = 0.0

    def run(self, state, ctx, rng, on_iteration=None, verbose=False):
        """
        Run config.iterations sweeps over all blocks

        Args:
            state: Mutable state, updated in place
            ctx: Likelihood context (or None for blocks that need none)
            rng: numpy Generator
            on_iteration: Optional callback(iteration, state) after each sweep
            verbose: Print progress every config.progress_every iterations
        """
        cfg = self.config
        for it in range(cfg.iterations):
            burning = it < cfg.burn_in
            for b, block in enumerate(self.blocks):
                rate = block.update(state, ctx, float(np.exp(self.log_sd[b])), rng)
                if burning:
                    self.accepted_burn_in[b] += rate
                    self._window[b] += rate
                else:
                    self.accepted[b] += rate
            if burning and (it + 1) % cfg.adapt_window == 0:
                self._adapt()
            if on_iteration is not None:
                on_iteration(it, state)
            if verbose and cfg.progress_every and (it + 1) % cfg.progress_every == 0:
                phase = "burn-in" if burning else "sampling"
                loglik = f", log-lik {ctx.total():.1f}" if ctx is not None else ""
                print(f"   iteration {it + 1}/{cfg.iterations} ({phase}{loglik})")
        return self

    def acceptance_rates(self):
        n_post = self.config.iterations - self.config.burn_in
        return self.accepted / n_post

    def diagnostics(self):
        """Per-block acceptance rates and final proposal scales"""
        cfg = self.config
        return pd.DataFrame({
            'block': [b.name for b in self.blocks],
            'acceptance_burn_in': (self.accepted_burn_in / cfg.burn_in
                                   if cfg.burn_in else np.full(len(self.blocks), np.nan)),
            'acceptance': self.acceptance_rates(),
            'proposal_sd': np.exp(self.log_sd),
        })


def initial_state(data, field, basis, order, use_gpd=True):
    """
    Starting point of the chain

    Per-site least squares of y on the covariates at alpha = 0 gives beta;
    theta intercepts start at the log residual s.d. and sigma at half of it.
    Sites too sparse for their own fit take the pooled fit. GP means and
    variances start at the across-site moments, the range at the median
    inter-site distance.

    Args:
        data: MonitorDataset
        field: SensitivityField
        basis: QuantileBasis
        order: Polynomial order M
        use_gpd: Whether the model carries a GPD tail

    Returns:
        PosteriorState
    """
    m1 = order + 1
    C0 = evaluate_rfm_at(field, data.day, data.record_cells(field), np.zeros(field.n_inputs))
    X = covariate_row(C0, order)
    y = data.y

    if len(y) > m1:
        pooled = np.linalg.lstsq(X, y, rcond=None)[0]
    else:
        pooled = np.r_[np.mean(y) if len(y) else 50.0, np.zeros(order)]
    pooled_sd = np.std(y - X @ pooled) if len(y) > 1 else 10.0

    model = ConditionalModelParams.zeros(basis, order, data.n_sites, use_gpd)
    for s, rows in enumerate(data.site_rows()):
        coef, sd = pooled, pooled_sd
        if len(rows) > m1:
            fit, _, rank, _ = np.linalg.lstsq(X[rows], y[rows], rcond=None)
            if rank == m1:
                coef = fit
                sd = np.std(y[rows] - X[rows] @ fit, ddof=m1)
        sd = max(sd, 0.5)
        model.beta[s] = coef
        model.theta[s, :, 0] = np.log(sd)
        model.sigma[s, 0] = np.log(sd / 2.0)

    names = model.site_process_names()
    processes = np.stack([model.process(p) for p in names])       # (K, n_sites, M+1)
    gp_mean = processes.mean(axis=1)
    gp_variance = np.maximum(processes.var(axis=1), 0.01)
    distances = pdist(data.site_xy)
    positive = distances[distances > 0]
    gp_range = float(np.median(positive)) if positive.size else 1.0
    return PosteriorState(np.zeros(field.n_inputs), model, gp_mean, gp_variance, gp_range)


def _trace_columns(state, site_ids, input_names):
    cols = [f"alpha:{name}" for name in input_names]
    if state.model.use_gpd:
        cols += ['xi:0', 'l_thr', 'u_thr']
    cols += ['gp_range']
    if len(site_ids):
        cols += [f"beta:{site_ids[0]}:0"]
    return cols


def _trace_row(state):
    row = list(state.alpha)
    if state.model.use_gpd:
        row += [state.model.xi[0], state.model.l_thr, state.model.u_thr]
    row.append(state.gp_range)
    if state.model.n_sites:
        row.append(state.model.beta[0, 0])
    return row


@dataclass
class ChainResult:
    draws: PosteriorDraws
    diagnostics: pd.DataFrame
    trace: pd.DataFrame
    initial: PosteriorState


def run_chain(config, data, field, basis, order, use_gpd=True, start=None, verbose=False):
    """
    Stage-one posterior sampling

    Args:
        config: McmcConfig
        data: MonitorDataset
        field: SensitivityField
        basis: QuantileBasis
        order: Polynomial order M
        use_gpd: Fit the GPD tail (False gives the body-only model)
        start: Optional PosteriorState to start from
        verbose: Print progress

    Returns:
        ChainResult with (iterations - burn_in) / thin retained draws
    """
    ctx = LikelihoodContext(data, field)
    state = (start.copy() if start is not None
             else initial_state(data, field, basis, order, use_gpd)).validate()
    ctx.refresh(state)
    ctx.correlation = ExponentialCorrelation(data.site_xy, state.gp_range)

    bad = ~np.isfinite(ctx.record_loglik)
    if np.any(bad) or not np.isfinite(ctx.total()):
        first = int(np.argmax(bad)) if np.any(bad) else 0
        raise NumericalError(
            f"log likelihood is not finite at the starting point: {int(bad.sum())} record(s) "
            f"with zero density, first at day {data.day[first]}, "
            f"site {data.site_ids[data.site[first]]}, y={data.y[first]:.3f}")

    blocks = build_blocks(state, config)
    sampler = MetropolisSampler(blocks, config)
    input_names = list(field.input_names)
    names = parameter_names(state, data.site_ids, input_names)
    retained = np.empty((config.n_retained, len(names)))
    trace_cols = _trace_columns(state, data.site_ids, input_names)
    trace = np.empty((config.iterations, len(trace_cols) + 1))

    if verbose:
        print(f"🔗 Sampling {config.iterations} iterations ({config.burn_in} burn-in), "
              f"{len(blocks)} blocks, {len(names)} parameters")

    def record(it, current):
        trace[it, 0] = ctx.total()
        trace[it, 1:] = _trace_row(current)
        offset = it - config.burn_in
        if offset >= 0 and offset % config.thin == 0:
            retained[offset // config.thin] = flatten_state(current)

    initial = state.copy()
    sampler.run(state, ctx, substream(config.seed, 'chain'), on_iteration=record, verbose=verbose)

    trace_frame = pd.DataFrame(trace, columns=['log_lik'] + trace_cols)
    trace_frame.insert(0, 'iteration', np.arange(1, config.iterations + 1))
    draws = PosteriorDraws(retained, names, state.copy(), data.site_ids, data.site_xy, input_names)

    if verbose:
        rates = sampler.acceptance_rates()
        print(f"✅ Chain finished: acceptance {rates.min():.2f}..{rates.max():.2f} "
              f"across blocks")
    return ChainResult(draws, sampler.diagnostics(), trace_frame, initial)
