"""
ozonetail command line

    python main.py gen-synth --seed 7 --sites 20 --days 30 --out data/synthetic
    python main.py fit --config data/config/ci_scale.yaml --out runs/ci
    python main.py predict --posterior runs/ci --eta "s1=-0.5,0,0,0,0,0"
    python main.py score --config data/config/ci_scale.yaml --out runs/ci_scores
    python main.py diagnose --posterior runs/ci --out runs/ci
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from dataio import (
    COPULA_FILE,
    MANIFEST_FILE,
    SyntheticSettings,
    atomic_directory,
    generate_synthetic,
    load_config,
    load_monitors,
    load_sensitivity,
    model_label,
    parse_model_label,
    read_copula,
    read_posterior,
    write_copula,
    write_csv,
    write_posterior,
    write_synthetic,
    write_yaml,
)
from inference import fit_copula, lag_pairs, residual_table, run_chain, summarize_draws
from predict import ScenarioSpec, run_scenario_set
from scoring import cmaq_baseline, score_model, score_table, slr_baseline, split_train_test
from src.errors import EXIT_OK, DataError, InputError, OzoneTailError, exit_code_for
from tail import QuantileBasis, tail_profile


def banner(title):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def load_inputs(config, verbose=True):
    """Sensitivity field and monitor data named by a run config, linked"""
    config.require_files('sensitivity', 'monitors')
    field = load_sensitivity(config.sensitivity, verbose=verbose)
    data = load_monitors(config.monitors, verbose=verbose)
    data.link(field)
    return field, data


def fit_model(config, data, field, L, M, use_gpd, verbose=True):
    """One MCMC run plus the copula fit on its posterior mean"""
    chain = run_chain(config.mcmc(), data, field, QuantileBasis(L), M,
                      use_gpd=use_gpd, verbose=verbose)
    copula = fit_copula(chain.draws.mean_state(), data, field, verbose=verbose)
    return chain, copula


# ---------------------------------------------------------------- commands

def cmd_gen_synth(args, config):
    banner("🧪 SYNTHETIC DATA")
    settings = SyntheticSettings.from_config(config)
    field, data, truth = generate_synthetic(settings, config.seed, verbose=True)
    out = write_synthetic(args.out, field, data, truth)
    print(f"📁 Wrote sensitivity.csv, sensitivity_thinned.csv, monitors.csv and truth to {out}")
    return EXIT_OK


def cmd_fit(args, config):
    banner(f"🔗 FIT {model_label(config.basis_functions, config.poly_order, config.use_gpd)}")
    field, data = load_inputs(config)
    chain, copula = fit_model(config, data, field, config.basis_functions,
                              config.poly_order, config.use_gpd)

    out = Path(config.output_dir)
    summary = summarize_draws(chain.draws)
    with atomic_directory(out, last=(MANIFEST_FILE,)) as stage:
        write_posterior(chain.draws, stage)
        write_csv(chain.diagnostics, stage / 'diagnostics.csv')
        write_csv(chain.trace, stage / 'trace.csv')
        write_csv(summary, stage / 'posterior_summary.csv')
        write_copula(copula, stage / COPULA_FILE)
        write_yaml(config.to_dict(), stage / 'run_config.yaml')

    banner("📊 CALIBRATED PERTURBATION")
    for row in summary[summary['parameter'].str.startswith('alpha:')].itertuples():
        print(f"  {row.parameter:<20} {row.mean:+.3f}  95% [{row.lower:+.3f}, {row.upper:+.3f}]")
    if copula.independent_fallback:
        print("⚠️  Copula fell back to independent days")
    print(f"\n✅ {len(chain.draws)} posterior draws written to {out}")
    return EXIT_OK


def _scenarios(args, config):
    overrides = {'replicates': config.replicates, 'k': config.order_statistic,
                 'thresholds': config.exceed_thresholds}
    specs = [ScenarioSpec.parse(text, **overrides) for text in args.eta or []]
    paths = args.scenario or ([] if specs else config.scenarios)
    for path in paths:
        spec = ScenarioSpec.load_from_file(path)
        for key, value in overrides.items():
            setattr(spec, key, value)
        specs.append(ScenarioSpec.from_dict(spec.to_dict()))
    if not specs:
        raise InputError("no scenarios given (use --eta or --scenario)")
    return specs


def cmd_predict(args, config):
    banner("🎲 SCENARIO PREDICTION")
    posterior_dir = Path(args.posterior or config.output_dir)
    config.require_files('prediction_grid')
    draws = read_posterior(posterior_dir, verbose=True)
    copula = read_copula(posterior_dir / COPULA_FILE)
    field = load_sensitivity(config.prediction_grid, verbose=True)
    if field.n_inputs != len(draws.input_names):
        raise InputError(f"prediction grid has {field.n_inputs} inputs, "
                         f"posterior has {len(draws.input_names)}")

    specs = _scenarios(args, config)
    run = run_scenario_set(specs, draws, field, copula, config.seed, baseline=args.baseline,
                           keep_draws=config.keep_draws, verbose=True)

    out = Path(args.out or posterior_dir)
    for name, summary in run.summaries.items():
        path = write_csv(summary.to_frame(), out / f"scenario_{name}.csv")
        print(f"📁 {path}")
        if config.keep_draws:
            write_csv(pd.DataFrame(np.asarray(summary.kth_draws), columns=field.cell_ids),
                      out / f"scenario_{name}_kth_draws.csv")
    for name, diff in run.differences.items():
        path = write_csv(diff.to_frame(field.cell_ids, field.xy),
                         out / f"difference_{name}_vs_{diff.baseline}.csv")
        print(f"📁 {path}")
    print(f"\n✅ {len(specs)} scenario(s), {specs[0].replicates} replicate(s) each")
    return EXIT_OK


def cmd_score(args, config):
    banner("📊 HOLDOUT SCORES")
    field, data = load_inputs(config)
    train, test = split_train_test(data, config.train_fraction, config.seed)
    print(f"Split: {len(train)} training / {len(test)} test records")

    levels, thresholds = config.score_levels, config.score_thresholds
    reports = []
    for label in config.model_grid:
        L, M, use_gpd = parse_model_label(label)
        banner(f"🔗 {label}")
        chain = run_chain(config.mcmc(), train, field, QuantileBasis(L), M,
                          use_gpd=use_gpd, verbose=True)
        reports.append(score_model(chain.draws.mean_state(), test, field,
                                   levels, thresholds, label=label))
    reports.append(slr_baseline(train, test, field, levels, thresholds))
    reports.append(cmaq_baseline(test, field, levels, thresholds))

    for report in reports:
        for flag in report.flags:
            print(f"⚠️  {report.label}: {flag}")
    table = score_table(reports)
    path = write_csv(table, Path(config.output_dir) / 'scores.csv', index=True)

    banner("📊 SCORES (lower is better)")
    print(table.to_string(float_format=lambda v: f"{v:.3f}"))
    print(f"\n📁 {path}")
    return EXIT_OK


def cmd_diagnose(args, config):
    banner("🔍 RESIDUAL DIAGNOSTICS")
    posterior_dir = Path(args.posterior or config.output_dir)
    field, data = load_inputs(config)
    draws = read_posterior(posterior_dir, verbose=True)
    if list(draws.site_ids) != list(data.site_ids):
        raise DataError("monitor sites do not match the sites the posterior was fitted on")
    state = draws.mean_state()

    residuals = residual_table(state, data, field)
    pairs = lag_pairs(residuals)
    profile = pd.DataFrame(tail_profile(state.model, np.arange(20.0, 120.5, 2.5)))

    out = Path(args.out or posterior_dir)
    write_csv(residuals, out / 'residuals.csv')
    write_csv(pairs, out / 'residual_pairs.csv')
    write_csv(profile, out / 'tail_profile.csv')

    if len(pairs) > 1:
        r = np.corrcoef(pairs['z_prev'], pairs['z'])[0, 1]
        print(f"📊 Lag-1 normal-score correlation {r:.3f} over {len(pairs)} pairs")
    print(f"✅ Diagnostics written to {out}")
    return EXIT_OK


COMMANDS = {
    'gen-synth': cmd_gen_synth,
    'fit': cmd_fit,
    'predict': cmd_predict,
    'score': cmd_score,
    'diagnose': cmd_diagnose,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog='ozonetail',
        description="Calibrate a reduced-form ozone model with GPD-tailed quantile "
                    "regression and simulate control scenarios")
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p):
        p.add_argument('--config', help="Flat YAML run config")
        p.add_argument('--seed', type=int, help="Master seed")
        return p

    p = common(sub.add_parser('gen-synth', help="Generate a synthetic dataset"))
    p.add_argument('--out', default='data/synthetic', help="Output directory")
    p.add_argument('--sites', type=int, dest='n_sites')
    p.add_argument('--days', type=int, dest='n_days')
    p.add_argument('--inputs', type=int, dest='n_inputs')
    p.add_argument('--grid', type=int, help="Cells per grid side")
    p.add_argument('--xi', type=float, dest='true_xi', help="Tail shape of the truth")

    def model_flags(p):
        p.add_argument('--sensitivity')
        p.add_argument('--monitors')
        p.add_argument('--iterations', type=int)
        p.add_argument('--burn-in', type=int, dest='burn_in')
        return p

    p = model_flags(common(sub.add_parser('fit', help="Run the MCMC calibration")))
    p.add_argument('--out', dest='output_dir')
    p.add_argument('--basis', type=int, dest='basis_functions', help="L")
    p.add_argument('--order', type=int, dest='poly_order', help="M")
    p.add_argument('--no-gpd', action='store_const', const=False, dest='use_gpd')

    p = common(sub.add_parser('predict', help="Simulate control scenarios"))
    p.add_argument('--posterior', help="Fit output directory")
    p.add_argument('--grid', dest='prediction_grid', help="Sensitivity CSV of the prediction grid")
    p.add_argument('--eta', action='append', help="Inline scenario NAME=eta1,...,eta_d")
    p.add_argument('--scenario', action='append', help="Scenario YAML file")
    p.add_argument('--baseline', help="Scenario others are differenced against")
    p.add_argument('--replicates', type=int)
    p.add_argument('--k', type=int, dest='order_statistic')
    p.add_argument('--out')

    p = model_flags(common(sub.add_parser('score', help="Holdout comparison of models")))
    p.add_argument('--out', dest='output_dir')
    p.add_argument('--models', help="Comma-separated labels such as L1_M1_NoGPD,L4_M2_GPD")
    p.add_argument('--train-fraction', type=float, dest='train_fraction')

    p = common(sub.add_parser('diagnose', help="Residual pairs and tail profile"))
    p.add_argument('--posterior', help="Fit output directory")
    p.add_argument('--sensitivity')
    p.add_argument('--monitors')
    p.add_argument('--out')
    return parser


_OVERRIDE_KEYS = ('seed', 'n_sites', 'n_days', 'n_inputs', 'true_xi', 'sensitivity', 'monitors',
                  'iterations', 'burn_in', 'output_dir', 'basis_functions', 'poly_order',
                  'use_gpd', 'prediction_grid', 'replicates', 'order_statistic',
                  'train_fraction')


def config_from_args(args):
    overrides = {k: getattr(args, k) for k in _OVERRIDE_KEYS if hasattr(args, k)}
    if getattr(args, 'grid', None) is not None and args.command == 'gen-synth':
        overrides['grid_nx'] = overrides['grid_ny'] = args.grid
    if getattr(args, 'models', None):
        overrides['model_grid'] = [m.strip() for m in args.models.split(',') if m.strip()]
    return load_config(args.config, overrides)


def cli_dispatch(argv=None):
    """
    Parse arguments, run one command and map failures to exit codes

    Returns:
        0 on success, 2 usage error, 3 data error, 4 numerical failure
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = config_from_args(args)
        return COMMANDS[args.command](args, config)
    except (OzoneTailError, FileNotFoundError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(cli_dispatch())
