"""
Diagnostic Plot Tool
Renders trace plots, residual pair scatter plots and the tail profile from
the CSV files written by `main.py fit` and `main.py diagnose`
"""

import argparse
import sys
from pathlib import Path

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from dataio import read_yaml  # noqa: E402


class DiagnosticPlotter:
    def __init__(self, run_dir, output_dir=None):
        self.run_dir = Path(run_dir)
        self.output_dir = Path(output_dir) if output_dir else self.run_dir / 'plots'
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _read(self, name):
        path = self.run_dir / name
        if not path.exists():
            print(f"⚠️  {name} not found in {self.run_dir}, skipping")
            return None
        return pd.read_csv(path)

    def _save(self, fig, name):
        path = self.output_dir / name
        fig.savefig(path, dpi=120, bbox_inches='tight')
        plt.close(fig)
        print(f"📁 {path}")
        return path

    def plot_trace(self, burn_in=None):
        """One panel per traced parameter, burn-in shaded"""
        trace = self._read('trace.csv')
        if trace is None:
            return None
        columns = [c for c in trace.columns if c != 'iteration']
        fig, axes = plt.subplots(len(columns), 1, figsize=(9, 1.6 * len(columns)), sharex=True)
        axes = np.atleast_1d(axes)
        for ax, col in zip(axes, columns):
            ax.plot(trace['iteration'], trace[col], lw=0.5, color='tab:blue')
            ax.set_ylabel(col, rotation=0, ha='right', fontsize=8)
            if burn_in:
                ax.axvspan(0, burn_in, color='0.9', zorder=0)
        axes[-1].set_xlabel('iteration')
        return self._save(fig, 'trace.png')

    def plot_residual_pairs(self):
        """Consecutive-day residuals on the normal and the unit-Frechet scale"""
        pairs = self._read('residual_pairs.csv')
        if pairs is None or pairs.empty:
            return None
        fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4.5))
        left.scatter(pairs['z_prev'], pairs['z'], s=4, alpha=0.4)
        left.set_xlabel('z(t-1)')
        left.set_ylabel('z(t)')
        left.set_title('normal scores')

        right.scatter(pairs['frechet_prev'], pairs['frechet'], s=4, alpha=0.4)
        right.set_xscale('log')
        right.set_yscale('log')
        right.set_xlabel('F(t-1)')
        right.set_ylabel('F(t)')
        right.set_title('unit Frechet scale')
        return self._save(fig, 'residual_pairs.png')

    def plot_tail_profile(self):
        """T(C), xi(C) and mean sigma(C)"""
        profile = self._read('tail_profile.csv')
        if profile is None:
            return None
        fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
        for ax, col in zip(axes, ['threshold', 'xi', 'sigma_mean']):
            ax.plot(profile['c_ppb'], profile[col], color='tab:red')
            ax.set_xlabel('reduced-form ozone (ppb)')
            ax.set_title(col)
        return self._save(fig, 'tail_profile.png')

    def run(self):
        print("\n" + "=" * 60)
        print("📊 DIAGNOSTIC PLOTS")
        print("=" * 60)
        burn_in = None
        config_path = self.run_dir / 'run_config.yaml'
        if config_path.exists():
            burn_in = read_yaml(config_path).get('burn_in')
        made = [self.plot_trace(burn_in), self.plot_residual_pairs(), self.plot_tail_profile()]
        made = [m for m in made if m is not None]
        print(f"✅ {len(made)} plot(s) written to {self.output_dir}")
        return made


def main():
    parser = argparse.ArgumentParser(description="Plot fit and residual diagnostics")
    parser.add_argument('run_dir', help="Directory written by main.py fit / diagnose")
    parser.add_argument('--out', help="Plot directory (default: <run_dir>/plots)")
    args = parser.parse_args()

    if not Path(args.run_dir).exists():
        print(f"❌ Error: run directory not found: {args.run_dir}")
        print("   Run main.py fit first.")
        return 2

    DiagnosticPlotter(args.run_dir, args.out).run()
    return 0


if __name__ == "__main__":
    sys.exit(main())
