"""
Control Scenarios
Named emission-control strategies: a fractional change per reduced-form
input plus the replicate and summary settings used to evaluate it
"""

from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import yaml

from src.errors import InputError


@dataclass
class ScenarioSpec:
    name: str
    eta: np.ndarray
    replicates: int = 10000
    thresholds: list = dc_field(default_factory=lambda: [75.0])
    k: int = 4
    description: str = ''

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float).ravel()
        self.thresholds = [float(c) for c in self.thresholds]
        if not self.name:
            raise InputError("scenario needs a name")
        if np.any(~np.isfinite(self.eta)) or np.any(self.eta <= -1.0):
            raise InputError(f"scenario '{self.name}': every eta must be > -1")
        if int(self.replicates) < 1:
            raise InputError(f"scenario '{self.name}': replicates must be >= 1")
        if int(self.k) < 1:
            raise InputError(f"scenario '{self.name}': order statistic k must be >= 1")
        self.replicates = int(self.replicates)
        self.k = int(self.k)

    @classmethod
    def from_dict(cls, data):
        """
        Build from a parsed scenario file

        Args:
            data: Dictionary with name, eta and optional replicates,
                thresholds, k, description

        Returns:
            ScenarioSpec
        """
        unknown = set(data) - {'name', 'eta', 'replicates', 'thresholds', 'k', 'description'}
        if unknown:
            raise InputError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
        if 'name' not in data or 'eta' not in data:
            raise InputError("scenario files need 'name' and 'eta'")
        kwargs = {key: data[key] for key in data}
        return cls(**kwargs)

    def to_dict(self):
        return {
            'name': self.name,
            'description': self.description,
            'eta': [float(v) for v in self.eta],
            'replicates': self.replicates,
            'thresholds': list(self.thresholds),
            'k': self.k,
        }

    @staticmethod
    def parse(text, **overrides):
        """
        Parse an inline scenario such as "s1=-0.5,0,0,0,0,0"

        Args:
            text: "<name>=<eta_1>,...,<eta_d>"
            **overrides: replicates / thresholds / k

        Returns:
            ScenarioSpec
        """
        if '=' not in text:
            raise InputError(f"expected NAME=eta1,eta2,... got '{text}'")
        name, values = text.split('=', 1)
        try:
            eta = [float(v) for v in values.split(',') if v.strip()]
        except ValueError as e:
            raise InputError(f"bad eta list in '{text}': {e}") from e
        return ScenarioSpec(name.strip(), eta, **overrides)

    @staticmethod
    def load_from_file(scenario_path):
        """
        Load a scenario from a YAML file

        Args:
            scenario_path: Path to scenario YAML

        Returns:
            ScenarioSpec
        """
        scenario_file = Path(scenario_path)
        if not scenario_file.exists():
            raise FileNotFoundError(f"Scenario file not found: {scenario_path}")

        with open(scenario_file, 'r') as f:
            data = yaml.safe_load(f) or {}

        return ScenarioSpec.from_dict(data)

    @staticmethod
    def list_available(scenarios_dir='data/scenarios'):
        """
        List all scenario files in a directory

        Args:
            scenarios_dir: Directory containing scenario YAML files

        Returns:
            list: (path, ScenarioSpec) tuples sorted by file name
        """
        scenarios_path = Path(scenarios_dir)
        if not scenarios_path.exists():
            return []

        available = []
        for scenario_file in sorted(scenarios_path.glob('*.yaml')):
            try:
                available.append((scenario_file, ScenarioSpec.load_from_file(scenario_file)))
            except (InputError, yaml.YAMLError) as e:
                print(f"⚠️  Couldn't load {scenario_file.name}: {e}")

        return available
