"""
Sweep - Runs an experiment at every point of a parameter grid.

    sweep --grid <json> --config <json> --seed <u64> [--designs a,b] [--threads N] --out <csv>

The grid file maps parameter names (n, selectivity, mu, sigma2, budget,
gamma, beta) to lists of values.
"""
import argparse
import json
import logging

from actions.ActionBase import ActionBase
from actions.Simulate.Simulate import ALL_DESIGNS, Simulate, parse_designs
from internal.Errors import ConfigError
from internal.SimulationManager import SimulationManager, SweepGrid

logger = logging.getLogger(__name__)


def load_grid(path: str) -> SweepGrid:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from None
    return SweepGrid.from_dict(data)


class Sweep(Simulate):
    """Action for the `sweep` subcommand; shares config handling with simulate."""

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--grid", required=True, help=self._lm("options.grid"))
        parser.add_argument("--config", required=True, help=self._lm("options.config"))
        parser.add_argument("--seed", required=True, type=int, help=self._lm("options.seed"))
        parser.add_argument("--trials", type=int, help=self._lm("options.trials"))
        parser.add_argument("--designs", default=ALL_DESIGNS, help=self._lm("options.designs"))
        parser.add_argument("--threads", type=int, default=1, help=self._lm("options.threads"))
        parser.add_argument("--out", required=True, help=self._lm("options.out"))

    def execute(self, args: argparse.Namespace) -> None:
        threads = self._check_positive("errors.threads", args.threads)
        designs = parse_designs(args.designs)
        config = self._config(args)
        grid = load_grid(args.grid)
        logger.info(f"Grid {args.grid} has {grid.cardinality} points")
        manager = SimulationManager(threads=threads)
        results = manager.sweep(grid, config, designs)
        manager.write_results_csv(results, args.out)
