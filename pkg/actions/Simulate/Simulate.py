"""
Simulate - Runs one experiment over the task designs of a config.

    simulate --config <json> --seed <u64> [--trials N] [--designs a,b] [--threads N] --out <csv>
"""
import argparse
import dataclasses
import logging
from typing import List

from actions.ActionBase import ActionBase
from internal.CoreModel import SimulationConfig, TaskDesign, load_config, require_valid
from internal.SimulationManager import SimulationManager

logger = logging.getLogger(__name__)

ALL_DESIGNS = ",".join(d.value for d in TaskDesign)


def parse_designs(value: str) -> List[TaskDesign]:
    """Comma separated design names; duplicates collapse."""
    names = [part for part in value.split(",") if part.strip()]
    if not names:
        raise ValueError("--designs names no task design")
    return sorted({TaskDesign.parse(name) for name in names}, key=lambda d: d.code)


class Simulate(ActionBase):
    """Action for the `simulate` subcommand."""

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--config", required=True, help=self._lm("options.config"))
        parser.add_argument("--seed", required=True, type=int, help=self._lm("options.seed"))
        parser.add_argument("--trials", type=int, help=self._lm("options.trials"))
        parser.add_argument("--designs", default=ALL_DESIGNS, help=self._lm("options.designs"))
        parser.add_argument("--threads", type=int, default=1, help=self._lm("options.threads"))
        parser.add_argument("--out", required=True, help=self._lm("options.out"))

    def _config(self, args: argparse.Namespace) -> SimulationConfig:
        """Config file with the command-line seed and trial count applied."""
        seed = self._check_seed(args.seed)
        trials = self._check_positive("errors.trials", args.trials)
        config = load_config(args.config)
        overrides = {"seed": seed}
        if trials is not None:
            overrides["trials"] = trials
        return require_valid(dataclasses.replace(config, **overrides))

    def execute(self, args: argparse.Namespace) -> None:
        threads = self._check_positive("errors.threads", args.threads)
        designs = parse_designs(args.designs)
        config = self._config(args)
        manager = SimulationManager(threads=threads)
        results = manager.run_experiment(config, designs)
        manager.write_results_csv(results, args.out)
