"""
Entry point of the crowd classification simulator.

    python main.py simulate --config cfg.json --seed 7 --out results.csv
    python main.py sweep --grid grid.json --config cfg.json --seed 7 --out sweep.csv
    python main.py analyze --judgments log.csv --truth truth.csv --out report.json
"""
import argparse
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

from actions.ActionBase import EXIT_INVALID, ActionHolder
from actions.Analyze import Analyze
from actions.Simulate import Simulate
from actions.Sweep import Sweep
from internal.LocaleManager import LocaleManager

logger = logging.getLogger(__name__)

PATH = os.path.dirname(os.path.abspath(__file__))


class UsageError(Exception):
    """Raised by the parser instead of exiting the interpreter."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class CrowdSimApp:
    def __init__(self):
        self.manifest = self._load_manifest()
        self.locale_manager = LocaleManager()
        self.action_holders: List[ActionHolder] = []

        # Register the three subcommands
        self.add_action_holder(ActionHolder(
            action_base=Simulate,
            action_id="simulate",
            action_name="Simulate",
            help_key="commands.simulate.help",
        ))
        self.add_action_holder(ActionHolder(
            action_base=Sweep,
            action_id="sweep",
            action_name="Sweep",
            help_key="commands.sweep.help",
        ))
        self.add_action_holder(ActionHolder(
            action_base=Analyze,
            action_id="analyze",
            action_name="Analyze",
            help_key="commands.analyze.help",
        ))

    @staticmethod
    def _load_manifest() -> dict:
        try:
            with open(os.path.join(PATH, "manifest.json"), "r", encoding="utf-8") as handle:
                return json.load(handle)
        except (OSError, ValueError):
            return {"name": "crowdsim", "version": "unknown"}

    def add_action_holder(self, holder: ActionHolder) -> None:
        self.action_holders.append(holder)

    def build_parser(self) -> argparse.ArgumentParser:
        parser = _Parser(prog="crowdsim", description=self.locale_manager.get("cli.description"))
        parser.add_argument(
            "--version", action="version", version=f"{self.manifest.get('name')} {self.manifest.get('version')}"
        )
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--verbose", action="store_true", help=self.locale_manager.get("options.verbose"))
        subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)
        subparsers.required = True
        for holder in self.action_holders:
            action = holder.action_base(self)
            sub = subparsers.add_parser(
                holder.action_id, parents=[common], help=self.locale_manager.get(holder.help_key)
            )
            action.add_arguments(sub)
            sub.set_defaults(action=action)
        return parser

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        parser = self.build_parser()
        try:
            args = parser.parse_args(argv)
        except UsageError as e:
            logger.error(self.locale_manager.get("errors.usage", message=e))
            return EXIT_INVALID
        logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.INFO)
        logger.debug(f"Running {args.command} with {vars(args)}")
        return args.action.run(args)


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one subcommand and return its exit code."""
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    return CrowdSimApp().run(argv)


if __name__ == "__main__":
    sys.exit(run_cli())
