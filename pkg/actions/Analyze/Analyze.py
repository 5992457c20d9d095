"""
Analyze - Scores a crowd judgment log against ground truth.

    analyze --judgments <csv> --truth <csv> [--machine <csv>] [--q 0.05] [--column-map <json>] --out <json>
"""
import argparse
import json
import logging
from typing import Dict, Optional

from actions.ActionBase import ActionBase
from internal.JudgmentLog import build_report, parse_judgments, parse_machine_predictions, parse_truth

logger = logging.getLogger(__name__)


def parse_column_map(value: Optional[str]) -> Optional[Dict[str, str]]:
    """Inline JSON object, or a path to one."""
    if not value:
        return None
    text = value
    if not value.lstrip().startswith("{"):
        with open(value, "r", encoding="utf-8") as handle:
            text = handle.read()
    mapping = json.loads(text)
    if not isinstance(mapping, dict) or not all(isinstance(v, str) for v in mapping.values()):
        raise ValueError("--column-map must be a JSON object of column names")
    return mapping


class Analyze(ActionBase):
    """Action for the `analyze` subcommand."""

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--judgments", required=True, help=self._lm("options.judgments"))
        parser.add_argument("--truth", required=True, help=self._lm("options.truth"))
        parser.add_argument("--machine", help=self._lm("options.machine"))
        parser.add_argument("--q", type=float, default=0.05, help=self._lm("options.q"))
        parser.add_argument("--column-map", dest="column_map", help=self._lm("options.column_map"))
        parser.add_argument("--out", required=True, help=self._lm("options.out"))

    def execute(self, args: argparse.Namespace) -> None:
        judgments = parse_judgments(args.judgments, parse_column_map(args.column_map))
        truths = parse_truth(args.truth)
        machine = parse_machine_predictions(args.machine) if args.machine else None
        report = build_report(judgments, truths, machine=machine, q=args.q)
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2, sort_keys=True)
        logger.info(self._lm("report.written", path=args.out))
