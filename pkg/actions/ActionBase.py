"""
ActionBase - Shared plumbing of the command-line actions.

An action declares its flags and does its work in `execute`; `run` turns
whatever the engine raises into a logged message and an exit code.
"""
import argparse
import logging
from dataclasses import dataclass
from typing import Optional, Type

from internal.CoreModel import MAX_SEED
from internal.Errors import CrowdSimError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class ActionBase:
    """Base class for the simulate, sweep and analyze commands."""

    def __init__(self, app):
        self.app = app

    def _lm(self, key: str, **values) -> str:
        """Get localized string with fallback to key."""
        try:
            return self.app.locale_manager.get(key, **values)
        except Exception:
            return key

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        raise NotImplementedError

    def execute(self, args: argparse.Namespace) -> None:
        raise NotImplementedError

    def run(self, args: argparse.Namespace) -> int:
        """Execute and map failures to exit codes: 1 for invalid input, 2 for I/O."""
        try:
            self.execute(args)
        except (CrowdSimError, ValueError) as e:
            logger.error(self._lm("errors.validation", message=e))
            return EXIT_INVALID
        except OSError as e:
            logger.error(self._lm("errors.io", message=e))
            return EXIT_IO
        return EXIT_OK

    # -- shared flag parsing --

    def _check_seed(self, value: int) -> int:
        if not 0 <= value < MAX_SEED:
            raise ValueError(self._lm("errors.seed", value=value))
        return value

    def _check_positive(self, key: str, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError(self._lm(key, value=value))
        return value


@dataclass(frozen=True)
class ActionHolder:
    """Registration record tying a subcommand name to its action class."""

    action_base: Type[ActionBase]
    action_id: str
    action_name: str
    help_key: str
