"""
LocaleManager - Looks up user-facing messages in locales/<language>.json.
"""
import json
import logging
import os
from typing import Dict, Optional

logger = logging.getLogger(__name__)

LOCALES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "locales")
DEFAULT_LANGUAGE = "en_US"


class LocaleManager:
    """Message catalogue for one language; unknown keys come back unchanged."""

    def __init__(self, language: str = DEFAULT_LANGUAGE, locales_dir: Optional[str] = None):
        self.language = language
        self._messages: Dict[str, str] = {}
        path = os.path.join(locales_dir or LOCALES_DIR, f"{language}.json")
        try:
            with open(path, "r", encoding="utf-8") as handle:
                self._messages = json.load(handle)
        except (OSError, ValueError) as e:
            logger.warning(f"Could not load locale {language} from {path}: {e}")

    def get(self, key: str, **values) -> str:
        """
        Message for `key`, formatted with `values`.

        Args:
            key: Catalogue key, e.g. "errors.io".
            values: Named placeholders in the message.

        Returns:
            The formatted message, or the key itself when it is not catalogued.
        """
        message = self._messages.get(key, key)
        if values:
            try:
                return message.format(**values)
            except (KeyError, IndexError, ValueError):
                return message
        return message
