"""Binary classification label with the aliases used across data sources."""

from __future__ import annotations

import enum
import re


class ClassificationLabel(enum.Enum):
    """Normal (alias "legit") vs Malicious (alias "ransomware")."""

    NORMAL = "Normal"
    MALICIOUS = "Malicious"

    @classmethod
    def parse(cls, text: str) -> "ClassificationLabel":
        token = text.strip().casefold()
        if token in ("normal", "legit", "legitimate", "benign"):
            return cls.NORMAL
        if token in ("malicious", "ransomware", "attack"):
            return cls.MALICIOUS
        raise ValueError(f"unrecognized label {text!r}")


# Token scan is word-bounded so e.g. "abnormal" does not match "normal".
_LABEL_TOKEN = re.compile(r"\b(normal|legit|malicious|ransomware)\b", re.IGNORECASE)


def find_label_token(text: str) -> ClassificationLabel | None:
    """First canonical label token in ``text``, scanning left to right,
    case-insensitively. None when no token occurs (fail closed upstream)."""
    match = _LABEL_TOKEN.search(text)
    if match is None:
        return None
    return ClassificationLabel.parse(match.group(1))
