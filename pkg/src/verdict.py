"""
Verdict records shared by every decision procedure.
"""

from dataclasses import dataclass, field
from typing import Any, Dict

from src.errors import _plain


@dataclass
class Verdict:
    """Outcome of a decision procedure with its witness"""
    holds: bool
    witness: Dict[str, Any] = field(default_factory=dict)
    detail: str = ''

    def __bool__(self) -> bool:
        return bool(self.holds)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'holds': bool(self.holds),
            'witness': {k: _plain(v) for k, v in self.witness.items()},
            'detail': self.detail,
        }


def passed(detail: str = '', **witness: Any) -> Verdict:
    return Verdict(True, dict(witness), detail)


def failed(detail: str = '', **witness: Any) -> Verdict:
    return Verdict(False, dict(witness), detail)
