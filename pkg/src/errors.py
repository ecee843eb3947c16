"""
Workbench Exceptions

Two families:
- InputError: the document or argument is malformed (CLI exit code 2)
- CheckFailure: a computed certificate or theorem check failed (CLI exit code 3)

Every exception carries a `witness` dict naming the offending ids so reports
can reproduce the failure.
"""

from typing import Any, Dict, Optional


class WorkbenchError(Exception):
    """Base class for all workbench errors"""
    exit_code = 1

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.witness = dict(witness or {})

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': type(self).__name__,
            'message': str(self),
            'witness': {k: _plain(v) for k, v in self.witness.items()},
        }


def _plain(value: Any) -> Any:
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (str, bool)) or value is None:
        return value
    if isinstance(value, (int, float)):
        return value
    try:
        return int(value)
    except (TypeError, ValueError):
        return str(value)


class InputError(WorkbenchError, ValueError):
    """Malformed input document or argument"""
    exit_code = 2


class CheckFailure(WorkbenchError, AssertionError):
    """A certificate or theorem check did not hold"""
    exit_code = 3


# Categories
class CategoryFormatError(InputError):
    pass


class EmptyCategory(InputError):
    pass


class MissingComposite(InputError):
    pass


class NonAssociative(InputError):
    pass


class BadIdentity(InputError):
    pass


class BadComposite(InputError):
    pass


class NotCospan(InputError):
    pass


# Orders and lattices
class PosetError(InputError):
    pass


class NotALattice(InputError):
    pass


class NotDistributive(InputError):
    pass


class SizeExceeded(InputError):
    pass


class SpaceError(InputError):
    pass


# Sites
class NotASieve(InputError):
    pass


class WrongCodomain(InputError):
    pass


class TargetMismatch(InputError):
    pass


# Internal lattices
class InternalLatticeError(InputError):
    pass


class NotALocale(InputError):
    pass


class NotFinitary(InputError):
    pass


class NotCartesianBase(InputError):
    pass


class NotPresheafBase(InputError):
    pass


# Ind-objects
class DiagramError(InputError):
    pass


# Check failures
class CriteriaDisagree(CheckFailure):
    pass


class TransitionEscapesFibre(CheckFailure):
    pass


class CertificateFailure(CheckFailure):
    pass


class NoLeftAdjoint(CertificateFailure):
    pass


class BeckChevalleyFails(CertificateFailure):
    pass


class FrobeniusFails(CertificateFailure):
    pass


class NotASheaf(CertificateFailure):
    pass


class TheoremViolation(CheckFailure):
    pass
