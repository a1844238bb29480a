"""
Error hierarchy with stable, machine-readable codes.

Every error raised by the library derives from LatticeAssocError. The CLI
serializes `to_dict()` to stderr and exits with `exit_code`.
"""
from typing import Any, Dict, Optional


class LatticeAssocError(Exception):
    """Base error. Subclasses pin a stable `code`."""

    code: str = 'lattice_assoc_error'
    exit_code: int = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dict for the CLI error record."""
        return {
            'error': self.code,
            'message': self.message,
            'details': self.details
        }


# --- Input data ---

class ParseError(LatticeAssocError):
    code = 'parse_error'
    exit_code = 3


class DuplicateId(LatticeAssocError):
    code = 'duplicate_id'
    exit_code = 3


class MissingId(LatticeAssocError):
    code = 'missing_id'
    exit_code = 3


class MissingSite(LatticeAssocError):
    code = 'missing_site'
    exit_code = 3


class UnknownSite(LatticeAssocError):
    code = 'unknown_site'
    exit_code = 3


class NonNumericValue(LatticeAssocError):
    code = 'non_numeric_value'
    exit_code = 3


class UnknownVariable(LatticeAssocError):
    code = 'unknown_variable'
    exit_code = 3


class MissingGeometry(LatticeAssocError):
    code = 'missing_geometry'
    exit_code = 3


# --- Configuration ---

class ConfigError(LatticeAssocError):
    code = 'config_error'
    exit_code = 4


class InvalidSpec(LatticeAssocError):
    code = 'invalid_spec'
    exit_code = 4


# --- Numerics ---

class LengthMismatch(LatticeAssocError):
    code = 'length_mismatch'
    exit_code = 5


class DegenerateLattice(LatticeAssocError):
    code = 'degenerate_lattice'
    exit_code = 5


class EmptyWeights(LatticeAssocError):
    code = 'empty_weights'
    exit_code = 5


class ZeroVariance(LatticeAssocError):
    code = 'zero_variance'
    exit_code = 5


class RankDeficient(LatticeAssocError):
    code = 'rank_deficient'
    exit_code = 5


class DegenerateConditioning(LatticeAssocError):
    code = 'degenerate_conditioning'
    exit_code = 5


class SingularSystem(LatticeAssocError):
    code = 'singular_system'
    exit_code = 5
