"""Certified enclosures and rounding-error bounds for arithmetic expressions.

Typical use goes through :func:`prove_script`, which parses a script,
proves every goal and can emit a certificate that :func:`check_text`
validates without the prover.
"""

from .checker import Report, check, check_text
from .certificate import Certificate, emit, parse_certificate, serialize, widen
from .dyadic import Dyadic
from .engine import Config, EmptyGoalError
from .interval import Interval
from .parser import ParseError, parse
from .session import Result, certificate_text, prove_script, render_report

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "Config",
    "Dyadic",
    "EmptyGoalError",
    "Interval",
    "ParseError",
    "Report",
    "Result",
    "certificate_text",
    "check",
    "check_text",
    "emit",
    "parse",
    "parse_certificate",
    "prove_script",
    "render_report",
    "serialize",
    "widen",
]
