"""Exception types shared across modules; the CLI maps them to exit codes."""

from __future__ import annotations


class ProperAffineError(Exception):
    exit_code = 1


class BadInput(ProperAffineError, ValueError):
    """Malformed or unsupported input (exit code 2)."""

    exit_code = 2


class NotApplicable(ProperAffineError):
    """Preconditions of an operation are not met (exit code 3)."""

    exit_code = 3


class PropertyViolation(ProperAffineError):
    """A checked mathematical property failed (exit code 1)."""

    exit_code = 1


class WeylGroupTooLarge(ProperAffineError):
    exit_code = 2

    def __init__(self, count: int, cap: int):
        super().__init__(f"Weyl group too large: more than {cap} elements ({count} found so far)")
        self.count = count
        self.cap = cap


class LemmaViolated(PropertyViolation):
    """No departure pair exists for some simple root; indicates a bug upstream."""


class NearDegenerate(ProperAffineError):
    """Eigenvalue clusters do not match the pattern predicted by the weights."""

    exit_code = 1
