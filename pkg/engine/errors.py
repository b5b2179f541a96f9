"""
Error hierarchy
---------------
Domain failures raised by the simulator packages.

Contract violations (bad probability, unknown gate, even distance ...) are
plain ``ValueError`` with a ``❌`` prefixed message.  Everything below is a
failure *of the domain*: a protocol tree whose predicates do not partition
the records, a decoder whose fault classes collide, a schedule that breaks a
trap constraint, or a configuration the CLI must reject.
"""


class QecSimError(Exception):
    """Base class for all simulator-specific failures."""


class PredicateError(QecSimError):
    """No out-edge (or more than one) was satisfied at a branch node."""

    def __init__(self, node_id: str, n_unmatched: int, n_ambiguous: int):
        self.node_id     = node_id
        self.n_unmatched = n_unmatched
        self.n_ambiguous = n_ambiguous
        super().__init__(
            f"❌ Predicate partition violated at node '{node_id}': "
            f"{n_unmatched} shot(s) matched no edge, {n_ambiguous} matched several"
        )


class ValidationFailure(QecSimError):
    """A tree failed noiseless validation; carries the full report."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"❌ Tree validation failed:\n{report}")


class DecoderConsistencyError(QecSimError):
    """Two inequivalent minimum-weight errors share one decoding signature."""

    def __init__(self, signature, first, second):
        self.signature = signature
        self.first     = first
        self.second    = second
        super().__init__(
            f"❌ Inconsistent fault classes for signature {signature}: "
            f"{sorted(first)} and {sorted(second)} differ by a logical operator"
        )


class InfeasibleScheduleError(QecSimError):
    """A transpilation step would violate an architecture constraint."""

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        super().__init__(f"❌ Schedule constraint '{constraint}' violated{': ' + detail if detail else ''}")


class ConfigError(QecSimError):
    """Rejected experiment configuration (CLI exit code 2)."""

    exit_code = 2
