"""Exception types shared across the package.

Errors are grouped by how the CLI maps them to exit codes: configuration
problems (bad files, bad flags, mismatched inputs) exit 2, infeasible or
degenerate computations exit 3, anything else exits 4.
"""


class PolicyTeachError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PolicyTeachError):
    """Bad input supplied by the caller (exit code 2)."""


class SchemaError(ConfigurationError):
    """A domain config file failed structural validation."""


class SemanticError(ConfigurationError):
    """A domain config parsed but violates a semantic rule."""


class DomainMismatch(ConfigurationError):
    """Two artifacts that must describe the same domain do not."""


class InfeasibleComputation(PolicyTeachError):
    """The requested computation has no valid result (exit code 3)."""


class NonTerminating(InfeasibleComputation):
    """Value iteration cannot converge for this environment and weights."""


class Unreachable(InfeasibleComputation):
    """The goal cannot be reached from the requested start state."""


class CycleDetected(InfeasibleComputation):
    """A rollout exceeded the state-space step budget without terminating."""


class PolicyMismatch(InfeasibleComputation):
    """A demonstration disagrees with the policy it claims to follow."""


class InfeasibleSet(InfeasibleComputation):
    """A constraint set admits no strictly interior unit vector."""


class DegenerateRegion(InfeasibleComputation):
    """Rejection sampling from a belief region failed to accept."""


class EmptyPool(InfeasibleComputation):
    """No candidate demonstrations are available for selection."""


class CoverageFailure(InfeasibleComputation):
    """Greedy set cover could not cover the target constraint set."""


class PoolTooSmall(InfeasibleComputation):
    """Too few candidate tests to build the requested suite."""


class DegenerateClusters(InfeasibleComputation):
    """Difficulty clustering collapsed (all overlap values equal)."""


class InvalidTrajectory(ConfigurationError):
    """A submitted trajectory is not a legal path in its environment."""


class ChecksumMismatch(ConfigurationError):
    """A session answers file does not match its recorded checksum."""
