"""Exception taxonomy.

Two families matter to callers: ordinary argument/domain problems (CLI exit 1)
and violated mathematical hypotheses (CLI exit 2). A hypothesis violation is
not a bug in the input file; it means the requested inequality's precondition
cannot hold for these inputs, which is a meaningful verification outcome.
"""


class MetricSymError(Exception):
    """Base class for all library errors."""


class ArgumentError(MetricSymError):
    """Malformed or inconsistent arguments (empty lists, bad shapes, ...)."""


class DomainError(MetricSymError):
    """Evaluation point outside a function's domain."""


class ContainmentError(ArgumentError):
    """A ball or index set required to be contained in another is not."""


class UnsupportedSpecError(MetricSymError):
    """A function-space spec names a space or parameter outside scope."""


class CoverageError(MetricSymError):
    """Pairwise distances required for a construction were not computed."""


class HypothesisViolation(MetricSymError):
    """A theorem hypothesis fails for the supplied inputs. CLI exit 2."""


class WindowError(HypothesisViolation):
    """The validated t-window (0, c2*mu(B0)) contains no usable grid point."""


class ResolutionError(HypothesisViolation):
    """The grid is too coarse to resolve the structure being probed."""


class SupportError(HypothesisViolation):
    """A support-size hypothesis (supp f inside B0, small support) fails."""
