"""Exception types shared across the package.

Everything raised on purpose derives from GridStabError so the CLI and the
service can map domain failures to exit code 1 / HTTP 422 uniformly.
"""


class GridStabError(Exception):
    """Base class for all domain errors."""

    code = "error"


class ParseError(GridStabError):
    """Malformed feeder or scenario document."""

    code = "parse_error"


class TopologyError(GridStabError):
    """Feeder graph is not a tree rooted at the substation."""

    code = "topology_error"


class PhaseError(GridStabError):
    """Phase sets are inconsistent (child not a subset of its supply line, ...)."""

    code = "phase_error"


class UnknownNode(GridStabError):
    code = "unknown_node"


class DivisionByZeroReactance(GridStabError):
    """A ratio was requested over a zero diagonal entry."""

    code = "division_by_zero_reactance"

    def __init__(self, msg, phases=()):
        super().__init__(msg)
        self.phases = tuple(phases)


class DegenerateBlock(GridStabError):
    """An impedance block collapsed to zero during rescaling."""

    code = "degenerate_block"


class StructureError(GridStabError):
    """Gain matrix entries outside the APNP structure."""

    code = "structure_error"


class SingularMatrix(GridStabError):
    code = "singular_matrix"


class NumericalFailure(GridStabError):
    """Eigenvalue or linear-algebra routine did not converge."""

    code = "numerical_failure"


class NoStabilizingGain(GridStabError):
    """Spectral radius is >= 1 already at the smallest tested gain."""

    code = "no_stabilizing_gain"


class UnboundedGain(GridStabError):
    """Still stable at the largest tested gain; no crossing inside the bracket."""

    code = "unbounded_gain"

    def __init__(self, msg, hi=None):
        super().__init__(msg)
        self.hi = hi


class NoRealSolution(GridStabError):
    """Exact power-flow quadratic has no real voltage solution (collapse)."""

    code = "no_real_solution"


class NoGoodConfigurationFound(GridStabError):
    """Random search exhausted its budget without a good configuration."""

    code = "no_good_configuration_found"


class SchemaError(GridStabError):
    """Request parameters failed schema validation (HTTP 400)."""

    code = "schema_error"
