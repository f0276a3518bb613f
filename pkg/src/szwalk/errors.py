"""Exception types shared across the package."""


class GraphStructureError(ValueError):
    """Malformed graph data: dangling vertex ids, broken arc inversion, isolated vertices."""


class DomainError(ValueError):
    """Input violates a mathematical precondition (normalization, hermiticity, range)."""


class DimensionError(ValueError):
    """Operands have incompatible shapes or ambient dimensions."""


class ConsistencyError(RuntimeError):
    """Two independently computed quantities disagree beyond tolerance."""
