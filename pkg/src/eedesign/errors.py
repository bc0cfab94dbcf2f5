"""Exception types shared by the analytic, optimization and simulation code."""


class InvalidParameterError(ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class InfeasibleError(Exception):
    """The SE target cannot be met for the requested design."""


class EmptyFeasibleSetError(InfeasibleError):
    """No cell of a search region admits a feasible design."""


class ConfigError(ValueError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
