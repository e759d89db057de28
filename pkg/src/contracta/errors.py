"""Exception hierarchy shared by all contracta modules."""


class ContractaError(Exception):
    """Base class for every error raised by contracta."""


class ArgumentError(ContractaError, ValueError):
    """Invalid argument (empty sample, bad count, unknown instance...)."""


class DomainError(ContractaError, ValueError):
    """A point does not belong to the domain it was evaluated on."""


class ClosureError(DomainError):
    """A self-map sent a point outside its domain.

    ``index`` is the orbit index of the offending iterate, when known.
    """

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class ExpressionSyntaxError(ContractaError, ValueError):
    """Malformed expression text. ``position`` is a 0-based column."""

    def __init__(self, message, text, position):
        pointer = " " * position + "^"
        super().__init__(f"{message} at position {position}\n  {text}\n  {pointer}")
        self.text = text
        self.position = position


class EvaluationError(ContractaError, ArithmeticError):
    """Expression evaluation failed; ``subexpression`` names the culprit."""

    def __init__(self, message, subexpression=None):
        if subexpression is not None:
            message = f"{message} in '{subexpression}'"
        super().__init__(message)
        self.subexpression = subexpression


class AuditError(ContractaError, ValueError):
    """A candidate control function (phi or alpha) fails its range audit."""

    def __init__(self, message, t=None, value=None):
        super().__init__(message)
        self.t = t
        self.value = value


class ConfigError(ContractaError, ValueError):
    """Configuration document rejected.

    ``code`` is one of ``syntax``, ``unknown_key``, ``type_mismatch``,
    ``constraint_violation``, ``missing_key``.
    """

    def __init__(self, code, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"[{code}] " + (", ".join(where) + ": " if where else "")
        super().__init__(prefix + message)
        self.code = code
        self.key = key
        self.line = line
