"""Exception types raised across the package."""


class BoxwireError(Exception):
    """Base class for all package errors."""


class NegativeProbability(BoxwireError, ValueError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"entry {index} evaluates to {value} < 0")


class ParseError(BoxwireError, ValueError):
    """Malformed box file or wiring expression.

    ``line`` is set for box files, ``position`` for wiring expressions.
    """

    def __init__(self, reason, line=None, position=None):
        self.reason = reason
        self.line = line
        self.position = position
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif position is not None:
            where = f"position {position}: "
        super().__init__(where + reason)


class SignalingInput(BoxwireError, ValueError):
    """A bipartite routine that presumes a non-signaling box got a signaling one."""


class NotNonsignaling(BoxwireError, ValueError):
    """A tripartite routine that presumes NS3 got a signaling box."""


class NotFullyBilocal(BoxwireError, ValueError):
    pass


class MalformedProblem(BoxwireError, ValueError):
    pass


class InvalidSpec(BoxwireError, ValueError):
    pass


class UnboundedClass(BoxwireError, RuntimeError):
    """A class-level LP came back unbounded, which means the formulation is broken."""


class WiringNotNormalized(BoxwireError, ValueError):
    """The wired box does not sum to one.

    Only happens when the later-measured party signals to the earlier one and
    the second input depends on the first output.
    """
