"""Exceptions raised by the inference runtime and its harness."""


class InferenceError(Exception):
    """Base class for every fault raised by the runtime."""


class ArityError(InferenceError, ValueError):
    pass


class DivisionByZero(InferenceError, ZeroDivisionError):
    pass


class NegativeSqrt(InferenceError, ValueError):
    pass


class NotClosed(InferenceError):
    """A distribution parameter is still symbolic where a constant is required."""


class InvalidParam(InferenceError, ValueError):
    """A closed distribution parameter is out of range (e.g. variance <= 0)."""


class UnboundVariable(InferenceError, LookupError):
    def __init__(self, rv):
        super().__init__(f"X{rv} is not bound in the symbolic state")
        self.rv = rv


class NotParent(InferenceError):
    def __init__(self, parent, child):
        super().__init__(f"X{parent} is not a parent of X{child}")
        self.parent = parent
        self.child = child


class CycleDetected(InferenceError):
    pass


class InternalCycle(CycleDetected):
    """can_swap failed inside hoisting; the state or the algorithm is broken."""


class Unsupported(InferenceError):
    pass


class InvalidParticleCount(InferenceError, ValueError):
    pass


class AllParticlesDead(InferenceError):
    pass


class UnknownModel(InferenceError, LookupError):
    pass


class InvalidFlag(InferenceError, ValueError):
    pass
