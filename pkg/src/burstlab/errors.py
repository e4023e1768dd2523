"""Exception types shared across the package."""


class BurstlabError(Exception):
    """Base class for all burstlab errors."""


class InvalidParameterError(BurstlabError, ValueError):
    """A parameter violates its documented constraints."""


class InvalidStateError(BurstlabError, ValueError):
    """A dynamical state contains non-finite values."""


class NumericalBlowupError(BurstlabError, RuntimeError):
    """Integration produced a non-finite state.

    Carries the offending neuron index and the simulation time.
    """

    def __init__(self, neuron: int, t: float):
        self.neuron = neuron
        self.t = t
        super().__init__(f"non-finite state for neuron {neuron} at t={t:.4f} ms")


class EdgeListError(BurstlabError, ValueError):
    """Edge-list text failed to parse or validate; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientDataError(BurstlabError, ValueError):
    """A metric was asked for on a spike train that is too short."""


class IrregularBurstError(BurstlabError, ValueError):
    """Burst segmentation found a non-constant per-burst spike count."""


class NoPrimaryError(BurstlabError, ValueError):
    """No primary neuron could be detected (highest-potential neuron is
    network-affected; likely a positive-TD regime)."""


class ConfigError(BurstlabError, ValueError):
    """An experiment config is invalid; carries the file path and field."""

    def __init__(self, message: str, path=None, field: str | None = None):
        self.path = path
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if field is not None:
            where.append(f"field '{field}'")
        prefix = " ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
