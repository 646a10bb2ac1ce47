"""Exception types raised across the package."""


class DomainError(ValueError):
    """A parameter lies outside its physical domain."""


class ResourceError(RuntimeError):
    """A requested matrix is too large to allocate or diagonalize."""


class EigensolverError(RuntimeError):
    """The symmetric eigensolver failed to converge or returned garbage."""


class EmptyOrbit(ValueError):
    """No classical orbit exists at the requested energy."""


class ProvenanceError(ValueError):
    """Objects derived from different eigensystems were combined."""


class ConfigError(ValueError):
    """Invalid run configuration; carries the offending line or key."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if key is not None:
            prefix.append(f"key {key!r}")
        super().__init__(f"{', '.join(prefix)}: {message}" if prefix else message)


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
