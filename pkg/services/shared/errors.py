class LeakbenchError(Exception):
    """Base class for every error leakbench raises on purpose."""


class ConfigError(LeakbenchError):
    """Bad platform file, manifest or experiment parameters."""


class UnsupportedMitigation(ConfigError):
    """The platform profile has no way to perform a mitigation action."""

    def __init__(self, action: str, platform: str) -> None:
        self.action = action
        self.platform = platform
        super().__init__(f"platform {platform!r} does not support {action}")


class EmptyInput(LeakbenchError):
    """A declared input symbol has no samples."""


class NonStochasticMatrix(LeakbenchError):
    """A channel matrix row is negative or does not sum to one."""


class SampleParseError(LeakbenchError):
    """Malformed sample CSV."""

    def __init__(self, message: str, line: int) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}")
