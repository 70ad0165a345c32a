from typing import Optional


class CmcError(Exception):
    """Base class for every error raised by the cross-mapping toolkit"""
    exit_code = 4


class UsageError(CmcError):
    """Unknown preset or figure id, or a required user file is missing"""
    exit_code = 2


class InvalidArgumentError(CmcError, ValueError):
    exit_code = 3


class ParseError(CmcError, ValueError):
    """Malformed input file. Carries the offending line number when known"""
    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        location = ""
        if path is not None:
            location += f"{path}"
        if line is not None:
            location += f":{line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)


class DegenerateInputError(CmcError, ValueError):
    """Zero-variance input where a correlation or SNR is undefined"""
    exit_code = 4


class SimulationError(CmcError, RuntimeError):
    exit_code = 4

    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        super().__init__(f"{message} (step {step})" if step is not None else message)


class InternalConsistencyError(CmcError, RuntimeError):
    exit_code = 4
