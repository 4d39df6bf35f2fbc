"""Exception types shared across the package."""

from __future__ import annotations


class ClustergenError(Exception):
    """Base class for all package-specific errors."""


class ArchetypeValidationError(ClustergenError):
    """An archetype violates one or more parameter constraints."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid archetype: " + "; ".join(self.violations))


class NonConvergenceError(ClustergenError):
    """Center placement exhausted its epoch budget with loss above tolerance."""

    def __init__(self, final_loss: float, trace: list[float]):
        self.final_loss = final_loss
        self.trace = list(trace)
        super().__init__(
            f"overlap loss {final_loss:.3e} after {len(trace)} epochs did not reach tolerance"
        )


class NLError(ClustergenError):
    """Base class for natural-language workflow errors."""


class NLAuthError(NLError):
    """No API key configured; raised before any network traffic."""


class NLNetworkError(NLError):
    """Transport failed after exhausting retries."""


class NLRateLimitError(NLError):
    """The API kept rate-limiting across all retries."""

    def __init__(self, message: str, retry_trace: list[str]):
        self.retry_trace = list(retry_trace)
        super().__init__(message)


class NLParseError(NLError):
    """No usable JSON object / identifier in the model response."""

    def __init__(self, message: str, raw_response: str):
        self.raw_response = raw_response
        super().__init__(f"{message} (raw response attached)")


class NLValidationError(NLError):
    """The response parsed but the resulting archetype is invalid."""

    def __init__(self, violations: list[str], raw_response: str):
        self.violations = list(violations)
        self.raw_response = raw_response
        super().__init__("archetype from response is invalid: " + "; ".join(self.violations))
