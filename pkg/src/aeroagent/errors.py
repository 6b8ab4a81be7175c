"""Exception hierarchy shared across the simulator and harness."""

from __future__ import annotations


class AeroAgentError(Exception):
    """Base class for all package-specific errors."""


class ScenarioInfeasible(AeroAgentError):
    """Rejection sampling could not place all entities, or a start/target
    cell rasterized as occupied."""


class NoPathExists(AeroAgentError):
    """The occupancy grid admits no free path between the requested cells."""


class EmptyRun(AeroAgentError):
    """Metrics were requested over an empty trace collection."""


class NotApplicable(AeroAgentError):
    """The requested measurement is undefined for this trace (e.g. path
    optimality of a non-successful episode)."""


class GatewayError(AeroAgentError):
    """Base class for model-backend failures. Each subclass is surfaced
    distinctly so the episode layer can log the exact failure mode."""


class BackendTimeout(GatewayError):
    """The remote backend did not answer within the configured timeout."""


class ConnectionRefused(GatewayError):
    """TCP-level connection failure to the remote backend."""


class MalformedReply(GatewayError):
    """The remote backend answered with non-JSON or a JSON document that
    lacks the completion content field."""


class HTTPStatusError(GatewayError):
    """The remote backend answered with HTTP status >= 400."""

    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}: {detail}" if detail else f"HTTP {status}")
        self.status = status


class ResponsesExhausted(GatewayError):
    """A scripted backend ran out of canned responses."""
