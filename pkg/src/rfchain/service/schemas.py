"""Request/response bodies for the HTTP service.

Every request carries the full resolved chain configuration, so the
service holds no state between calls and two identical requests are
guaranteed identical responses.
"""

from typing import Dict, Optional

from pydantic import Field

from ..config import ChainConfig, StrictModel
from ..workflows import ProtocolSpec


class ConfigRequest(StrictModel):
    config: ChainConfig = Field(default_factory=ChainConfig)


class AnalyzeRequest(StrictModel):
    config: ChainConfig = Field(default_factory=ChainConfig)
    csv_text: str = Field(min_length=1)


class OptimizeRequest(StrictModel):
    config: ChainConfig = Field(default_factory=ChainConfig)
    protocol: ProtocolSpec


class ValidateRequest(StrictModel):
    """Dry-run payload: validation happens during request parsing, so a
    200 response means everything supplied is well-formed."""

    config: ChainConfig = Field(default_factory=ChainConfig)
    protocol: Optional[ProtocolSpec] = None


class WorkflowResponse(StrictModel):
    files: Dict[str, str]
    summary: dict


class ValidateResponse(StrictModel):
    valid: bool
    n_protocol_passes: Optional[int] = None


class HealthResponse(StrictModel):
    status: str
    version: str
