"""
Pydantic models for the run log.

Each CLI invocation appends exactly one entry; the 'outcome' field tells a
Success entry from a Failure entry.
"""

from datetime import datetime
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator # type: ignore


class RunInfo(BaseModel):
    """Details of the invocation."""
    argv: List[str]
    config_path: Optional[str] = None
    seed: Optional[int] = None
    threads: Optional[int] = None


class BaseLog(BaseModel):
    """Base model containing fields common to all log entries."""
    ts: datetime = Field(default_factory=datetime.utcnow)
    action: str = Field(description="The subcommand, e.g. 'simulate' or 'certificate recurrence'.")
    run: RunInfo

    class Config:
        use_enum_values = True


class SuccessRunLog(BaseLog):
    """Schema for a completed run; `passed` is False when a check failed."""
    outcome: Literal["Success"] = "Success"
    passed: bool
    files: List[str] = Field(default_factory=list)
    latency_ms: float

    @field_validator('latency_ms')
    def round_latency(cls, v):
        return round(v, 2)


class FailureRunLog(BaseLog):
    """Schema for a run aborted by an exception."""
    outcome: Literal["Failure"] = "Failure"
    error: Dict[str, Any]


LogEntry = Union[SuccessRunLog, FailureRunLog]
