from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, StrictInt


class BatchRequest(BaseModel):
    """一秒钟的样本批次，样本字段由 validate_sample 逐条校验"""

    seq: StrictInt = Field(ge=0)
    samples: List[Dict[str, Any]]


class BatchResponse(BaseModel):
    accepted_count: int
    next_expected_seq: int


class CloseRequest(BaseModel):
    skill: Literal[0, 1]


class CloseResponse(BaseModel):
    player_id: str
    session_id: str
    skill: int
    sample_count: int


class SessionSummary(BaseModel):
    player_id: str
    session_id: str
    status: str
    skill: Optional[int] = None
    gaps: List[List[int]] = Field(default_factory=list)
    sample_count: int
    batch_count: int
    next_expected_seq: int


class HealthResponse(BaseModel):
    status: str
    sessions: int
