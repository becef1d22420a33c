"""Request and response bodies for the session endpoint."""

from pydantic import BaseModel, Field


class ResponseIn(BaseModel):
    test_id: str
    actions: list[str]
    confidence: int | None = Field(default=None, ge=1, le=5)


class ScoreOut(BaseModel):
    optimal: bool
    reward_gap: float
    confidence: int | None = None
