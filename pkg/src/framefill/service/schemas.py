"""Request/response models for the HTTP API (versioned under /v1)."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody


class HealthResponse(BaseModel):
    status: str
    frames: int
    vocab_size: int


class LexicalUnitOut(BaseModel):
    lemma: str
    pos: str
    variants: list[str]


class FrameOut(BaseModel):
    id: str
    name: str
    lexical_units: list[LexicalUnitOut]


class FrameSearchResponse(BaseModel):
    frames: list[FrameOut]


class DecodeOptions(BaseModel):
    mode: Literal["ordered", "unordered"] = "unordered"
    beam_size: int = Field(default=20, ge=1, le=512)
    max_new_tokens: int = Field(default=48, ge=1, le=256)
    num_candidates: int = Field(default=5, ge=1, le=50)
    length_penalty: float = 0.0
    frame_prompt: bool = False


class InfillRequest(BaseModel):
    sentences: list[str]
    blanks: list[int]
    frames: Optional[list[list[str]]] = None
    options: DecodeOptions = DecodeOptions()
    seed: int = 0
    trace: bool = False


class CandidateOut(BaseModel):
    text: str
    logprob: float
    score: float
    satisfied: list[str]


class BlankOut(BaseModel):
    blank: int
    candidates: list[CandidateOut]
    search_failed: bool
    partials: list[CandidateOut]


class InfillResponse(BaseModel):
    blanks: list[BlankOut]
    seed: int
    trace: Optional[list[dict[str, Any]]] = None


class SuggestRequest(BaseModel):
    sentences: list[str]
    position: int
    k: int = Field(default=5, ge=1, le=100)
    exclude: list[str] = Field(default_factory=list)


class SuggestedFrame(BaseModel):
    id: str
    score: float


class SuggestResponse(BaseModel):
    frames: list[SuggestedFrame]
    suggestion_source: str


class DiversifyRequest(BaseModel):
    sentences: list[str]
    position: int
    k: int = Field(default=5, ge=1, le=20)
    per_frame: int = Field(default=3, ge=1, le=20)
    options: DecodeOptions = DecodeOptions()
    seed: int = 0


class DiversifyGroup(BaseModel):
    frame: str
    suggestion_score: float
    candidates: list[CandidateOut]
    search_failed: bool


class DiversifyResponse(BaseModel):
    groups: list[DiversifyGroup]
    suggestion_source: str
    seed: int


class CounterfactualRequest(BaseModel):
    sentences: list[str]
    replace_index: int
    replacement: str
    frames_per_sentence: Optional[list[list[str]]] = None
    options: DecodeOptions = DecodeOptions()
    seed: int = 0


class RewriteOut(BaseModel):
    index: int
    text: str
    satisfied: list[str]
    search_failed: bool


class CounterfactualResponse(BaseModel):
    sentences: list[str]
    rewrites: list[RewriteOut]
    parsed_frames: list[list[str]]
    sampled_frames: list[list[str]]
    metadata: dict[str, Any]


class SessionCreateRequest(BaseModel):
    seed: int = 0


class SessionStateOut(BaseModel):
    id: str
    seed: int
    cells: list[dict[str, Any]]
    candidates: dict[str, list[dict[str, Any]]]
    history: list[dict[str, Any]]


class SessionEventRequest(BaseModel):
    event: dict[str, Any]


class SessionEventResponse(BaseModel):
    state: SessionStateOut
    result: dict[str, Any]


class SessionImportRequest(BaseModel):
    state: dict[str, Any]
