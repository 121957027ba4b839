"""HTTP service over the loaded artifacts. Stateless decode endpoints plus a
small session store for the interactive canvas; all artifacts are shared
read-only across requests."""

from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..constraints import ConstraintError
from ..dataprep import DataprepError
from ..decoding import InfillCandidate, InfillOptions, InfillTask, RequestError, infill
from ..lexicon import LexiconError
from ..runtime import RuntimeContext
from ..sessions import SessionError, SessionStore, apply_event, replay
from ..suggest import SUGGESTION_SOURCE, suggest_frames
from ..workflows import counterfactual_rewrite, diverse_candidates, neighbor_frames
from . import schemas as S


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


def _options(opts: S.DecodeOptions) -> InfillOptions:
    return InfillOptions(
        mode=opts.mode,
        beam_size=opts.beam_size,
        max_new_tokens=opts.max_new_tokens,
        num_candidates=opts.num_candidates,
        length_penalty=opts.length_penalty,
        frame_prompt=opts.frame_prompt,
    )


def _candidate_out(c: InfillCandidate) -> S.CandidateOut:
    return S.CandidateOut(
        text=c.text, logprob=c.logprob, score=c.score, satisfied=list(c.satisfied)
    )


def _normalize_frame_ids(rt: RuntimeContext, ids: list[str]) -> list[str]:
    out = []
    for fid in ids:
        frame = rt.frame_index.resolve(fid)
        out.append(frame.id)
    return out


def create_app(rt: RuntimeContext) -> FastAPI:
    app = FastAPI(title="framefill", version="0.1.0")
    store = SessionStore(rt.config.session_dir)

    @app.exception_handler(LexiconError)
    async def _lexicon_error(request: Request, exc: LexiconError):
        code = "unknown_frame" if "unknown frame" in str(exc) else "lexicon_error"
        return _error(404 if code == "unknown_frame" else 400, code, str(exc))

    @app.exception_handler(RequestError)
    async def _request_error(request: Request, exc: RequestError):
        return _error(400, "bad_request", str(exc))

    @app.exception_handler(DataprepError)
    async def _dataprep_error(request: Request, exc: DataprepError):
        return _error(400, "bad_request", str(exc))

    @app.exception_handler(ConstraintError)
    async def _constraint_error(request: Request, exc: ConstraintError):
        return _error(400, "constraint_error", str(exc))

    @app.exception_handler(SessionError)
    async def _session_error(request: Request, exc: SessionError):
        status = 404 if "no such session" in str(exc) else 400
        return _error(status, "session_error", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return _error(422, "validation_error", str(exc.errors()))

    @app.get("/v1/health", response_model=S.HealthResponse)
    def health():
        return S.HealthResponse(
            status="ok", frames=len(rt.frames), vocab_size=rt.vocab.size
        )

    @app.get("/v1/frames", response_model=S.FrameSearchResponse)
    def search_frames(q: str = Query(default="")):
        needle = q.strip().strip("[]").lower()
        hits = []
        for fr in rt.frames:
            in_name = needle in fr.name.lower()
            in_lus = any(
                needle in v for lu in fr.lexical_units for v in lu.variants
            )
            if not needle or in_name or in_lus:
                hits.append(
                    S.FrameOut(
                        id=fr.id,
                        name=fr.name,
                        lexical_units=[
                            S.LexicalUnitOut(
                                lemma=lu.lemma, pos=lu.pos.value, variants=sorted(lu.variants)
                            )
                            for lu in fr.lexical_units
                        ],
                    )
                )
        return S.FrameSearchResponse(frames=hits)

    @app.post("/v1/infill", response_model=S.InfillResponse, response_model_exclude_none=True)
    def do_infill(req: S.InfillRequest):
        frames = [
            _normalize_frame_ids(rt, list(f)) for f in (req.frames or [[]] * len(req.blanks))
        ]
        task = InfillTask.create(req.sentences, req.blanks, frames)
        trace: list[dict] | None = [] if req.trace else None
        results = infill(task, rt.frame_index, rt.vocab, rt.scorer, _options(req.options),
                         trace=trace)
        return S.InfillResponse(
            blanks=[
                S.BlankOut(
                    blank=r.blank,
                    candidates=[_candidate_out(c) for c in r.candidates],
                    search_failed=r.search_failed,
                    partials=[_candidate_out(c) for c in r.partials] if r.search_failed else [],
                )
                for r in results
            ],
            seed=req.seed,
            trace=trace,
        )

    @app.post("/v1/suggest", response_model=S.SuggestResponse)
    def do_suggest(req: S.SuggestRequest):
        left, right = neighbor_frames(rt, req.sentences, req.position)
        exclude = [rt.frame_index.resolve(f).id for f in req.exclude]
        ranked = suggest_frames(rt.suggestion, left, right, req.k, exclude=exclude)
        return S.SuggestResponse(
            frames=[S.SuggestedFrame(id=fid, score=score) for fid, score in ranked],
            suggestion_source=SUGGESTION_SOURCE,
        )

    @app.post("/v1/diversify", response_model=S.DiversifyResponse)
    def do_diversify(req: S.DiversifyRequest):
        groups = diverse_candidates(
            rt, req.sentences, req.position, req.k, _options(req.options), req.per_frame
        )
        return S.DiversifyResponse(
            groups=[
                S.DiversifyGroup(
                    frame=g["frame"],
                    suggestion_score=g["suggestion_score"],
                    candidates=[_candidate_out(c) for c in g["candidates"]],
                    search_failed=g["search_failed"],
                )
                for g in groups
            ],
            suggestion_source=SUGGESTION_SOURCE,
            seed=req.seed,
        )

    @app.post("/v1/counterfactual", response_model=S.CounterfactualResponse)
    def do_counterfactual(req: S.CounterfactualRequest):
        frames = None
        if req.frames_per_sentence is not None:
            frames = [_normalize_frame_ids(rt, list(f)) for f in req.frames_per_sentence]
        out = counterfactual_rewrite(
            rt,
            req.sentences,
            req.replace_index,
            req.replacement,
            frames_per_sentence=frames,
            seed=req.seed,
            options=_options(req.options),
        )
        rewrites = []
        for r in out["rewrites"]:
            chosen = r.candidates[0] if r.candidates else (r.partials[0] if r.partials else None)
            rewrites.append(
                S.RewriteOut(
                    index=r.blank,
                    text=chosen.text if chosen else "",
                    satisfied=list(chosen.satisfied) if chosen else [],
                    search_failed=r.search_failed,
                )
            )
        return S.CounterfactualResponse(
            sentences=out["sentences"],
            rewrites=rewrites,
            parsed_frames=out["parsed_frames"],
            sampled_frames=out["sampled_frames"],
            metadata=out["metadata"],
        )

    def _state_out(state) -> S.SessionStateOut:
        return S.SessionStateOut(**state.to_json())

    @app.post("/v1/sessions", response_model=S.SessionStateOut)
    def create_session(req: S.SessionCreateRequest):
        return _state_out(store.create(seed=req.seed))

    @app.get("/v1/sessions/{session_id}", response_model=S.SessionStateOut)
    def get_session(session_id: str):
        return _state_out(store.get(session_id))

    @app.post("/v1/sessions/{session_id}/events", response_model=S.SessionEventResponse)
    def post_event(session_id: str, req: S.SessionEventRequest):
        with store.lock(session_id):
            state = store.get(session_id)
            result = apply_event(rt, state, req.event)
            store.save(state)
        return S.SessionEventResponse(state=_state_out(state), result=result)

    @app.post("/v1/sessions/{session_id}/replay", response_model=S.SessionStateOut)
    def replay_session(session_id: str):
        state = store.get(session_id)
        return _state_out(replay(rt, state))

    @app.post("/v1/sessions/import", response_model=S.SessionStateOut)
    def import_session(req: S.SessionImportRequest):
        return _state_out(store.import_state(req.state))

    return app
