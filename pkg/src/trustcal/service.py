"""HTTP session API driving live experiment sessions.

Sessions live in memory, keyed by an opaque id; each one owns a pre-generated
stimulus pool and samples from it with replacement. The assigned condition is
never exposed while a session runs; it appears only in the CSV export.
"""

from __future__ import annotations

import io
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .conditions import CONDITIONS, StimulusPool, TrialStimulus, build_pool, condition_spec
from .datastore import SessionConfig, TrialRecord
from .streams import substream

SESSION_TTL_SECONDS = 24 * 3600

STATE_AWAITING = "awaiting_judgment"
STATE_BETWEEN = "between_trials"
STATE_FINISHED = "finished"

DOT_COLORS = ["blue", "orange", "green", "purple", "red", "teal"]


class CreateSessionBody(BaseModel):
    condition: str | None = None


class JudgmentBody(BaseModel):
    judged_correct: bool
    response_ms: int | None = None


@dataclass
class Session:
    session_id: str
    config: SessionConfig
    assigned_condition: str
    pool: StimulusPool
    rng: object
    current_trial: int = 0
    score: int = 0
    records: list[TrialRecord] = field(default_factory=list)
    state: str = STATE_BETWEEN
    stimulus: TrialStimulus | None = None
    colors: tuple[str, str] = ("blue", "orange")
    last_access: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def bonus_accrued(self) -> float:
        return round(min(self.score * self.config.bonus_per_correct, self.config.bonus_cap), 2)


def create_app(config: SessionConfig | None = None) -> FastAPI:
    base_config = config or SessionConfig()
    app = FastAPI(title="trustcal session service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: dict[str, Session] = {}
    counter = {"n": 0}
    registry_lock = threading.Lock()

    def evict_stale():
        now = time.time()
        for sid in [s for s, sess in sessions.items() if now - sess.last_access > SESSION_TTL_SECONDS]:
            sessions.pop(sid, None)

    def get_session(session_id: str) -> Session:
        with registry_lock:
            evict_stale()
            sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail="unknown session")
        sess.last_access = time.time()
        return sess

    @app.post("/api/sessions")
    def create_session(body: CreateSessionBody | None = None):
        requested = body.condition if body and body.condition else base_config.condition
        if requested != "random" and requested not in CONDITIONS:
            raise HTTPException(status_code=400, detail=f"unknown condition {requested!r}")
        with registry_lock:
            evict_stale()
            counter["n"] += 1
            n = counter["n"]
        rng = substream(base_config.seed, "session", n)
        condition = requested if requested != "random" else CONDITIONS[int(rng.integers(4))]
        pool = build_pool(
            condition_spec(condition),
            n=base_config.pool_size,
            seed=int(rng.integers(2**62)),
        )
        sess = Session(
            session_id=uuid.uuid4().hex,
            config=base_config,
            assigned_condition=condition,
            pool=pool,
            rng=rng,
        )
        with registry_lock:
            sessions[sess.session_id] = sess
        return {
            "session_id": sess.session_id,
            "n_trials": base_config.n_trials,
            "condition_hidden": True,
        }

    @app.get("/api/sessions/{session_id}/trial")
    def get_trial(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            if sess.state == STATE_FINISHED:
                raise HTTPException(status_code=409, detail="session finished")
            if sess.state == STATE_BETWEEN:
                sess.current_trial += 1
                sess.stimulus = sess.pool.items[int(sess.rng.integers(len(sess.pool.items)))]
                pair = sess.rng.choice(len(DOT_COLORS), size=2, replace=False)
                sess.colors = (DOT_COLORS[int(pair[0])], DOT_COLORS[int(pair[1])])
                sess.state = STATE_AWAITING
            return {
                "trial_index": sess.current_trial,
                "ai_prediction_color": sess.colors[0],
                "ai_confidence": sess.stimulus.confidence_displayed,
                "colors": list(sess.colors),
            }

    @app.post("/api/sessions/{session_id}/judgment")
    def post_judgment(session_id: str, body: JudgmentBody):
        sess = get_session(session_id)
        with sess.lock:
            if sess.state == STATE_FINISHED:
                raise HTTPException(status_code=409, detail="session finished")
            if sess.state != STATE_AWAITING:
                raise HTTPException(status_code=409, detail="no pending trial to judge")
            stim = sess.stimulus
            human_correct = body.judged_correct == stim.ai_correct
            score_delta = 1 if human_correct else 0
            sess.score += score_delta
            sess.records.append(
                TrialRecord(
                    participant_id=sess.session_id,
                    condition=sess.assigned_condition,
                    trial_index=sess.current_trial,
                    ai_confidence=stim.confidence_displayed,
                    ai_correct=stim.ai_correct,
                    human_judged_correct=body.judged_correct,
                    human_correct=human_correct,
                    response_ms=body.response_ms,
                    timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                )
            )
            sess.stimulus = None
            finished = sess.current_trial >= sess.config.n_trials
            sess.state = STATE_FINISHED if finished else STATE_BETWEEN
            return {
                "was_human_correct": human_correct,
                "ai_was_correct": stim.ai_correct,
                "score_delta": score_delta,
                "bonus_accrued": sess.bonus_accrued,
                "finished": finished,
            }

    @app.get("/api/sessions/{session_id}/export")
    def export_session(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            buf = io.StringIO()
            _write_records_csv(sess.records, buf)
            return Response(
                content=buf.getvalue(),
                media_type="text/csv",
                headers={
                    "Content-Disposition": f"attachment; filename=session-{session_id}.csv"
                },
            )

    return app


def _write_records_csv(records: list[TrialRecord], buf) -> None:
    import csv as _csv

    from .datastore import TRIAL_HEADER

    writer = _csv.writer(buf)
    writer.writerow(TRIAL_HEADER)
    for rec in records:
        writer.writerow(
            [
                rec.participant_id,
                rec.condition,
                str(rec.trial_index),
                f"{rec.ai_confidence:.1f}",
                "1" if rec.ai_correct else "0",
                "1" if rec.human_judged_correct else "0",
                "1" if rec.human_correct else "0",
                "" if rec.response_ms is None else str(int(rec.response_ms)),
                "" if rec.timestamp is None else rec.timestamp,
            ]
        )


def serve(port: int = 8000, host: str = "127.0.0.1",
          config: SessionConfig | None = None, ui_dir: str | None = None) -> None:
    """Run the session service (blocking). `ui_dir` mounts a built web client at /."""
    import uvicorn

    app = create_app(config)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="warning")
