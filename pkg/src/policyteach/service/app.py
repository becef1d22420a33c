"""HTTP endpoint for one session: serve the bundle, grade responses.

Grading happens exclusively server-side against the answers document, so
the browser only ever sees the bundle. Every graded response is appended to
a newline-delimited JSON log.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException

from ..assessment import TestItem, score_response, trajectory_from_actions
from ..bundle import check_pairing
from ..domains import domain_from_dict
from ..errors import InvalidTrajectory
from .schemas import ResponseIn, ScoreOut


def _rebuild_tests(bundle: dict, answers: dict) -> tuple[dict[str, TestItem], list[float]]:
    """Reconstruct gradable test items from the two documents."""
    dom_info = bundle["domain"]
    config = {
        "name": dom_info["name"],
        "features": dom_info["features"],
        "weights": answers["weights"],
        "discount": dom_info["discount"],
        "environments": [
            {
                "id": test["test_id"],
                "grid": test["grid"],
                "start": test["start"],
                **({"flags": dom_info["flags"]} if dom_info.get("flags") else {}),
            }
            for test in bundle["tests"]
        ],
    }
    if dom_info.get("flags"):
        config["flags"] = list(dom_info["flags"])
    if dom_info.get("pickup_flag"):
        config["pickup_flag"] = dom_info["pickup_flag"]
    domain = domain_from_dict(config)

    items = {}
    for test in bundle["tests"]:
        test_id = test["test_id"]
        env = domain.environment(test_id)
        hidden = answers["items"][test_id]
        items[test_id] = TestItem(
            env=env,
            optimal=trajectory_from_actions(env, hidden["actions"]),
            overlap=hidden["overlap"],
            difficulty=hidden["difficulty"],
            tier=test["tier"],
        )
    return items, [float(x) for x in answers["weights"]]


def create_app(bundle: dict, answers: dict, log_path) -> FastAPI:
    check_pairing(bundle, answers)
    tests, weights = _rebuild_tests(bundle, answers)
    log_path = Path(log_path)
    log_lock = threading.Lock()

    app = FastAPI(title="policyteach session")

    @app.get("/session")
    def get_session() -> dict:
        return bundle

    @app.post("/response")
    def post_response(body: ResponseIn) -> ScoreOut:
        item = tests.get(body.test_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"unknown test {body.test_id!r}")
        try:
            score = score_response(item, body.actions, weights, body.confidence)
        except InvalidTrajectory as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        record = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "test_id": body.test_id,
            "actions": body.actions,
            "optimal": score.optimal,
            "reward_gap": score.reward_gap,
            "confidence": score.confidence,
        }
        with log_lock, open(log_path, "a") as fh:
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")
        return ScoreOut(
            optimal=score.optimal,
            reward_gap=score.reward_gap,
            confidence=score.confidence,
        )

    return app
