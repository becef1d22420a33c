"""Session bundles: one self-contained JSON document for the browser player
and a separate answers document for the grading server.

The split is the point. The bundle carries everything a participant may see
(grids, demonstrations, test prompts); the answers file carries everything
they must not (optimal test trajectories, the true weights). Both documents
are canonical JSON with sorted keys, so identical inputs produce identical
bytes, and each carries a sha256 integrity digest over its own content.
"""

from __future__ import annotations

import hashlib
import json

from .assessment import TestSuite
from .curriculum import Curriculum
from .errors import ChecksumMismatch, DomainMismatch
from .mdp import CELL_FOR_CHAR, Domain

BUNDLE_VERSION = 1


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def payload_digest(payload: dict) -> str:
    """sha256 over the canonical bytes, with the integrity field held out."""
    body = {k: v for k, v in payload.items() if k != "integrity"}
    return hashlib.sha256(canonical_json(body).encode()).hexdigest()


def seal(payload: dict) -> dict:
    return {**payload, "integrity": payload_digest(payload)}


def verify_integrity(payload: dict, kind: str) -> None:
    recorded = payload.get("integrity")
    if recorded != payload_digest(payload):
        raise ChecksumMismatch(f"{kind}: integrity digest does not match content")


def _legend(domain: Domain) -> dict[str, str]:
    kinds = {kind for env in domain.environments for row in env.cells for kind in row}
    kinds.update(k for t in domain.features if (k := t.trigger.cell) is not None)
    return {ch: kind for ch, kind in CELL_FOR_CHAR.items() if kind in kinds}


def _trigger_dict(trigger) -> dict:
    out = {"kind": trigger.kind}
    if trigger.cell is not None:
        out["cell"] = trigger.cell
    if trigger.flag is not None:
        out["flag"] = trigger.flag
    return out


def build_session(
    domain: Domain, curriculum: Curriculum, suite: TestSuite
) -> tuple[dict, dict]:
    """(bundle, answers) for one teaching-then-testing session.

    Raises DomainMismatch when the curriculum and suite come from different
    feature models.
    """
    if suite.domain_name != domain.name:
        raise DomainMismatch(
            f"suite is for {suite.domain_name!r}, domain is {domain.name!r}"
        )
    for step in curriculum.steps:
        if step.demo.env.features != domain.features:
            raise DomainMismatch(
                f"curriculum step {step.demo.demo_id} uses a different feature model"
            )

    teaching = []
    for step in curriculum.steps:
        env = step.demo.env
        teaching.append(
            {
                "env_id": env.env_id,
                "grid": env.grid_rows(),
                "start": [env.start[0], env.start[1]],
                "actions": step.demo.trajectory.actions(),
                "info_gain": step.info_gain,
            }
        )

    tests = []
    hidden = {}
    for item in suite.items:
        env = item.env
        tests.append(
            {
                "test_id": item.test_id,
                "grid": env.grid_rows(),
                "start": [env.start[0], env.start[1]],
                "tier": item.tier,
            }
        )
        hidden[item.test_id] = {
            "actions": item.optimal.actions(),
            "overlap": item.overlap,
            "difficulty": item.difficulty,
        }

    flags = {}
    if domain.flag_names:
        template = domain.environments[0]
        flags = {
            name: bool(value)
            for name, value in zip(domain.flag_names, template.start_flags)
        }
    pickup = {env.pickup_flag for env in domain.environments} - {None}

    bundle = {
        "version": BUNDLE_VERSION,
        "domain": {
            "name": domain.name,
            "features": [
                {"name": f.name, "trigger": _trigger_dict(f.trigger)}
                for f in domain.features
            ],
            "discount": domain.discount,
            "flags": flags,
            "pickup_flag": next(iter(pickup)) if pickup else None,
            "legend": _legend(domain),
        },
        "teaching": teaching,
        "tests": tests,
        "config": {
            "strategy": curriculum.label,
            "prior_seed": curriculum.prior.seed,
            "n_samples": curriculum.prior.n_samples,
            "suite_seed": suite.seed,
            "suite_m": suite.m,
            "per_tier": suite.per_tier,
            **curriculum.config,
        },
    }
    bundle["session_id"] = payload_digest(bundle)[:12]
    bundle = seal(bundle)

    answers = seal(
        {
            "version": BUNDLE_VERSION,
            "session_id": bundle["session_id"],
            "bundle_integrity": bundle["integrity"],
            "weights": [float(x) for x in domain.true_weights],
            "items": hidden,
        }
    )
    return bundle, answers


def check_pairing(bundle: dict, answers: dict) -> None:
    """Validate both documents and their cross-reference before serving."""
    verify_integrity(bundle, "bundle")
    verify_integrity(answers, "answers")
    if answers.get("bundle_integrity") != bundle.get("integrity"):
        raise DomainMismatch("answers file was not exported with this bundle")
    missing = {t["test_id"] for t in bundle["tests"]} - set(answers["items"])
    if missing:
        raise DomainMismatch(f"answers file lacks tests: {sorted(missing)}")


def write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(payload))
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
