"""Command line: teach, assess, oracle, export-session, serve.

Each command is a thin wrapper over the library. Exit codes: 0 success,
1 oracle mismatch, 2 configuration problem, 3 infeasible computation,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .assessment import TestItem, TestSuite, build_test_suite, trajectory_from_actions
from .beliefs import BeliefRegion
from .bundle import build_session, read_json, write_json
from .constraints import ConstraintSet, demo_constraints_standard, policy_bec
from .beliefs import estimate_area
from .curriculum import (
    Curriculum,
    CurriculumStep,
    action_negative_prior,
    full_sphere_prior,
    select_baseline_curriculum,
    select_counterfactual_curriculum,
    select_feature_scaffolded,
    sign_orthant_prior,
)
from .domains import BUILTIN_NAMES, builtin_domain, load_domain, serialize_domain
from .errors import (
    ConfigurationError,
    DomainMismatch,
    InfeasibleComputation,
)
from .mdp import Domain, enumerate_candidate_demos, optimal_demo, solve_cached
from .oracles import membership_report, planner_report, redundancy_report
from .service import create_app

EXIT_OK = 0
EXIT_ORACLE = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4

PORT_ENV_VAR = "POLICYTEACH_PORT"

# Step caps mirroring the study sessions: five demonstrations sufficed for
# the three-feature domains, the skateboard domain got a little more room.
DEFAULT_STEP_CAP = {"delivery": 5, "tiles": 5, "skateboard": 7}

_PRIORS = {
    "action-negative": action_negative_prior,
    "sign-orthant": sign_orthant_prior,
    "full-sphere": full_sphere_prior,
}


def _resolve_domain(ref: str) -> tuple[Domain, dict]:
    """Load a domain from a builtin name or config path, plus an embeddable
    reference so output files stay self-contained."""
    if ref in BUILTIN_NAMES:
        return builtin_domain(ref), {"builtin": ref}
    path = Path(ref)
    if not path.exists():
        raise ConfigurationError(
            f"{ref!r} is neither a builtin domain {BUILTIN_NAMES} nor a config file"
        )
    domain = load_domain(path)
    return domain, {"config": serialize_domain(domain)}


def _domain_from_ref(ref: dict) -> Domain:
    if "builtin" in ref:
        return builtin_domain(ref["builtin"])
    return load_domain(ref["config"])


def _belief_spec(region: BeliefRegion, name: str) -> dict:
    return {"name": name, "n_samples": region.n_samples, "seed": region.seed}


# ---------------------------------------------------------------------------
# teach


def cmd_teach(args) -> int:
    domain, ref = _resolve_domain(args.domain)
    max_steps = (
        args.max_steps
        if args.max_steps is not None
        else DEFAULT_STEP_CAP.get(domain.name)
    )
    if args.strategy == "counterfactual":
        prior_name = "action-negative"
        if args.scaffolded:
            curriculum = select_feature_scaffolded(
                domain, "counterfactual", m=args.m, epsilon=args.epsilon,
                seed=args.seed, style=args.style, gain_ratio=args.gain_ratio,
                max_steps=max_steps,
            )
        else:
            curriculum = select_counterfactual_curriculum(
                domain, m=args.m, epsilon=args.epsilon, seed=args.seed,
                style=args.style, gain_ratio=args.gain_ratio, max_steps=max_steps,
            )
    else:
        prior_name = "full-sphere"
        if args.scaffolded:
            curriculum = select_feature_scaffolded(
                domain, "baseline", seed=args.seed, max_steps=max_steps
            )
        else:
            curriculum = select_baseline_curriculum(
                domain, seed=args.seed, max_steps=max_steps
            )

    areas = curriculum.area_trajectory()
    steps = []
    for step, area_after in zip(curriculum.steps, areas[1:]):
        entry = {
            "env_id": step.demo.demo_id,
            "actions": step.demo.trajectory.actions(),
            "info_gain": step.info_gain,
            "area_after": area_after,
        }
        if args.strategy == "baseline":
            cs = demo_constraints_standard(
                step.demo, solve_cached(step.demo.env, domain.weight_array)
            )
            entry["demo_area"] = estimate_area(
                cs, curriculum.prior.n_samples, curriculum.prior.seed
            ).fraction
        steps.append(entry)

    payload = {
        "kind": "curriculum",
        "domain": ref,
        "strategy": curriculum.strategy,
        "scaffolded": curriculum.scaffolded,
        "label": curriculum.label,
        "prior": _belief_spec(curriculum.prior, prior_name),
        "config": curriculum.config,
        "steps": steps,
        "areas": areas,
        "final_belief": {
            "normals": [list(map(float, n)) for n in curriculum.final_belief.constraints.normals],
            "n_samples": curriculum.final_belief.n_samples,
            "seed": curriculum.final_belief.seed,
        },
    }
    out = args.out or f"curriculum-{domain.name}-{curriculum.label.replace('/', '-')}.json"
    write_json(out, payload)

    print(f"{domain.name}: {curriculum.label} curriculum, {len(curriculum.steps)} steps")
    print(f"belief area: {' -> '.join(f'{a:.4f}' for a in areas)}")
    for entry in steps:
        line = (f"  {entry['env_id']}: gain={entry['info_gain']:.4f} "
                f"area_after={entry['area_after']:.4f}")
        if "demo_area" in entry:
            line += f" demo_area={entry['demo_area']:.4f}"
        print(line)
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# assess


def _belief_from_flag(domain: Domain, flag: str) -> tuple[BeliefRegion, dict]:
    if flag == "sign-orthant":
        region = sign_orthant_prior(domain)
        return region, _belief_spec(region, "sign-orthant")
    if flag.startswith("curriculum:"):
        payload = read_json(flag.split(":", 1)[1])
        if payload.get("kind") != "curriculum":
            raise ConfigurationError("--belief curriculum: file is not a curriculum")
        ref_domain = _domain_from_ref(payload["domain"])
        if ref_domain.name != domain.name:
            raise DomainMismatch(
                f"curriculum is for {ref_domain.name!r}, not {domain.name!r}"
            )
        final = payload["final_belief"]
        region = BeliefRegion(
            ConstraintSet(domain.num_features, [np.array(n) for n in final["normals"]]),
            final["n_samples"],
            final["seed"],
        )
        return region, {"name": "curriculum", "source_label": payload["label"]}
    raise ConfigurationError(
        f"--belief must be 'sign-orthant' or 'curriculum:<file>', got {flag!r}"
    )


def cmd_assess(args) -> int:
    domain, ref = _resolve_domain(args.domain)
    belief, belief_spec = _belief_from_flag(domain, args.belief)
    suite = build_test_suite(
        domain, post_belief=belief, per_tier=args.per_tier, m=args.m,
        seed=args.seed, style=args.style,
    )
    payload = {
        "kind": "suite",
        "domain": ref,
        "belief": belief_spec,
        "per_tier": suite.per_tier,
        "m": suite.m,
        "seed": suite.seed,
        "items": [
            {
                "test_id": item.test_id,
                "tier": item.tier,
                "overlap": item.overlap,
                "difficulty": item.difficulty,
                "actions": item.optimal.actions(),
            }
            for item in suite.items
        ],
    }
    out = args.out or f"suite-{domain.name}.json"
    write_json(out, payload)
    print(f"{domain.name}: {len(suite.items)} tests, {suite.per_tier} per tier")
    for item in suite.items:
        print(f"  {item.tier:6s} {item.test_id}: overlap={item.overlap:.4f} "
              f"difficulty={item.difficulty:.1f}")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle


def _small_envs(domain: Domain, limit: int, max_side: int = 6):
    seen = set()
    out = []
    for env in domain.environments:
        if env.width > max_side or env.height > max_side:
            continue
        if env.cells in seen:
            continue
        seen.add(env.cells)
        out.append(env)
        if len(out) >= limit:
            break
    return out


def cmd_oracle(args) -> int:
    domain, _ = _resolve_domain(args.domain)
    reports = []
    if args.check == "planner-optimality":
        reports.append(planner_report(domain, count=args.count, seed=args.seed))
    elif args.check == "bec-membership":
        for env in _small_envs(domain, args.count):
            reports.append(
                membership_report(
                    domain, env, n_weights=args.n_weights, seed=args.seed,
                    flip_sign=args.flip_sign,
                )
            )
    else:
        demos = enumerate_candidate_demos(domain)
        full = ConstraintSet(domain.num_features)
        for demo in demos:
            policy = solve_cached(demo.env, domain.weight_array)
            full = full.union(demo_constraints_standard(demo, policy))
        minimal = policy_bec(domain)
        if args.flip_sign is not None:
            normals = [
                -n if i == args.flip_sign % len(minimal) else n
                for i, n in enumerate(minimal.normals)
            ]
            minimal = ConstraintSet(minimal.dim, normals)
        reports.append(redundancy_report(full, minimal, seed=args.seed))

    for report in reports:
        print(json.dumps(report, sort_keys=True))
    passed = all(r["passed"] for r in reports)
    print(f"oracle {args.check}: {'pass' if passed else 'FAIL'} "
          f"({len(reports)} report(s))")
    return EXIT_OK if passed else EXIT_ORACLE


# ---------------------------------------------------------------------------
# export-session


def _rebuild_curriculum(domain: Domain, payload: dict) -> Curriculum:
    prior_spec = payload["prior"]
    prior = _PRIORS[prior_spec["name"]](
        domain, prior_spec["n_samples"], prior_spec["seed"]
    )
    final_spec = payload["final_belief"]
    final = BeliefRegion(
        ConstraintSet(
            domain.num_features, [np.array(n) for n in final_spec["normals"]]
        ),
        final_spec["n_samples"],
        final_spec["seed"],
    )
    steps = []
    for entry in payload["steps"]:
        demo = optimal_demo(domain, domain.environment(entry["env_id"]))
        if demo.trajectory.actions() != entry["actions"]:
            raise DomainMismatch(
                f"{entry['env_id']}: stored demonstration no longer matches "
                f"the domain's optimal policy"
            )
        # belief_after is not serialized into bundles; the final region
        # stands in for every step when round-tripping through files.
        steps.append(
            CurriculumStep(demo, ConstraintSet(domain.num_features),
                           entry["info_gain"], final)
        )
    return Curriculum(
        payload["strategy"], payload["scaffolded"], prior, tuple(steps), final,
        payload.get("config", {}),
    )


def _rebuild_suite(domain: Domain, payload: dict) -> TestSuite:
    items = []
    for entry in payload["items"]:
        env = domain.environment(entry["test_id"])
        items.append(
            TestItem(
                env=env,
                optimal=trajectory_from_actions(env, entry["actions"]),
                overlap=entry["overlap"],
                difficulty=entry["difficulty"],
                tier=entry["tier"],
            )
        )
    return TestSuite(
        domain_name=domain.name,
        items=tuple(items),
        per_tier=payload["per_tier"],
        m=payload["m"],
        seed=payload["seed"],
    )


def cmd_export_session(args) -> int:
    cur_payload = read_json(args.curriculum)
    suite_payload = read_json(args.suite)
    if cur_payload.get("kind") != "curriculum":
        raise ConfigurationError(f"{args.curriculum}: not a curriculum file")
    if suite_payload.get("kind") != "suite":
        raise ConfigurationError(f"{args.suite}: not a suite file")
    if cur_payload["domain"] != suite_payload["domain"]:
        raise DomainMismatch("curriculum and suite were built for different domains")
    domain = _domain_from_ref(cur_payload["domain"])
    curriculum = _rebuild_curriculum(domain, cur_payload)
    suite = _rebuild_suite(domain, suite_payload)
    bundle_doc, answers_doc = build_session(domain, curriculum, suite)
    write_json(args.out_bundle, bundle_doc)
    write_json(args.out_answers, answers_doc)
    print(f"session {bundle_doc['session_id']}: "
          f"{len(bundle_doc['teaching'])} teaching steps, "
          f"{len(bundle_doc['tests'])} tests")
    print(f"wrote {args.out_bundle} and {args.out_answers}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# serve


def cmd_serve(args) -> int:
    import uvicorn

    bundle = read_json(args.bundle)
    answers = read_json(args.answers)
    app = create_app(bundle, answers, args.log)
    port = args.port
    if port is None:
        port = int(os.environ.get(PORT_ENV_VAR, "8000"))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policyteach",
        description="Machine teaching of grid-world reward policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    teach = sub.add_parser("teach", help="select a demonstration curriculum")
    teach.add_argument("--domain", required=True)
    teach.add_argument("--strategy", choices=("counterfactual", "baseline"),
                       default="counterfactual")
    teach.add_argument("--scaffolded", action="store_true")
    teach.add_argument("--style", choices=("suffix", "deviation"), default="suffix")
    teach.add_argument("--gain-ratio", type=float, default=1.0,
                       help="accept the earliest candidate reaching this fraction "
                            "of the best gain (1.0 = always take the best)")
    teach.add_argument("--m", type=int, default=10)
    teach.add_argument("--epsilon", type=float, default=1e-3)
    teach.add_argument("--seed", type=int, default=0)
    teach.add_argument("--max-steps", type=int, default=None)
    teach.add_argument("--out", default=None)
    teach.set_defaults(func=cmd_teach)

    assess = sub.add_parser("assess", help="build a difficulty-tiered test suite")
    assess.add_argument("--domain", required=True)
    assess.add_argument("--belief", default="sign-orthant",
                        help="'sign-orthant' or 'curriculum:<file>'")
    assess.add_argument("--per-tier", type=int, default=2)
    assess.add_argument("--m", type=int, default=10)
    assess.add_argument("--seed", type=int, default=0)
    assess.add_argument("--style", choices=("suffix", "deviation"), default="suffix")
    assess.add_argument("--out", default=None)
    assess.set_defaults(func=cmd_assess)

    oracle = sub.add_parser("oracle", help="run a brute-force cross-check")
    oracle.add_argument("--domain", required=True)
    oracle.add_argument("--check", required=True,
                        choices=("planner-optimality", "bec-membership", "redundancy"))
    oracle.add_argument("--count", type=int, default=20)
    oracle.add_argument("--n-weights", type=int, default=2000)
    oracle.add_argument("--seed", type=int, default=0)
    oracle.add_argument("--flip-sign", type=int, default=None,
                        help="negative control: negate one constraint and expect "
                             "the check to fail")
    oracle.set_defaults(func=cmd_oracle)

    export = sub.add_parser("export-session", help="bundle a curriculum and suite")
    export.add_argument("--curriculum", required=True)
    export.add_argument("--suite", required=True)
    export.add_argument("--out-bundle", default="bundle.json")
    export.add_argument("--out-answers", default="answers.json")
    export.set_defaults(func=cmd_export_session)

    serve = sub.add_parser("serve", help="serve a session bundle over HTTP")
    serve.add_argument("--bundle", required=True)
    serve.add_argument("--answers", required=True)
    serve.add_argument("--log", default="responses.jsonl")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=None,
                       help=f"default 8000, or ${PORT_ENV_VAR} when set")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleComputation as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as exc:  # pragma: no cover - last resort
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
