"""Domain configs: JSON load/serialize plus the three built-in task families.

A domain file pins the feature model (named triggers), the true weights, and
a list of grid environments. The built-ins are designed so that optimal
behavior brackets each non-action weight from both sides: for every feature
there are environments where paying it beats a detour and environments where
it does not, which is what makes their policy constraint sets tight.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import SchemaError, SemanticError
from .mdp import (
    Domain,
    FeatureSpec,
    GridEnvironment,
    Trigger,
    grid_from_rows,
)
from .mdp import _tables  # reachability check reuses the planner tables

BUILTIN_NAMES = ("delivery", "tiles", "skateboard")


# ---------------------------------------------------------------------------
# JSON schema


def _require(cond: bool, where: str, msg: str):
    if not cond:
        raise SchemaError(f"{where}: {msg}")


def _parse_trigger(raw, where: str) -> Trigger:
    _require(isinstance(raw, dict), where, "trigger must be an object")
    _require("kind" in raw, where, "trigger needs a 'kind'")
    extra = set(raw) - {"kind", "cell", "flag"}
    _require(not extra, where, f"unknown trigger keys {sorted(extra)}")
    try:
        return Trigger(raw["kind"], raw.get("cell"), raw.get("flag"))
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def domain_from_dict(data: dict) -> Domain:
    """Build and semantically validate a Domain from a parsed config dict."""
    _require(isinstance(data, dict), "$", "config must be an object")
    for key in ("name", "features", "weights", "environments"):
        _require(key in data, "$", f"missing required key {key!r}")
    known = {"name", "features", "weights", "environments", "discount", "flags", "pickup_flag"}
    extra = set(data) - known
    _require(not extra, "$", f"unknown keys {sorted(extra)}")

    name = data["name"]
    _require(isinstance(name, str) and name, "name", "must be a non-empty string")
    flags = tuple(data.get("flags", []))
    _require(all(isinstance(f, str) for f in flags), "flags", "must be strings")
    discount = float(data.get("discount", 1.0))

    raw_features = data["features"]
    _require(isinstance(raw_features, list) and len(raw_features) >= 2,
             "features", "need a list of at least two features")
    features = []
    for i, rf in enumerate(raw_features):
        where = f"features[{i}]"
        _require(isinstance(rf, dict), where, "must be an object")
        _require(isinstance(rf.get("name"), str) and rf["name"], where, "needs a name")
        features.append(FeatureSpec(rf["name"], _parse_trigger(rf.get("trigger"), where)))
    features = tuple(features)
    fnames = [f.name for f in features]
    _require(len(set(fnames)) == len(fnames), "features", "feature names must be unique")

    weights = data["weights"]
    _require(
        isinstance(weights, list) and len(weights) == len(features),
        "weights", f"need exactly {len(features)} numbers",
    )

    pickup_flag = data.get("pickup_flag")
    if pickup_flag is not None:
        _require(pickup_flag in flags, "pickup_flag", f"flag {pickup_flag!r} not declared")

    envs = []
    raw_envs = data["environments"]
    _require(isinstance(raw_envs, list) and raw_envs, "environments", "need a non-empty list")
    for i, re_ in enumerate(raw_envs):
        where = f"environments[{i}]"
        _require(isinstance(re_, dict), where, "must be an object")
        _require(isinstance(re_.get("id"), str) and re_["id"], where, "needs an id")
        _require(isinstance(re_.get("grid"), list) and re_["grid"], where, "needs grid rows")
        starts = re_.get("starts", [re_["start"]] if "start" in re_ else None)
        _require(isinstance(starts, list) and starts, where, "needs 'start' or 'starts'")
        try:
            cells = grid_from_rows(re_["grid"])
        except ValueError as exc:
            raise SchemaError(f"{where}.grid: {exc}") from exc
        start_flags = tuple(bool(re_.get("flags", {}).get(f, False)) for f in flags)
        for j, start in enumerate(starts):
            _require(
                isinstance(start, list) and len(start) == 2,
                f"{where}.starts[{j}]", "must be [x, y]",
            )
            env_id = re_["id"] if len(starts) == 1 else f"{re_['id']}#s{j}"
            try:
                envs.append(
                    GridEnvironment(
                        env_id=env_id,
                        cells=cells,
                        start=(int(start[0]), int(start[1])),
                        features=features,
                        flag_names=flags,
                        start_flags=start_flags,
                        discount=discount,
                        pickup_flag=pickup_flag,
                    )
                )
            except ValueError as exc:
                raise SemanticError(f"{where}: {exc}") from exc

    try:
        domain = Domain(
            name=name,
            features=features,
            true_weights=tuple(float(x) for x in weights),
            environments=tuple(envs),
            flag_names=flags,
            discount=discount,
        )
    except ValueError as exc:
        raise SemanticError(str(exc)) from exc
    _validate_semantics(domain)
    return domain


def _validate_semantics(domain: Domain):
    action_idx = [i for i, f in enumerate(domain.features) if f.trigger.kind == "action"]
    if len(action_idx) != 1:
        raise SemanticError("a domain needs exactly one constant action feature")
    if domain.discount == 1.0 and domain.true_weights[action_idx[0]] >= 0:
        raise SemanticError(
            "undiscounted domains need a negative action weight "
            f"(got {domain.true_weights[action_idx[0]]:.4f})"
        )
    for env in domain.environments:
        tab = _tables(env)
        bad = [s for i, s in enumerate(tab.states) if not tab.reachable[i]]
        if bad:
            cell = (bad[0].x, bad[0].y)
            raise SemanticError(
                f"{env.env_id}: cell {cell} cannot reach the goal"
            )


def load_domain(source) -> Domain:
    """Load a domain from a config path, JSON text, or parsed dict."""
    if isinstance(source, dict):
        return domain_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith(".json")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read domain config: {exc}") from exc
    else:
        text = source
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return domain_from_dict(data)


def serialize_domain(domain: Domain) -> dict:
    """Config dict that round-trips through domain_from_dict."""
    def trig(t: Trigger) -> dict:
        out = {"kind": t.kind}
        if t.cell is not None:
            out["cell"] = t.cell
        if t.flag is not None:
            out["flag"] = t.flag
        return out

    pickup = {e.pickup_flag for e in domain.environments}
    out = {
        "name": domain.name,
        "discount": domain.discount,
        "features": [
            {"name": f.name, "trigger": trig(f.trigger)} for f in domain.features
        ],
        "weights": [float(x) for x in domain.true_weights],
        "environments": [
            {
                "id": env.env_id,
                "grid": env.grid_rows(),
                "start": [env.start[0], env.start[1]],
                **(
                    {"flags": {n: bool(v) for n, v in zip(env.flag_names, env.start_flags)}}
                    if env.flag_names
                    else {}
                ),
            }
            for env in domain.environments
        ],
    }
    if domain.flag_names:
        out["flags"] = list(domain.flag_names)
    if pickup != {None}:
        out["pickup_flag"] = next(iter(pickup - {None}))
    return out


# ---------------------------------------------------------------------------
# Built-in: delivery (mud, one-shot recharge, action)


def _delivery_config() -> dict:
    environments = [
        # Plain corridors and open rooms: action-cost information only.
        {"id": "corridor-4", "grid": ["...G"], "start": [0, 0]},
        {"id": "corridor-6", "grid": [".....G"], "start": [0, 0]},
        {"id": "open-3x3", "grid": ["...", "...", "..G"], "starts": [[0, 0], [2, 0]]},
        # One mud patch next to the start; a two-action detour beats crossing.
        {"id": "patch-detour", "grid": ["...", ".mG", "..."], "start": [0, 1]},
        # Same tradeoff stretched out: the detour over the top costs six
        # actions against four straight through the mud.
        {"id": "patch-detour-wide", "grid": [".....", ".m..G"], "start": [0, 1]},
        # Two avoidable patches in a row.
        {"id": "double-patch-open", "grid": ["......", ".m.m.G", "......"],
         "start": [0, 1]},
        # Walled-off column: crossing the mud saves five actions, so the
        # optimal route goes through it (upper-bounds the mud cost).
        {"id": "patch-worth-crossing", "grid": ["..#..", "..m.G", "..#..", "....."],
         "starts": [[0, 1], [0, 3]]},
        # Single-file corridor through mud: no alternatives, no information.
        {"id": "patch-forced", "grid": ["..m.G"], "start": [0, 0]},
        # Two patches in a corridor whose only bypass costs eight extra
        # actions; going through both is optimal.
        {"id": "double-patch-corridor",
         "grid": [".....", ".###.", ".###.", ".###.", ".m.mG"],
         "start": [0, 4]},
        # Recharge worth a two-action detour.
        {"id": "recharge-detour", "grid": [".r..", "...G", "...."],
         "starts": [[0, 1], [0, 2]]},
        {"id": "recharge-detour-far", "grid": [".r...", "....G", "....."],
         "start": [0, 1]},
        {"id": "recharge-corner", "grid": ["r..", "..G", "..."], "start": [0, 1]},
        # Recharge four actions off the route: not worth it.
        {"id": "recharge-skip", "grid": [".#G", "...", "...", ".r."], "start": [0, 0]},
        # Recharge directly on a forced corridor.
        {"id": "recharge-forced", "grid": ["..r.G"], "start": [0, 0]},
        # Mud on the straight line and a recharge above it.
        {"id": "patch-and-recharge", "grid": [".r...", ".m..G", "....."],
         "starts": [[0, 1], [0, 2]]},
        {"id": "patch-and-recharge-low", "grid": ["......", ".m...G", ".r...."],
         "start": [0, 1]},
    ]
    return {
        "name": "delivery",
        "discount": 1.0,
        "flags": ["recharged"],
        "features": [
            {"name": "mud", "trigger": {"kind": "exit", "cell": "mud"}},
            {"name": "recharge",
             "trigger": {"kind": "enter_once", "cell": "recharge", "flag": "recharged"}},
            {"name": "action", "trigger": {"kind": "action"}},
        ],
        "weights": [-3.0, 3.5, -1.0],
        "environments": environments,
    }


# ---------------------------------------------------------------------------
# Built-in: tiles (two differently-penalized tile kinds, action)


def _tiles_config() -> dict:
    environments = [
        {"id": "corridor-5", "grid": ["....G"], "start": [0, 0]},
        {"id": "open-3x3", "grid": ["...", "...", "..G"], "starts": [[0, 0], [2, 0]]},
        # Light tile on the straight line: crossing beats a two-action detour.
        {"id": "a-cross", "grid": ["...", ".aG", "..."], "starts": [[0, 1], [0, 2]]},
        {"id": "a-cross-wide", "grid": ["....", ".a.G", "...."],
         "starts": [[0, 1], [0, 0]]},
        # Light tile avoidable for free.
        {"id": "a-free-avoid", "grid": ["...", "a..", "..G"], "start": [0, 0]},
        # Two light tiles in a row: the two-action detour now wins.
        {"id": "a-double-detour", "grid": [".....", ".aa.G", "....."],
         "starts": [[0, 1], [0, 0]]},
        # Heavy tile on the straight line: always detour.
        {"id": "b-avoid", "grid": ["...", ".bG", "..."], "starts": [[0, 1], [0, 2]]},
        {"id": "b-avoid-wide", "grid": [".....", ".b..G", "....."],
         "starts": [[0, 1], [0, 0]]},
        # Walled corridor where crossing the heavy tile saves six actions.
        {"id": "b-worth-crossing",
         "grid": ["..#..", "..b.G", "..#..", "..#..", "....."],
         "starts": [[0, 1], [1, 1]]},
        # Parallel corridors: light tile versus heavy tile.
        {"id": "a-or-b", "grid": [".a.", ".#G", ".b."], "start": [0, 1]},
        # Two lights versus one heavy.
        {"id": "aa-or-b", "grid": [".aa.", ".##G", ".b.."], "start": [0, 1]},
        # Three lights versus one heavy (a tight comparison).
        {"id": "aaa-or-b", "grid": [".aaa.", ".###G", ".b..."], "start": [0, 1]},
        # Open room with scattered tiles.
        {"id": "scatter", "grid": ["..a.", ".b..", "...G"],
         "starts": [[0, 0], [0, 2], [3, 0]]},
    ]
    return {
        "name": "tiles",
        "discount": 1.0,
        "features": [
            {"name": "tile-a", "trigger": {"kind": "enter", "cell": "tile-a"}},
            {"name": "tile-b", "trigger": {"kind": "enter", "cell": "tile-b"}},
            {"name": "action", "trigger": {"kind": "action"}},
        ],
        "weights": [-1.5, -5.0, -1.0],
        "environments": environments,
    }


# ---------------------------------------------------------------------------
# Built-in: skateboard (cheaper steps while riding or on a marked path)


def _skateboard_config() -> dict:
    environments = [
        {"id": "corridor-5", "grid": ["....G"], "start": [0, 0]},
        {"id": "open-3x3", "grid": ["...", "...", "..G"], "starts": [[0, 0], [2, 0]]},
        # Board on the start cell: picking it up pays off on long hauls only.
        {"id": "board-long", "grid": ["s.....G"], "start": [0, 0]},
        {"id": "board-short", "grid": ["s.G"], "start": [0, 0]},
        {"id": "board-mid", "grid": [".s....G"], "starts": [[0, 0], [1, 0]]},
        # Board in a nook above the corridor: stepping away commits to
        # walking, so the pickup tradeoff shows up in one-action deviations.
        {"id": "board-nook-take", "grid": ["s.........", ".........G"],
         "starts": [[0, 1], [1, 1]]},
        {"id": "board-nook-skip", "grid": ["s......", "......G"], "start": [0, 1]},
        # Wall-split fork: marked path on one side, plain corridor on the
        # other, rejoining only at the far end.
        {"id": "path-fork-long", "grid": [".ppppppp.", ".#######.", "........G"],
         "starts": [[0, 1], [0, 2]]},
        {"id": "path-fork-short", "grid": [".pppp.", ".####.", ".....G"],
         "start": [0, 1]},
        {"id": "path-forced", "grid": ["pppG"], "start": [0, 0]},
        # Equal-length routes, one along marked path cells.
        {"id": "path-choice", "grid": [".....", "ppppG"], "starts": [[0, 0], [4, 0]]},
        # Board and path both available.
        {"id": "board-then-path", "grid": ["s.ppppp.G", "........."],
         "starts": [[0, 0], [0, 1]]},
        {"id": "ride-open", "grid": ["s...", "....", "...G"], "starts": [[0, 0], [3, 0]]},
    ]
    return {
        "name": "skateboard",
        "discount": 1.0,
        "flags": ["has_skateboard"],
        "pickup_flag": "has_skateboard",
        "features": [
            {"name": "riding", "trigger": {"kind": "move_with_flag", "flag": "has_skateboard"}},
            {"name": "path", "trigger": {"kind": "enter", "cell": "path"}},
            {"name": "action", "trigger": {"kind": "action"}},
        ],
        "weights": [0.4, 0.3, -1.0],
        "environments": environments,
    }


_BUILTIN_CONFIGS = {
    "delivery": _delivery_config,
    "tiles": _tiles_config,
    "skateboard": _skateboard_config,
}


def builtin_domain(name: str) -> Domain:
    if name not in _BUILTIN_CONFIGS:
        raise SemanticError(
            f"unknown builtin domain {name!r}; available: {', '.join(BUILTIN_NAMES)}"
        )
    return domain_from_dict(_BUILTIN_CONFIGS[name]())


def resolve_domain(spec: str) -> Domain:
    """A CLI-friendly resolver: builtin name or path to a config file."""
    if spec in _BUILTIN_CONFIGS:
        return builtin_domain(spec)
    return load_domain(Path(spec))
