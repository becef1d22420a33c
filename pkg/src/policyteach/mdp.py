"""Deterministic gridworld MDPs with transition-triggered reward features.

An environment is a rectangular grid of annotated cells plus a start state.
States are (x, y, flags) where flags are named booleans (e.g. whether a
skateboard has been picked up). Actions are the four moves plus an optional
pickup; moving into a wall or off the grid is illegal rather than a no-op.
Rewards are linear in a feature vector computed per transition: boolean
triggers tied to cell annotations plus a constant-1 feature for taking any
action. Episodes end on reaching the goal cell.
"""

from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CycleDetected,
    NonTerminating,
    PolicyMismatch,
    Unreachable,
)

# Cell annotations and their single-character grid legend.
EMPTY = "empty"
WALL = "wall"
MUD = "mud"
RECHARGE = "recharge"
GOAL = "goal"
TILE_A = "tile-a"
TILE_B = "tile-b"
PATH = "path"
SKATEBOARD = "skateboard"

CELL_FOR_CHAR = {
    ".": EMPTY,
    "#": WALL,
    "m": MUD,
    "r": RECHARGE,
    "G": GOAL,
    "a": TILE_A,
    "b": TILE_B,
    "p": PATH,
    "s": SKATEBOARD,
}
CHAR_FOR_CELL = {cell: ch for ch, cell in CELL_FOR_CHAR.items()}

UP, DOWN, LEFT, RIGHT, PICKUP = "up", "down", "left", "right", "pickup"
# Fixed order used everywhere ties between equally-valued actions are broken.
ACTION_ORDER = (UP, DOWN, LEFT, RIGHT, PICKUP)
MOVE_DELTAS = {UP: (0, -1), DOWN: (0, 1), LEFT: (-1, 0), RIGHT: (1, 0)}

# Absolute tolerance for treating two action values as tied during greedy
# policy extraction, and for most exact-ish float comparisons in this module.
TIE_TOL = 1e-9


@dataclass(frozen=True)
class Trigger:
    """When a boolean feature fires.

    kind is one of:
      action          fires on every transition (the constant-1 feature)
      exit            fires when a move leaves a cell with the given annotation
      enter           fires when a move lands on a cell with the given annotation
      enter_once      like enter, but only while the named flag is unset;
                      the transition also sets the flag (one-shot bonus cells)
      move_with_flag  fires on any move taken while the named flag is set
    """

    kind: str
    cell: str | None = None
    flag: str | None = None

    def __post_init__(self):
        if self.kind not in ("action", "exit", "enter", "enter_once", "move_with_flag"):
            raise ValueError(f"unknown trigger kind: {self.kind!r}")
        if self.kind in ("exit", "enter", "enter_once") and self.cell is None:
            raise ValueError(f"trigger {self.kind!r} needs a cell annotation")
        if self.kind in ("enter_once", "move_with_flag") and self.flag is None:
            raise ValueError(f"trigger {self.kind!r} needs a flag name")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    trigger: Trigger


@dataclass(frozen=True)
class State:
    x: int
    y: int
    flags: tuple[bool, ...] = ()


@dataclass(frozen=True)
class GridEnvironment:
    """One gridworld instance: annotated cells, a start state, a feature model.

    cells is stored row-major: cells[y][x]. The feature model (feature specs,
    flag names, pickup flag, discount) is carried on the environment so the
    planner is self-contained; environments of one domain share these fields.
    """

    env_id: str
    cells: tuple[tuple[str, ...], ...]
    start: tuple[int, int]
    features: tuple[FeatureSpec, ...]
    flag_names: tuple[str, ...] = ()
    start_flags: tuple[bool, ...] = ()
    discount: float = 1.0
    pickup_flag: str | None = None

    def __post_init__(self):
        if not self.cells or not self.cells[0]:
            raise ValueError(f"{self.env_id}: empty grid")
        width = len(self.cells[0])
        if any(len(row) != width for row in self.cells):
            raise ValueError(f"{self.env_id}: grid is not rectangular")
        goals = [
            (x, y)
            for y, row in enumerate(self.cells)
            for x, cell in enumerate(row)
            if cell == GOAL
        ]
        if len(goals) != 1:
            raise ValueError(f"{self.env_id}: need exactly one goal cell, found {len(goals)}")
        if len(self.start_flags) != len(self.flag_names):
            raise ValueError(f"{self.env_id}: start_flags length != flag_names length")
        x, y = self.start
        if not (0 <= x < width and 0 <= y < len(self.cells)):
            raise ValueError(f"{self.env_id}: start {self.start} out of bounds")
        if self.cells[y][x] == WALL:
            raise ValueError(f"{self.env_id}: start {self.start} is a wall")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError(f"{self.env_id}: discount must be in (0, 1]")
        if self.pickup_flag is not None and self.pickup_flag not in self.flag_names:
            raise ValueError(f"{self.env_id}: pickup flag {self.pickup_flag!r} not declared")
        for spec in self.features:
            if spec.trigger.flag is not None and spec.trigger.flag not in self.flag_names:
                raise ValueError(
                    f"{self.env_id}: feature {spec.name!r} references unknown flag"
                )

    @property
    def width(self) -> int:
        return len(self.cells[0])

    @property
    def height(self) -> int:
        return len(self.cells)

    @property
    def num_features(self) -> int:
        return len(self.features)

    @property
    def goal(self) -> tuple[int, int]:
        for y, row in enumerate(self.cells):
            for x, cell in enumerate(row):
                if cell == GOAL:
                    return (x, y)
        raise AssertionError("validated on construction")

    def cell_at(self, x: int, y: int) -> str:
        return self.cells[y][x]

    @property
    def start_state(self) -> State:
        return State(self.start[0], self.start[1], self.start_flags)

    def grid_rows(self) -> list[str]:
        """The grid re-encoded with the one-character legend."""
        return ["".join(CHAR_FOR_CELL[c] for c in row) for row in self.cells]


def grid_from_rows(rows: list[str] | tuple[str, ...]) -> tuple[tuple[str, ...], ...]:
    """Decode legend strings (one per row) into an annotation grid."""
    out = []
    for y, row in enumerate(rows):
        cells = []
        for x, ch in enumerate(row):
            if ch not in CELL_FOR_CHAR:
                raise ValueError(f"unknown grid character {ch!r} at row {y}, col {x}")
            cells.append(CELL_FOR_CHAR[ch])
        out.append(tuple(cells))
    return tuple(out)


# ---------------------------------------------------------------------------
# Transitions and features


def legal_actions(env: GridEnvironment, state: State) -> list[str]:
    """Actions available in `state`, in the fixed tie-breaking order."""
    if (state.x, state.y) == env.goal:
        return []
    acts = []
    for action in ACTION_ORDER:
        if action == PICKUP:
            if (
                env.pickup_flag is not None
                and env.cell_at(state.x, state.y) == SKATEBOARD
                and not state.flags[env.flag_names.index(env.pickup_flag)]
            ):
                acts.append(action)
            continue
        dx, dy = MOVE_DELTAS[action]
        nx, ny = state.x + dx, state.y + dy
        if 0 <= nx < env.width and 0 <= ny < env.height and env.cell_at(nx, ny) != WALL:
            acts.append(action)
    return acts


def apply_action(env: GridEnvironment, state: State, action: str) -> State:
    """Deterministic successor state; raises ValueError for illegal actions."""
    if action not in legal_actions(env, state):
        raise ValueError(f"illegal action {action!r} in state {state}")
    if action == PICKUP:
        idx = env.flag_names.index(env.pickup_flag)
        flags = tuple(True if i == idx else f for i, f in enumerate(state.flags))
        return State(state.x, state.y, flags)
    dx, dy = MOVE_DELTAS[action]
    nx, ny = state.x + dx, state.y + dy
    flags = list(state.flags)
    for spec in env.features:
        trig = spec.trigger
        if trig.kind == "enter_once" and env.cell_at(nx, ny) == trig.cell:
            fi = env.flag_names.index(trig.flag)
            flags[fi] = True
    return State(nx, ny, tuple(flags))


def transition_features(
    env: GridEnvironment, state: State, action: str, next_state: State
) -> np.ndarray:
    """Feature vector of one (s, a, s') transition."""
    phi = np.zeros(env.num_features)
    for i, spec in enumerate(env.features):
        trig = spec.trigger
        if trig.kind == "action":
            phi[i] = 1.0
        elif action == PICKUP:
            continue
        elif trig.kind == "exit":
            phi[i] = 1.0 if env.cell_at(state.x, state.y) == trig.cell else 0.0
        elif trig.kind == "enter":
            phi[i] = 1.0 if env.cell_at(next_state.x, next_state.y) == trig.cell else 0.0
        elif trig.kind == "enter_once":
            fi = env.flag_names.index(trig.flag)
            fires = (
                env.cell_at(next_state.x, next_state.y) == trig.cell
                and not state.flags[fi]
            )
            phi[i] = 1.0 if fires else 0.0
        elif trig.kind == "move_with_flag":
            fi = env.flag_names.index(trig.flag)
            phi[i] = 1.0 if state.flags[fi] else 0.0
    return phi


# ---------------------------------------------------------------------------
# Planner tables

_NO_STATE = -1


class _Tables:
    """Dense per-environment tables: states, transitions, features."""

    def __init__(self, env: GridEnvironment):
        self.env = env
        nf = len(env.flag_names)
        flag_combos = [
            tuple(bool((mask >> i) & 1) for i in range(nf)) for mask in range(2**nf)
        ]
        self.states: list[State] = [
            State(x, y, flags)
            for y in range(env.height)
            for x in range(env.width)
            if env.cell_at(x, y) != WALL
            for flags in flag_combos
        ]
        self.index = {s: i for i, s in enumerate(self.states)}
        n, na, k = len(self.states), len(ACTION_ORDER), env.num_features
        self.next_idx = np.full((n, na), _NO_STATE, dtype=np.int64)
        self.feats = np.zeros((n, na, k))
        self.terminal = np.zeros(n, dtype=bool)
        for si, s in enumerate(self.states):
            if (s.x, s.y) == env.goal:
                self.terminal[si] = True
                continue
            for action in legal_actions(env, s):
                ai = ACTION_ORDER.index(action)
                s2 = apply_action(env, s, action)
                self.next_idx[si, ai] = self.index[s2]
                self.feats[si, ai] = transition_features(env, s, action, s2)
        self.reachable = self._reachable_mask()

    def _reachable_mask(self) -> np.ndarray:
        """States whose position can reach the goal (moves are symmetric, so
        a BFS over positions from the goal suffices)."""
        env = self.env
        seen = {env.goal}
        queue = deque([env.goal])
        while queue:
            x, y = queue.popleft()
            for dx, dy in MOVE_DELTAS.values():
                nx, ny = x + dx, y + dy
                if (
                    0 <= nx < env.width
                    and 0 <= ny < env.height
                    and env.cell_at(nx, ny) != WALL
                    and (nx, ny) not in seen
                ):
                    seen.add((nx, ny))
                    queue.append((nx, ny))
        return np.array([(s.x, s.y) in seen for s in self.states], dtype=bool)


@functools.lru_cache(maxsize=4096)
def _tables(env: GridEnvironment) -> _Tables:
    return _Tables(env)


# ---------------------------------------------------------------------------
# Planning


@dataclass(frozen=True, eq=False)
class Policy:
    """A total greedy policy for one environment under one weight vector."""

    env: GridEnvironment
    weights: tuple[float, ...]
    _action_idx: np.ndarray = field(repr=False)
    _values: np.ndarray = field(repr=False)
    _fmemo: dict = field(default_factory=dict, repr=False)

    def action(self, state: State) -> str | None:
        """The chosen action, or None at terminal states."""
        tab = _tables(self.env)
        ai = self._action_idx[tab.index[state]]
        return None if ai < 0 else ACTION_ORDER[ai]

    def value(self, state: State) -> float:
        tab = _tables(self.env)
        return float(self._values[tab.index[state]])

    def states(self) -> list[State]:
        """Reachable non-terminal states this policy is defined on."""
        tab = _tables(self.env)
        return [
            s
            for i, s in enumerate(tab.states)
            if tab.reachable[i] and not tab.terminal[i]
        ]

    def as_dict(self) -> dict[State, str]:
        return {s: self.action(s) for s in self.states()}


def _action_weight_index(env: GridEnvironment) -> int | None:
    idxs = [i for i, f in enumerate(env.features) if f.trigger.kind == "action"]
    return idxs[0] if len(idxs) == 1 else None


def solve_optimal_policy(
    env: GridEnvironment, weights, tol: float = 1e-8
) -> Policy:
    """Value iteration to Bellman residual < tol, then greedy extraction.

    Weights are normalized to unit length first, which makes planning exactly
    invariant to positive rescaling. Ties between equally-valued actions are
    broken by the fixed action order. Raises NonTerminating when values
    cannot converge (undiscounted with non-negative action weight, or a
    positive-reward cycle), and Unreachable when the start is cut off.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (env.num_features,):
        raise ValueError(f"expected {env.num_features} weights, got shape {w.shape}")
    norm = float(np.linalg.norm(w))
    if norm < 1e-12:
        raise ValueError("weight vector is (nearly) zero")
    w = w / norm

    ai = _action_weight_index(env)
    if env.discount == 1.0 and ai is not None and w[ai] >= 0:
        raise NonTerminating(
            f"{env.env_id}: undiscounted planning needs a negative action weight"
        )

    tab = _tables(env)
    start_idx = tab.index.get(env.start_state)
    if start_idx is None or not tab.reachable[start_idx]:
        raise Unreachable(f"{env.env_id}: goal unreachable from start {env.start}")

    n = len(tab.states)
    rewards = tab.feats @ w  # (n, A)
    legal = tab.next_idx != _NO_STATE
    next_idx = np.where(legal, tab.next_idx, 0)
    active = tab.reachable & ~tab.terminal

    V = np.zeros(n)
    # Undiscounted convergence needs at most n sweeps (all cycles in a valid
    # environment have negative reward, so this is Bellman-Ford); anything
    # still moving after that is a diverging value.
    max_sweeps = n + 8 if env.discount == 1.0 else 100_000
    for _ in range(max_sweeps):
        Q = np.where(legal, rewards + env.discount * V[next_idx], -np.inf)
        V_new = np.where(active, Q.max(axis=1), 0.0)
        residual = float(np.max(np.abs(V_new - V))) if n else 0.0
        V = V_new
        if residual < tol:
            break
    else:
        raise NonTerminating(
            f"{env.env_id}: value iteration did not converge (positive cycle?)"
        )

    Q = np.where(legal, rewards + env.discount * V[next_idx], -np.inf)
    best = Q.max(axis=1)
    action_idx = np.full(n, -1, dtype=np.int64)
    for si in range(n):
        if not active[si]:
            continue
        # First action (in the fixed order) within tolerance of the maximum.
        for aj in range(len(ACTION_ORDER)):
            if legal[si, aj] and Q[si, aj] >= best[si] - TIE_TOL:
                action_idx[si] = aj
                break
    return Policy(env, tuple(float(x) for x in w), action_idx, V)


@functools.lru_cache(maxsize=20_000)
def _solve_cached(env: GridEnvironment, w_key: tuple, tol: float) -> Policy:
    return solve_optimal_policy(env, np.array(w_key), tol)


def solve_cached(env: GridEnvironment, weights, tol: float = 1e-8) -> Policy:
    """Memoized variant of solve_optimal_policy (weights normalized first)."""
    w = np.asarray(weights, dtype=float)
    w = w / np.linalg.norm(w)
    return _solve_cached(env, tuple(float(x) for x in w), tol)


# ---------------------------------------------------------------------------
# Trajectories


@dataclass(frozen=True)
class Trajectory:
    """A chained sequence of (state, action, next_state) transitions with
    cached discounted feature counts."""

    env_id: str
    steps: tuple[tuple[State, str, State], ...]
    features: tuple[float, ...]

    @property
    def feature_array(self) -> np.ndarray:
        return np.array(self.features)

    @property
    def start(self) -> State:
        return self.steps[0][0] if self.steps else None

    @property
    def end(self) -> State:
        return self.steps[-1][2] if self.steps else None

    def actions(self) -> list[str]:
        return [a for _, a, _ in self.steps]

    def reward(self, weights) -> float:
        return float(np.dot(np.asarray(weights, dtype=float), self.feature_array))


def trajectory_features(env: GridEnvironment, steps) -> np.ndarray:
    """Discounted feature sum of a transition sequence.

    Accumulated back-to-front (phi_t + gamma * suffix) so the result is
    bit-identical to the successor-feature recursion used by the planner.
    """
    total = np.zeros(env.num_features)
    for s, a, s2 in reversed(list(steps)):
        total = transition_features(env, s, a, s2) + env.discount * total
    return total


def make_trajectory(env: GridEnvironment, steps) -> Trajectory:
    steps = tuple(steps)
    for (s, a, s2), nxt in zip(steps, steps[1:]):
        if s2 != nxt[0]:
            raise ValueError("trajectory steps are not chained")
    feats = trajectory_features(env, steps)
    return Trajectory(env.env_id, steps, tuple(float(x) for x in feats))


def rollout(env: GridEnvironment, policy: Policy, start: State | None = None) -> Trajectory:
    """Follow `policy` from `start` (default: the environment start) to the
    goal. Raises CycleDetected when more steps elapse than there are states."""
    if start is None:
        start = env.start_state
    tab = _tables(env)
    if start not in tab.index:
        raise ValueError(f"state {start} not in environment {env.env_id}")
    budget = env.width * env.height * 2 ** len(env.flag_names)
    steps = []
    state = start
    while (state.x, state.y) != env.goal:
        if len(steps) > budget:
            raise CycleDetected(
                f"{env.env_id}: rollout exceeded {budget} steps without reaching goal"
            )
        action = policy.action(state)
        nxt = apply_action(env, state, action)
        steps.append((state, action, nxt))
        state = nxt
    return make_trajectory(env, steps)


def _features_to_go(policy: Policy, state: State) -> np.ndarray:
    """Discounted features of the policy rollout from `state`, memoized."""
    env = policy.env
    memo = policy._fmemo
    chain = []
    while state not in memo:
        if (state.x, state.y) == env.goal:
            memo[state] = np.zeros(env.num_features)
            break
        action = policy.action(state)
        nxt = apply_action(env, state, action)
        chain.append((state, action, nxt))
        if len(chain) > env.width * env.height * 2 ** len(env.flag_names):
            raise CycleDetected(f"{env.env_id}: policy rollout cycles at {state}")
        state = nxt
    for s, a, s2 in reversed(chain):
        memo[s] = transition_features(env, s, a, s2) + env.discount * memo[s2]
    return memo[chain[0][0]] if chain else memo[state]


def successor_features(
    env: GridEnvironment, policy: Policy, state: State, action: str
) -> np.ndarray:
    """Discounted features of taking `action` in `state` then following
    `policy` to the goal."""
    nxt = apply_action(env, state, action)
    phi = transition_features(env, state, action, nxt)
    return phi + env.discount * _features_to_go(policy, nxt)


# ---------------------------------------------------------------------------
# Domains and demonstrations


@dataclass(frozen=True)
class Domain:
    """A named task family: a shared feature model, true weights, and a set
    of environments (one candidate demonstration per environment)."""

    name: str
    features: tuple[FeatureSpec, ...]
    true_weights: tuple[float, ...]
    environments: tuple[GridEnvironment, ...]
    flag_names: tuple[str, ...] = ()
    discount: float = 1.0

    def __post_init__(self):
        if len(self.features) < 2:
            raise ValueError("a domain needs at least two features")
        w = np.asarray(self.true_weights, dtype=float)
        if w.shape != (len(self.features),):
            raise ValueError("true_weights length != feature count")
        norm = float(np.linalg.norm(w))
        if norm < 1e-12:
            raise ValueError("true weights are (nearly) zero")
        object.__setattr__(
            self, "true_weights", tuple(float(x) for x in w / norm)
        )
        ids = [e.env_id for e in self.environments]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate environment ids")
        for env in self.environments:
            if env.features != self.features or env.flag_names != self.flag_names:
                raise ValueError(f"{env.env_id}: feature model differs from domain")
            if env.discount != self.discount:
                raise ValueError(f"{env.env_id}: discount differs from domain")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def num_features(self) -> int:
        return len(self.features)

    @property
    def weight_array(self) -> np.ndarray:
        return np.array(self.true_weights)

    def environment(self, env_id: str) -> GridEnvironment:
        for env in self.environments:
            if env.env_id == env_id:
                return env
        raise KeyError(env_id)


@dataclass(frozen=True)
class Demonstration:
    """An optimal trajectory in one environment of a domain."""

    env: GridEnvironment
    trajectory: Trajectory

    @property
    def demo_id(self) -> str:
        return self.env.env_id

    @property
    def features(self) -> np.ndarray:
        return self.trajectory.feature_array


def optimal_demo(domain: Domain, env: GridEnvironment) -> Demonstration:
    policy = solve_cached(env, domain.weight_array)
    return Demonstration(env, rollout(env, policy))


def enumerate_candidate_demos(domain: Domain) -> list[Demonstration]:
    """One optimal demonstration per environment, deduplicated by identical
    (annotation grid, trajectory) pairs."""
    demos = []
    seen = set()
    for env in domain.environments:
        demo = optimal_demo(domain, env)
        key = (env.cells, demo.trajectory.steps)
        if key in seen:
            continue
        seen.add(key)
        demos.append(demo)
    return demos


def verify_demo(demo: Demonstration, policy: Policy) -> None:
    """Raise PolicyMismatch unless the demo follows `policy` exactly."""
    for s, a, _ in demo.trajectory.steps:
        chosen = policy.action(s)
        if chosen != a:
            raise PolicyMismatch(
                f"{demo.demo_id}: demo takes {a!r} at {s} but policy takes {chosen!r}"
            )
