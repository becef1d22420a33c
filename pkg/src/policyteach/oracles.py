"""Independent brute-force checks that the engine must agree with.

Nothing in this module reuses value iteration for the quantity it checks:
the path oracle enumerates simple paths outright, the membership oracle
replans and compares trajectory values, and the redundancy oracle re-tests
constraint sets sample by sample. Slow and obviously correct on purpose.
"""

from __future__ import annotations

from collections import deque
from dataclasses import replace

import numpy as np

from .beliefs import sample_sphere
from .constraints import (
    DEDUP_COSINE,
    REDUNDANCY_AREA,
    ConstraintSet,
    demo_constraints_standard,
)
from .errors import CycleDetected, InfeasibleComputation, NonTerminating, Unreachable
from .mdp import (
    ACTION_ORDER,
    EMPTY,
    GOAL,
    WALL,
    Demonstration,
    Domain,
    GridEnvironment,
    State,
    Trajectory,
    _tables,
    make_trajectory,
    optimal_demo,
    rollout,
    solve_cached,
)

VALUE_TOL = 1e-9
_NODE_CAP = 5_000_000


def shortest_move_counts(env: GridEnvironment) -> dict[tuple[int, int], int]:
    """Fewest moves from each position to the goal, ignoring annotations."""
    dist = {env.goal: 0}
    queue = deque([env.goal])
    while queue:
        x, y = queue.popleft()
        for dx, dy in ((0, -1), (0, 1), (-1, 0), (1, 0)):
            nx, ny = x + dx, y + dy
            if not (0 <= nx < env.width and 0 <= ny < env.height):
                continue
            if env.cell_at(nx, ny) == WALL or (nx, ny) in dist:
                continue
            dist[(nx, ny)] = dist[(x, y)] + 1
            queue.append((nx, ny))
    return dist


def best_simple_path(
    env: GridEnvironment, weights, start: State | None = None
) -> tuple[float, Trajectory | None]:
    """Exact optimum over simple state paths, by depth-first search with an
    admissible bound. Valid as a planning oracle whenever every cycle has
    negative reward (true for any weight vector with a dominant negative
    action component); it never runs value iteration.

    Returns (best value, a best trajectory), or (-inf, None) when the goal
    is unreachable. Undiscounted environments only.
    """
    if env.discount != 1.0:
        raise ValueError("the path oracle only handles undiscounted environments")
    w = np.asarray(weights, dtype=float)
    tab = _tables(env)
    step_rewards = tab.feats @ w
    legal = tab.next_idx >= 0
    dist = shortest_move_counts(env)
    if start is None:
        start = env.start_state
    start_idx = tab.index[start]

    # Bound future reward in two parts. One-shot bonuses (enter_once) fire
    # at most once each, so the positive ones still available at a state sum
    # to a fixed budget. Everything else can fire every step, so its best
    # per-transition total multiplied by the moves still needed bounds the
    # rest. Without this split, any positive bonus cell would let the naive
    # per-step maximum stop pruning at all.
    one_shot = [
        (i, env.flag_names.index(f.trigger.flag))
        for i, f in enumerate(env.features)
        if f.trigger.kind == "enter_once" and w[i] > 0.0
    ]
    w_repeat = w.copy()
    for i, _ in one_shot:
        w_repeat[i] = 0.0
    repeat_rewards = tab.feats @ w_repeat
    r_step = float(repeat_rewards[legal].max()) if legal.any() else 0.0
    bonus = np.array(
        [
            sum(w[i] for i, fi in one_shot if not s.flags[fi])
            for s in tab.states
        ]
    )

    n = len(tab.states)
    visited = np.zeros(n, dtype=bool)
    best_value = -np.inf
    best_steps: list | None = None
    nodes = 0

    def walk(si: int, value: float, depth: int, steps: list) -> None:
        nonlocal best_value, best_steps, nodes
        nodes += 1
        if nodes > _NODE_CAP:
            raise InfeasibleComputation(
                f"{env.env_id}: path oracle exceeded {_NODE_CAP} nodes"
            )
        state = tab.states[si]
        if (state.x, state.y) == env.goal:
            if value > best_value:
                best_value = value
                best_steps = list(steps)
            return
        remaining = dist.get((state.x, state.y))
        if remaining is None:
            return
        if r_step <= 0.0:
            bound = value + bonus[si] + remaining * r_step
        else:
            bound = value + bonus[si] + (n - depth) * r_step
        if bound <= best_value:
            return
        visited[si] = True
        for aj, nj in enumerate(tab.next_idx[si]):
            if nj < 0 or visited[nj]:
                continue
            steps.append((si, aj, nj))
            walk(nj, value + step_rewards[si, aj], depth + 1, steps)
            steps.pop()
        visited[si] = False

    walk(start_idx, 0.0, 0, [])
    if best_steps is None:
        return float("-inf"), None
    decoded = [
        (tab.states[si], ACTION_ORDER[aj], tab.states[nj])
        for si, aj, nj in best_steps
    ]
    return best_value, make_trajectory(env, decoded)


def domain_annotations(domain: Domain) -> tuple[str, ...]:
    """Cell kinds (beyond empty/wall/goal) used anywhere in the domain."""
    kinds = {
        kind
        for env in domain.environments
        for row in env.cells
        for kind in row
    }
    return tuple(sorted(kinds - {EMPTY, WALL, GOAL}))


def random_environment(
    domain: Domain,
    rng: np.random.Generator,
    env_id: str,
    max_side: int = 6,
    wall_p: float = 0.12,
    annotation_p: float = 0.22,
) -> GridEnvironment:
    """A random solvable grid using the domain's own annotation alphabet.

    Every non-wall cell can reach the goal (resampled until true), so the
    environment is as well-formed as a hand-written one.
    """
    annotations = domain_annotations(domain)
    template = domain.environments[0]
    for _ in range(1000):
        width = int(rng.integers(3, max_side + 1))
        height = int(rng.integers(2, max_side + 1))
        cells = []
        for _y in range(height):
            row = []
            for _x in range(width):
                roll = rng.random()
                if roll < wall_p:
                    row.append(WALL)
                elif roll < wall_p + annotation_p and annotations:
                    row.append(annotations[int(rng.integers(len(annotations)))])
                else:
                    row.append(EMPTY)
            cells.append(row)
        open_cells = [
            (x, y)
            for y in range(height)
            for x in range(width)
            if cells[y][x] == EMPTY
        ]
        if len(open_cells) < 2:
            continue
        gx, gy = open_cells[int(rng.integers(len(open_cells)))]
        cells[gy][gx] = GOAL
        starts = [c for c in open_cells if c != (gx, gy)]
        start = starts[int(rng.integers(len(starts)))]
        env = GridEnvironment(
            env_id=env_id,
            cells=tuple(tuple(row) for row in cells),
            start=start,
            features=domain.features,
            flag_names=domain.flag_names,
            start_flags=template.start_flags,
            discount=domain.discount,
            pickup_flag=template.pickup_flag,
        )
        tab = _tables(env)
        non_wall = sum(row.count(WALL) for row in env.cells)
        non_wall = width * height - non_wall
        reachable_positions = {
            (tab.states[i].x, tab.states[i].y)
            for i in range(len(tab.states))
            if tab.reachable[i]
        }
        if len(reachable_positions) == non_wall:
            return env
    raise RuntimeError("could not generate a solvable random environment")


def random_environments(
    domain: Domain, count: int, seed: int = 0, max_side: int = 6
) -> list[GridEnvironment]:
    rng = np.random.default_rng(seed)
    return [
        random_environment(domain, rng, f"random-{domain.name}-{i}", max_side)
        for i in range(count)
    ]


def planner_report(
    domain: Domain, envs: list[GridEnvironment] | None = None,
    count: int = 20, seed: int = 0,
) -> dict:
    """Compare the planner's rollout value against the exhaustive path
    optimum on each environment. Any disagreement is a planner bug."""
    if envs is None:
        envs = random_environments(domain, count, seed=seed)
    w = domain.weight_array
    failures = []
    for env in envs:
        demo = optimal_demo(domain, env)
        oracle_value, _ = best_simple_path(env, w)
        planner_value = demo.trajectory.reward(w)
        if abs(planner_value - oracle_value) > VALUE_TOL:
            failures.append(
                {
                    "env": env.env_id,
                    "planner_value": planner_value,
                    "oracle_value": oracle_value,
                }
            )
    return {
        "check": "planner-optimality",
        "domain": domain.name,
        "environments": len(envs),
        "failures": failures,
        "passed": not failures,
    }


def all_start_family(domain: Domain, env: GridEnvironment) -> list[Trajectory]:
    """Optimal rollouts from every non-wall, non-goal position of one grid."""
    policy = solve_cached(env, domain.weight_array)
    rollouts = []
    for y in range(env.height):
        for x in range(env.width):
            if env.cell_at(x, y) in (WALL, GOAL):
                continue
            rollouts.append(rollout(env, policy, State(x, y, env.start_flags)))
    return rollouts


def family_constraints(
    domain: Domain, env: GridEnvironment, trajectories: list[Trajectory]
) -> ConstraintSet:
    policy = solve_cached(env, domain.weight_array)
    combined = ConstraintSet(env.num_features)
    for traj in trajectories:
        demo = Demonstration(replace(env, start=(traj.start.x, traj.start.y)), traj)
        combined = combined.union(demo_constraints_standard(demo, policy))
    return combined


def replanning_verdict(
    env: GridEnvironment, trajectories: list[Trajectory], weights, tol: float = VALUE_TOL
) -> bool | None:
    """Whether planning under `weights` reproduces every trajectory's value.

    Returns None when the weights admit no optimal policy at all (planning
    diverges), which is a different outcome than planning to somewhere else.
    """
    w = np.asarray(weights, dtype=float)
    w = w / np.linalg.norm(w)
    try:
        policy = solve_cached(env, w)
    except (NonTerminating, Unreachable, CycleDetected):
        return None
    for traj in trajectories:
        try:
            produced = rollout(env, policy, traj.steps[0][0])
        except CycleDetected:
            return None
        if abs(produced.reward(w) - traj.reward(w)) > tol:
            return False
    return True


def replanning_reproduces(
    env: GridEnvironment, trajectories: list[Trajectory], weights, tol: float = VALUE_TOL
) -> bool:
    """True when planning under `weights` reproduces every trajectory's value.

    Weights that admit no finite-value plan reproduce nothing.
    """
    return replanning_verdict(env, trajectories, weights, tol) is True


def membership_report(
    domain: Domain,
    env: GridEnvironment,
    n_weights: int = 10_000,
    seed: int = 0,
    flip_sign: int | None = None,
) -> dict:
    """Compare the constraint region of a whole demonstration family against
    consistency-by-replanning over sampled weight vectors.

    Weights under which planning diverges are excluded from both sides:
    consistency is undefined without an optimal policy, and finite
    demonstrations can never rule such weights out (no finite alternative
    at a demonstrated state reveals a reward for endless wandering). Among
    the remaining weights the two memberships must agree pointwise, up to
    a sliver of tie-boundary samples.

    `flip_sign` negates one constraint normal first; it exists as a negative
    control so tests can confirm the check has teeth.
    """
    trajectories = all_start_family(domain, env)
    combined = family_constraints(domain, env, trajectories)
    normals = combined.normals
    if flip_sign is not None:
        flipped = [
            -n if i == flip_sign else n for i, n in enumerate(normals)
        ]
        combined = ConstraintSet(combined.dim, flipped)
    W = sample_sphere(domain.num_features, n_weights, seed)
    satisfied = combined.satisfies(W)
    verdicts = [replanning_verdict(env, trajectories, w) for w in W]
    defined = np.array([v is not None for v in verdicts], dtype=bool)
    consistent = np.array([v is True for v in verdicts], dtype=bool)

    n_eff = int(defined.sum())
    if n_eff == 0:
        return {
            "check": "bec-membership",
            "env": env.env_id,
            "n_weights": n_weights,
            "diverged": n_weights,
            "n_effective": 0,
            "area_fraction": 0.0,
            "replanning_fraction": 0.0,
            "ci": 0.0,
            "pointwise_disagreements": 0,
            "passed": False,
        }
    area = float(satisfied[defined].mean())
    fraction = float(consistent[defined].mean())
    disagreements = int((satisfied[defined] != consistent[defined]).sum())
    ci = 1.96 * float(
        np.sqrt(max(area * (1 - area), fraction * (1 - fraction)) / n_eff)
    )
    return {
        "check": "bec-membership",
        "env": env.env_id,
        "n_weights": n_weights,
        "diverged": int(n_weights - n_eff),
        "n_effective": n_eff,
        "area_fraction": area,
        "replanning_fraction": fraction,
        "ci": ci,
        "pointwise_disagreements": disagreements,
        "passed": abs(area - fraction) <= 2 * ci
        and disagreements <= max(1, round(0.002 * n_eff)),
    }


def redundancy_report(
    full: ConstraintSet,
    minimal: ConstraintSet,
    n_samples: int = 100_000,
    seed: int = 0,
) -> dict:
    """Leave-one-out audit of a minimal constraint set on one sample stream.

    The minimal set must carve the same region as the full set, every kept
    constraint must be binding (dropping it admits samples), and every
    dropped constraint must be implied (restoring it removes almost none).
    """
    W = sample_sphere(full.dim, n_samples, seed)
    inside_full = full.satisfies(W)
    inside_min = minimal.satisfies(W)
    region_drift = int((inside_full != inside_min).sum())
    threshold = REDUNDANCY_AREA * n_samples

    min_normals = list(minimal.normals)
    not_binding = []
    for i in range(len(min_normals)):
        rest = ConstraintSet(
            minimal.dim, [n for j, n in enumerate(min_normals) if j != i]
        )
        admitted = int((rest.satisfies(W) & ~inside_min).sum())
        if admitted <= threshold:
            not_binding.append(i)

    kept = np.array(min_normals) if min_normals else np.zeros((0, full.dim))
    not_implied = []
    for j, normal in enumerate(full.normals):
        if len(kept) and (kept @ normal).max() >= DEDUP_COSINE:
            continue
        removed = int((inside_min & (W @ normal < 0)).sum())
        if removed > threshold:
            not_implied.append(j)

    passed = region_drift <= threshold and not not_binding and not not_implied
    return {
        "check": "redundancy",
        "n_samples": n_samples,
        "region_drift_samples": region_drift,
        "kept_but_not_binding": not_binding,
        "dropped_but_not_implied": not_implied,
        "passed": passed,
    }
