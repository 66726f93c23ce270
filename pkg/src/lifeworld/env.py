"""Finite environments, policies and discrete control problems.

States are always flat tuples with one value per component, so a state of
``make_z(5)`` is ``(3,)`` rather than ``3``.  Functions that take a state
accept a bare value for single-component environments and wrap it.

Actions are *partial*: an action returns ``None`` where it is undefined.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Collection, Dict, Hashable, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

State = Tuple[Hashable, ...]

IDENTITY = "i"

REACHED = "reached-goal"
HALTED = "reached-and-halted"
DIVERGED = "diverged"
STUCK = "stuck"


class InapplicableAction(Exception):
    """Raised only by :meth:`Environment.step`; :func:`apply_action` returns None."""


@dataclass(frozen=True)
class Domain:
    """One component of a state space: a type name and its ordered values."""

    name: str
    values: Tuple[Hashable, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError(f"domain {self.name!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"domain {self.name!r} has duplicate values")

    def __len__(self):
        return len(self.values)

    def __contains__(self, value):
        return value in self._index

    @property
    def _index(self):
        # cached lazily; frozen dataclass so go through __dict__
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {v: k for k, v in enumerate(self.values)}
            self.__dict__["_idx"] = idx
        return idx

    def index(self, value) -> int:
        return self._index[value]


@dataclass(frozen=True)
class StateSpace:
    """Cartesian product of component domains, enumerated lazily in row-major order."""

    components: Tuple[Domain, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __len__(self):
        return math.prod(len(d) for d in self.components)

    @property
    def size(self) -> int:
        return len(self)

    def __iter__(self) -> Iterator[State]:
        return itertools.product(*(d.values for d in self.components))

    def __contains__(self, s) -> bool:
        return (
            isinstance(s, tuple)
            and len(s) == len(self.components)
            and all(v in d for v, d in zip(s, self.components))
        )

    @property
    def arity(self) -> int:
        return len(self.components)

    def index(self, s: State) -> int:
        k = 0
        for v, d in zip(s, self.components):
            k = k * len(d) + d.index(v)
        return k


@dataclass(frozen=True, eq=False)
class Action:
    """A named deterministic partial map on states.

    ``fn`` returns the successor or ``None`` when the action is undefined.
    """

    name: str
    fn: Callable[[State], Optional[State]] = field(repr=False)

    def __call__(self, s: State) -> Optional[State]:
        return self.fn(s)

    @classmethod
    def from_table(cls, name: str, table: Mapping[State, State]) -> "Action":
        table = dict(table)
        return cls(name, table.get)

    def tabulate(self, space: Iterable[State]) -> Dict[State, State]:
        out = {}
        for s in space:
            t = self.fn(s)
            if t is not None:
                out[s] = t
        return out


def identity_action(name: str = IDENTITY) -> Action:
    return Action(name, lambda s: s)


class Environment:
    """A pair (state space, named actions).  Immutable after construction."""

    def __init__(self, space: StateSpace | Sequence[Domain], actions: Iterable[Action], name: str = ""):
        if not isinstance(space, StateSpace):
            space = StateSpace(tuple(space))
        acts: Dict[str, Action] = {}
        for a in actions:
            if a.name in acts:
                raise ValueError(f"duplicate action name {a.name!r}")
            acts[a.name] = a
        self._space = space
        self._actions = acts
        self.name = name

    @property
    def space(self) -> StateSpace:
        return self._space

    @property
    def actions(self) -> Mapping[str, Action]:
        return dict(self._actions)

    @property
    def action_names(self) -> Tuple[str, ...]:
        return tuple(self._actions)

    @property
    def components(self) -> Tuple[Domain, ...]:
        return self._space.components

    def states(self) -> Iterator[State]:
        return iter(self._space)

    def __len__(self):
        return len(self._space)

    def __repr__(self):
        label = self.name or "Environment"
        return f"<{label}: {len(self._space)} states, actions={list(self._actions)}>"

    def coerce(self, s) -> State:
        if isinstance(s, list):
            s = tuple(s)
        elif not isinstance(s, tuple) and self._space.arity == 1:
            s = (s,)
        if s not in self._space:
            raise ValueError(f"state {s!r} is not in the state space of {self!r}")
        return s

    def action(self, name: str) -> Action:
        try:
            return self._actions[name]
        except KeyError:
            raise KeyError(f"unknown action {name!r}") from None

    def apply(self, name: str, s: State) -> Optional[State]:
        t = self.action(name)(s)
        if t is not None and t not in self._space:
            raise ValueError(f"action {name!r} maps {s!r} outside the state space: {t!r}")
        return t

    def step(self, name: str, s: State) -> State:
        t = self.apply(name, s)
        if t is None:
            raise InapplicableAction(f"{name} is undefined at {s!r}")
        return t

    def applicable(self, s: State) -> Iterator[Tuple[str, State]]:
        """Yield ``(name, successor)`` for every action defined at ``s``, in declaration order."""
        for name, a in self._actions.items():
            t = a(s)
            if t is not None:
                yield name, t

    def with_actions(self, extra: Iterable[Action], name: str | None = None) -> "Environment":
        return Environment(self._space, [*self._actions.values(), *extra], name=self.name if name is None else name)

    def tabulate(self) -> Dict[str, Dict[State, State]]:
        return {n: a.tabulate(self._space) for n, a in self._actions.items()}


class Policy:
    """A map from states to action names.

    Wraps either a callable or a dict.  A policy may return ``None`` (it has
    nothing to say), which :func:`run_policy` reports as stuck.
    """

    def __init__(self, choose: Callable[[State], Optional[str]] | Mapping[State, str], name: str = ""):
        if isinstance(choose, Mapping):
            table = dict(choose)
            self._choose = table.get
        else:
            self._choose = choose
        self.name = name

    def __call__(self, s: State) -> Optional[str]:
        return self._choose(s)

    def __repr__(self):
        return f"Policy({self.name or self._choose!r})"

    @classmethod
    def constant(cls, action: str) -> "Policy":
        return cls(lambda s: action, name=f"always {action}")


class DiscreteControlProblem:
    """An environment together with a goal set.

    ``goal`` can be any container supporting ``in``; it does not need to be
    enumerable, which lets kitchen-sized worlds carry predicate goals.
    """

    def __init__(self, env: Environment, goal: Collection[State] | Iterable[State]):
        self.env = env
        if not hasattr(goal, "__contains__"):
            goal = frozenset(goal)
        elif isinstance(goal, (set, frozenset, list, tuple)):
            goal = frozenset(env.coerce(g) for g in goal)
        self.goal = goal

    def __repr__(self):
        return f"DCP({self.env!r}, goal={self.goal!r})"


DCP = DiscreteControlProblem


@dataclass(frozen=True)
class Trajectory:
    states: Tuple[State, ...]
    actions: Tuple[str, ...]
    verdict: str

    @property
    def final(self) -> State:
        return self.states[-1]

    def __len__(self):
        return len(self.actions)


@dataclass(frozen=True)
class SolveReport:
    reaches: bool
    halts: bool
    steps: Optional[int]

    def __bool__(self):
        return self.reaches


def apply_action(env: Environment, action: str, s) -> Optional[State]:
    """Successor of ``s`` under ``action``, or ``None`` if undefined there."""
    return env.apply(action, env.coerce(s))


def _next(env: Environment, p: Policy, s: State):
    name = p(s)
    if name is None or name not in env._actions:
        return name, None
    return name, env._actions[name](s)


def run_policy(env: Environment, p: Policy, s0, max_steps: int, goal: Collection[State] | None = None) -> Trajectory:
    """Iterate ``s <- p(s)(s)`` for at most ``max_steps`` steps.

    The run stops early at a fixed point (the chosen action leaves the state
    unchanged) since the trajectory is constant from then on.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    s = env.coerce(s0)
    states = [s]
    actions = []
    stuck = False
    fixed = False
    for _ in range(max_steps):
        name, t = _next(env, p, s)
        if t is None:
            stuck = True
            break
        if t == s:
            fixed = True
            break
        actions.append(name)
        states.append(t)
        s = t
    if stuck:
        verdict = STUCK
    elif goal is None:
        verdict = DIVERGED
    else:
        hit = [k for k, x in enumerate(states) if x in goal]
        if not hit:
            verdict = DIVERGED
        elif fixed and all(x in goal for x in states[hit[0]:]):
            verdict = HALTED
        else:
            verdict = REACHED
    return Trajectory(tuple(states), tuple(actions), verdict)


def orbit(env: Environment, p: Policy, s0: State):
    """Return ``(states, cycle_start, stuck)`` for the deterministic run from ``s0``.

    ``states`` lists every distinct state until the run repeats itself
    (``states[cycle_start:]`` is the periodic part) or gets stuck.
    """
    seen: Dict[State, int] = {}
    states = []
    s = s0
    while s not in seen:
        seen[s] = len(states)
        states.append(s)
        _, t = _next(env, p, s)
        if t is None:
            return states, None, True
        s = t
    return states, seen[s], False


def solves(dcp: DiscreteControlProblem, p: Policy, s0) -> SolveReport:
    """Decide exactly whether ``p`` reaches the goal from ``s0`` and stays there.

    Policy iteration on a finite deterministic system is eventually periodic,
    so the run is followed until a state repeats.
    """
    env, goal = dcp.env, dcp.goal
    states, cycle, stuck = orbit(env, p, env.coerce(s0))
    first = next((k for k, s in enumerate(states) if s in goal), None)
    # a policy that blocks is not a solution, even after touching the goal
    if first is None or stuck:
        return SolveReport(False, False, None)
    tail = states[first:] + states[cycle:]
    return SolveReport(True, all(s in goal for s in tail), first)


def reachable_set(env: Environment, s0) -> frozenset:
    """All states reachable from ``s0`` by any sequence of applicable actions."""
    start = env.coerce(s0)
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for _, t in env.applicable(s):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return frozenset(seen)


def shortest_path(dcp: DiscreteControlProblem, s0, max_depth: int | None = None):
    """Breadth-first search for a goal state.  Returns ``(states, actions)`` or ``None``."""
    env, goal = dcp.env, dcp.goal
    start = env.coerce(s0)
    parent: Dict[State, Tuple[Optional[State], Optional[str]]] = {start: (None, None)}
    depth = {start: 0}
    queue = deque([start])
    found = start if start in goal else None
    while queue and found is None:
        s = queue.popleft()
        if max_depth is not None and depth[s] >= max_depth:
            continue
        for name, t in env.applicable(s):
            if t not in parent:
                parent[t] = (s, name)
                depth[t] = depth[s] + 1
                if t in goal:
                    found = t
                    break
                queue.append(t)
    if found is None:
        return None
    states, actions = [found], []
    s = found
    while parent[s][0] is not None:
        prev, name = parent[s]
        states.append(prev)
        actions.append(name)
        s = prev
    return states[::-1], actions[::-1]


def solvable(dcp: DiscreteControlProblem, s0) -> bool:
    return shortest_path(dcp, s0) is not None


def synthesize_policy(dcp: DiscreteControlProblem) -> Policy:
    """BFS-tree policy over the whole (enumerable) state space.

    Non-goal states that can reach the goal take a first step of a shortest
    path.  Goal states take the first action that stays inside the goal, so
    the policy halts wherever the goal admits it.  Everything else takes its
    first applicable action.
    """
    env, goal = dcp.env, dcp.goal
    states = list(env.states())
    preds: Dict[State, list] = {s: [] for s in states}
    succ: Dict[State, list] = {}
    for s in states:
        succ[s] = list(env.applicable(s))
        for name, t in succ[s]:
            preds[t].append((s, name))
    table: Dict[State, str] = {}
    dist = {}
    queue = deque()
    for s in states:
        if s in goal:
            dist[s] = 0
            queue.append(s)
    while queue:
        t = queue.popleft()
        for s, name in preds[t]:
            if s not in dist:
                dist[s] = dist[t] + 1
                table[s] = name
                queue.append(s)
    for s in states:
        if s in goal:
            stay = next((n for n, t in succ[s] if t == s), None)
            if stay is None:
                stay = next((n for n, t in succ[s] if t in goal), None)
            if stay is not None:
                table[s] = stay
        if s not in table:
            table[s] = succ[s][0][0] if succ[s] else next(iter(env.action_names), IDENTITY)
    return Policy(table, name="bfs")


def solving_states(dcp: DiscreteControlProblem) -> frozenset:
    """States from which the goal is reachable at all (backward closure)."""
    env, goal = dcp.env, dcp.goal
    states = list(env.states())
    preds: Dict[State, list] = {s: [] for s in states}
    for s in states:
        for _, t in env.applicable(s):
            preds[t].append(s)
    good = {s for s in states if s in goal}
    queue = deque(good)
    while queue:
        t = queue.popleft()
        for s in preds[t]:
            if s not in good:
                good.add(s)
                queue.append(s)
    return frozenset(good)


# canonical environments ----------------------------------------------------

def _check_n(n):
    if n < 1:
        raise ValueError("n must be >= 1")


def make_z(n: int) -> Environment:
    """The corridor ``({0..n-1}, {inc_n, dec, i})`` with saturating ends."""
    _check_n(n)
    dom = Domain(f"Z{n}", tuple(range(n)))
    return Environment(
        [dom],
        [
            Action(f"inc_{n}", lambda s: (min(s[0] + 1, n - 1),)),
            Action("dec", lambda s: (max(s[0] - 1, 0),)),
            identity_action(),
        ],
        name=f"Z_{n}",
    )


def make_c(n: int) -> Environment:
    """The chain ``({1..n}, {inc_n, i})``."""
    _check_n(n)
    dom = Domain(f"C{n}", tuple(range(1, n + 1)))
    return Environment(
        [dom],
        [Action(f"inc_{n}", lambda s: (min(s[0] + 1, n),)), identity_action()],
        name=f"C_{n}",
    )


def make_f(with_identity: bool = False) -> Environment:
    """The flip-flop ``({0, 1}, {flip})``.  No identity unless asked for."""
    acts = [Action("flip", lambda s: (1 - s[0],))]
    if with_identity:
        acts.append(identity_action())
    return Environment([Domain("F", (0, 1))], acts, name="F+i" if with_identity else "F")


def make_singleton() -> Environment:
    return Environment([Domain("S", ("ready",))], [identity_action()], name="S")


make_Z, make_C, make_F = make_z, make_c, make_f
