"""Materials, tools and object worlds.

An :class:`ObjectWorld` is an environment whose components are objects of
declared types.  Its actions are grounded from :class:`Step` templates over
every injective assignment of objects to the template's typed slots, so a
two-egg world gets ``break(egg-1)`` and ``break(egg-2)`` from one ``break``
template.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .env import IDENTITY, Action, DiscreteControlProblem, Domain, Environment, Policy, State, identity_action, make_c
from .reduction import ImplementationMap, Projection, ReductionFailure, check_simple_reduction

GOAL = "goal"
PREGOAL = "pregoal"
POSTGOAL = "postgoal"


@dataclass(frozen=True)
class MaterialType:
    """A linear chain of states; ``steps[k]`` takes ``chain[k]`` to ``chain[k+1]``."""

    name: str
    chain: Tuple[str, ...]
    steps: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "chain", tuple(self.chain))
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.chain:
            raise ValueError(f"material {self.name!r} has an empty chain")
        if len(set(self.chain)) != len(self.chain):
            raise ValueError(f"material {self.name!r}: duplicate chain state")
        if len(self.steps) != len(self.chain) - 1:
            raise ValueError(f"material {self.name!r}: need {len(self.chain) - 1} step actions, got {len(self.steps)}")

    @property
    def domain(self) -> Domain:
        return Domain(self.name, self.chain)

    @property
    def start(self) -> str:
        return self.chain[0]

    @property
    def final(self) -> str:
        return self.chain[-1]

    def position(self, state: str) -> int:
        return self.chain.index(state)

    def next_step(self, state: str) -> Optional[str]:
        k = self.position(state)
        return self.steps[k] if k < len(self.steps) else None

    def templates(self) -> List["Step"]:
        """One single-slot template per distinct step name."""
        out: Dict[str, List] = {}
        for k, name in enumerate(self.steps):
            out.setdefault(name, []).append(((self.chain[k], self.chain[k + 1]),))
        return [Step(name, (self.name,), tuple(cases)) for name, cases in out.items()]


@dataclass(frozen=True)
class ToolType:
    name: str
    states: Tuple[str, ...]
    ready: str
    resets: Tuple[Tuple[str, str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "resets", tuple(tuple(r) for r in self.resets))
        if self.ready not in self.states:
            raise ValueError(f"tool {self.name!r}: ready state {self.ready!r} is not among its states")

    @property
    def domain(self) -> Domain:
        return Domain(self.name, self.states)

    def reset_from(self, state: str) -> Optional[Tuple[str, str, str]]:
        return next((r for r in self.resets if r[1] == state), None)

    def templates(self) -> List["Step"]:
        out: Dict[str, List] = {}
        for name, a, b in self.resets:
            out.setdefault(name, []).append(((a, b),))
        return [Step(name, (self.name,), tuple(cases)) for name, cases in out.items()]


ObjectType = Union[MaterialType, ToolType]


@dataclass(frozen=True)
class Step:
    """An action template over typed slots.

    ``cases`` lists alternative preconditions/effects; each case gives
    ``(pre, post)`` for every slot.  Slot 0 is the primary object.
    """

    name: str
    slots: Tuple[str, ...]
    cases: Tuple[Tuple[Tuple[str, str], ...], ...]

    @classmethod
    def simple(cls, name: str, *effects: Tuple[str, str, str]) -> "Step":
        """``Step.simple("beat", ("egg", "broken", "beaten"), ("whisk", "clean", "dirty"))``."""
        return cls(name, tuple(t for t, _, _ in effects), (tuple((a, b) for _, a, b in effects),))


def _grounded_fn(idxs: Tuple[int, ...], cases):
    def fn(s):
        for case in cases:
            if all(s[i] == pre for i, (pre, _) in zip(idxs, case)):
                out = list(s)
                for i, (_, post) in zip(idxs, case):
                    out[i] = post
                return tuple(out)
        return None

    return fn


class ObjectWorld(Environment):
    """An environment with one component per object."""

    def __init__(
        self,
        objects: Sequence[Tuple[str, str]],
        types: Mapping[str, ObjectType],
        steps: Iterable[Step],
        identity: bool = True,
        name: str = "",
    ):
        self.objects = tuple(oid for oid, _ in objects)
        self.object_types = tuple(t for _, t in objects)
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("duplicate object id")
        self.types = dict(types)
        for t in self.object_types:
            if t not in self.types:
                raise ValueError(f"unknown object type {t!r}")
        comps = [self.types[t].domain for t in self.object_types]
        self.steps = tuple(steps)
        acts: List[Action] = []
        self.grounding: Dict[str, Tuple[str, Tuple[int, ...]]] = {}
        ground = []
        for step in self.steps:
            pools = [[k for k, t in enumerate(self.object_types) if t == slot] for slot in step.slots]
            ground += [(step, a) for a in itertools.product(*pools) if len(set(a)) == len(a)]
        # a name stays bare only when it is grounded exactly once in the whole world
        count: Dict[str, int] = {}
        for step, _ in ground:
            count[step.name] = count.get(step.name, 0) + 1
        for step, a in ground:
            aname = step.name if count[step.name] == 1 else f"{step.name}({','.join(self.objects[k] for k in a)})"
            if aname in self.grounding:
                raise ValueError(f"duplicate grounded action {aname!r}")
            self.grounding[aname] = (step.name, a)
            acts.append(Action(aname, _grounded_fn(a, step.cases)))
        if identity:
            acts.append(identity_action())
        super().__init__(comps, acts, name=name)

    def index_of(self, oid: str) -> int:
        return self.objects.index(oid)

    def indices_of_type(self, t: str) -> List[int]:
        return [k for k, x in enumerate(self.object_types) if x == t]

    def initial_state(self) -> State:
        return tuple(
            self.types[t].start if isinstance(self.types[t], MaterialType) else self.types[t].ready
            for t in self.object_types
        )


def make_material_world(m: MaterialType, identity: bool = True) -> ObjectWorld:
    return ObjectWorld([(m.name, m.name)], {m.name: m}, m.templates(), identity=identity, name=m.name)


def classify_state(m: MaterialType, s: str, goal: Iterable[str]) -> str:
    goal = set(goal)
    if s not in m.chain:
        raise ValueError(f"{s!r} is not a state of {m.name}")
    if not goal or not goal <= set(m.chain):
        raise ValueError("goal must be a nonempty subset of the chain")
    if s in goal:
        return GOAL
    k = m.position(s)
    if any(m.position(g) > k for g in goal):
        return PREGOAL
    return POSTGOAL


# chains ---------------------------------------------------------------------

def _non_identity(env: Environment, s: State):
    return [(n, t) for n, t in env.applicable(s) if t != s]


def chain_order(env: Environment) -> List[State]:
    """The states of a single-material world in chain order, or ValueError."""
    states = list(env.states())
    succ = {}
    has_pred = set()
    for s in states:
        moves = {t for _, t in _non_identity(env, s)}
        if len(moves) > 1:
            raise ValueError(f"not a chain: {s!r} has {len(moves)} successors")
        if moves:
            t = moves.pop()
            succ[s] = t
            has_pred.add(t)
    starts = [s for s in states if s not in has_pred]
    if len(starts) != 1:
        raise ValueError("not a chain: expected exactly one initial state")
    order = [starts[0]]
    while order[-1] in succ:
        nxt = succ[order[-1]]
        if nxt in order:
            raise ValueError("not a chain: cycle")
        order.append(nxt)
    if len(order) != len(states):
        raise ValueError("not a chain: some states are not on the chain")
    for s in order:
        names = {n for n, t in _non_identity(env, s)}
        if len(names) > 1:
            raise ValueError(f"not a chain: {len(names)} actions advance {s!r}")
    return order


ADVANCE = "advance"


@dataclass(frozen=True)
class ChainReduction:
    world: Environment
    chain: Tuple[State, ...]
    projection: Projection
    implementation: ImplementationMap


def material_chain_reduction(world: Environment) -> ChainReduction:
    """Reduce a single-material world to ``C_n`` by position in the chain.

    The implementation of ``inc_n`` is the state-dependent step
    ``s -> action(s)(s)``; it is added to ``world`` as the derived action
    ``advance`` so the commuting check can treat it like any other action.
    """
    order = chain_order(world)
    n = len(order)
    pos = {s: k + 1 for k, s in enumerate(order)}
    step_of = {}
    for s in order:
        moves = _non_identity(world, s)
        step_of[s] = moves[0][1] if moves else s
    ext = world.with_actions([Action(ADVANCE, step_of.get)])
    cn = make_c(n)
    proj = Projection(ext, cn, lambda s: (pos[s],))
    impl = check_simple_reduction(proj)
    if isinstance(impl, ReductionFailure):
        raise ValueError(f"chain reduction failed: {impl}")
    return ChainReduction(ext, tuple(order), proj, impl)


def standard_chain_policy(n: int, goal: Iterable) -> Policy:
    """``i`` inside the goal, ``inc_n`` everywhere else."""
    g = frozenset(x if isinstance(x, tuple) else (x,) for x in goal)
    if not all(1 <= x[0] <= n for x in g):
        raise ValueError("goal must be a subset of 1..n")
    inc = f"inc_{n}"
    return Policy(lambda s: IDENTITY if s in g else inc, name=f"p_C{n}")


def chain_policy(world: Environment, goal) -> Policy:
    """``i`` on the goal, otherwise the unique action that advances the material."""

    def choose(s):
        if s in goal:
            return IDENTITY
        moves = _non_identity(world, s)
        return moves[0][0] if moves else IDENTITY

    return Policy(choose, name="p_EG")


def pad_singletons(m: Environment, n: int) -> Environment:
    """``M || S || ... || S`` with ``n`` singleton factors."""
    from .env import make_singleton
    from .products import parallel_product

    out = m
    for _ in range(n):
        out = parallel_product(out, make_singleton())
    return out


def is_isomorphism(e1: Environment, e2: Environment, state_map: Mapping, action_map: Mapping[str, str]) -> bool:
    """True iff ``state_map`` is a bijection that carries every action onto its image."""
    s1 = list(e1.states())
    if len(s1) != len(e2) or set(state_map[s] for s in s1) != set(e2.states()):
        return False
    if set(action_map) != set(e1.action_names) or set(action_map.values()) != set(e2.action_names):
        return False
    for a, b in action_map.items():
        for s in s1:
            t1, t2 = e1.apply(a, s), e2.apply(b, state_map[s])
            if (t1 is None) != (t2 is None):
                return False
            if t1 is not None and state_map[t1] != t2:
                return False
    return True


# tools -------------------------------------------------------------------

def _with(s: State, i: int, v) -> State:
    return s[:i] + (v,) + s[i + 1:]


def independent_of(env: Environment, action: str, i: int) -> bool:
    """Never changes component ``i`` and does the same thing whatever its value."""
    a = env.action(action)
    values = env.components[i].values
    for s in env.states():
        t = a(s)
        if t is not None and t[i] != s[i]:
            return False
        for v in values:
            if v == s[i]:
                continue
            t2 = a(_with(s, i, v))
            if (t is None) != (t2 is None):
                return False
            if t is not None and _with(t, i, None) != _with(t2, i, None):
                return False
    return True


def focused_on(env: Environment, action: str, i: int) -> bool:
    return all(independent_of(env, action, j) for j in range(env.space.arity) if j != i)


def only_at(env: Environment, action: str, i: int, value) -> bool:
    a = env.action(action)
    return all(s[i] == value for s in env.states() if a(s) is not None)


@dataclass(frozen=True)
class ToolCertificate:
    """Outcome of :func:`is_tool`.  Truthy iff the component is a tool.

    On success ``reset_policy`` drives any state to ``ready`` with focused
    actions.  On failure ``clause`` names the violated condition
    (``"trichotomy"`` or ``"reachability"``) with the offending action/state.
    """

    component: int
    ready: Optional[object]
    reset_policy: Optional[Policy] = field(default=None, repr=False)
    focused: Tuple[str, ...] = ()
    clause: Optional[str] = None
    action: Optional[str] = None
    state: Optional[State] = None

    def __bool__(self):
        return self.clause is None


def _tool_with_ready(env: Environment, i: int, ready, focused_cache, indep_cache) -> ToolCertificate:
    for name in env.action_names:
        if not (indep_cache[name] or focused_cache[name] or only_at(env, name, i, ready)):
            bad = next(s for s in env.states() if env.apply(name, s) is not None and s[i] != ready)
            return ToolCertificate(i, ready, clause="trichotomy", action=name, state=bad)
    focused = [n for n in env.action_names if focused_cache[n]]
    states = list(env.states())
    preds: Dict[State, list] = {s: [] for s in states}
    for s in states:
        for n in focused:
            t = env.apply(n, s)
            if t is not None and t != s:
                preds[t].append((s, n))
    dist = {s: 0 for s in states if s[i] == ready}
    choice: Dict[State, str] = {}
    queue = deque(dist)
    while queue:
        t = queue.popleft()
        for s, n in preds[t]:
            if s not in dist:
                dist[s] = dist[t] + 1
                choice[s] = n
                queue.append(s)
    # prefer the earliest-declared focused action on some shortest path
    for s in choice:
        for n in focused:
            t = env.apply(n, s)
            if t is not None and dist.get(t, -1) == dist[s] - 1:
                choice[s] = n
                break
    missing = next((s for s in states if s not in dist), None)
    if missing is not None:
        return ToolCertificate(i, ready, clause="reachability", state=missing)
    policy = Policy(lambda s: choice.get(s, IDENTITY), name=f"reset[{i}]")
    return ToolCertificate(i, ready, policy, tuple(focused))


def is_tool(env: Environment, i: int, ready=None) -> ToolCertificate:
    """Exhaustively check whether component ``i`` is a tool.

    If ``ready`` is not given, every value of the component is tried in
    order and the first that works is used.
    """
    indep = {n: independent_of(env, n, i) for n in env.action_names}
    foc = {n: focused_on(env, n, i) for n in env.action_names}
    candidates = [ready] if ready is not None else list(env.components[i].values)
    cert = None
    for r in candidates:
        cert = _tool_with_ready(env, i, r, foc, indep)
        if cert:
            return cert
    return cert


@dataclass(frozen=True, eq=False)
class ToolReduction:
    """A tool component replaced by a singleton.

    ``reduced`` drops component ``component``; its actions are the world's
    non-tool actions evaluated with the tool at ``ready``.  ``projection``
    is undefined wherever the tool is not ready.
    """

    world: Environment
    component: int
    ready: object
    reduced: Environment
    projection: Projection
    implementation: ImplementationMap
    reset_policy: Policy

    def drop(self, s: State) -> State:
        return s[: self.component] + s[self.component + 1:]

    def insert(self, s: State) -> State:
        return s[: self.component] + (self.ready,) + s[self.component:]

    def reduce_goal(self, goal) -> "_ReducedGoal":
        return _ReducedGoal(goal, self)

    def lift(self, p: Policy) -> Policy:
        """Act as ``p``; reset the tool only when ``p``'s action needs it ready.

        Actions independent of the tool run whatever its state, so a dirty
        tool is left alone until a step actually uses it.
        """
        i, ready = self.component, self.ready
        impl, reset, world = self.implementation, self.reset_policy, self.world

        def choose(s):
            a = p(self.drop(s))
            a = None if a is None else impl.get(a)
            if s[i] != ready and (a is None or world.apply(a, s) is None):
                return reset(s)
            return a

        return Policy(choose, name=f"tool-lifted {p.name}".strip())


class _ReducedGoal:
    def __init__(self, goal, red: ToolReduction):
        self.goal, self.red = goal, red

    def __contains__(self, s):
        return self.red.insert(s) in self.goal


def tool_reduction(world: Environment, i: int, ready=None) -> ToolReduction:
    cert = is_tool(world, i, ready)
    if not cert:
        raise ValueError(f"component {i} is not a tool ({cert.clause} fails at {cert.action or ''} {cert.state})")
    ready = cert.ready
    tool_actions = {n for n in cert.focused if not independent_of(world, n, i)}
    comps = world.components[:i] + world.components[i + 1:]
    acts = []
    table = {}

    def make(a):
        def fn(s):
            t = a(s[:i] + (ready,) + s[i:])
            return None if t is None else t[:i] + t[i + 1:]

        return fn

    for n in world.action_names:
        if n in tool_actions:
            continue
        acts.append(Action(n, make(world.action(n))))
        table[n] = n
    reduced = Environment(comps, acts, name=f"{world.name}/tool{i}")
    proj = Projection(world, reduced, lambda s: s[:i] + s[i + 1:] if s[i] == ready else None)
    return ToolReduction(world, i, ready, reduced, proj, ImplementationMap(table), cert.reset_policy)


@dataclass(frozen=True, eq=False)
class ToolChain:
    """Several tool reductions applied one after another."""

    steps: Tuple[ToolReduction, ...]

    @property
    def reduced(self) -> Environment:
        return self.steps[-1].reduced if self.steps else None

    def reduce_goal(self, goal):
        for r in self.steps:
            goal = r.reduce_goal(goal)
        return goal

    def lift(self, p: Policy) -> Policy:
        for r in reversed(self.steps):
            p = r.lift(p)
        return p


def reduce_tools(world: Environment, components: Sequence[int]) -> ToolChain:
    """Reduce the given tool components in the order listed (indices refer to ``world``)."""
    remaining = list(components)
    steps = []
    env = world
    while remaining:
        i = remaining.pop(0)
        red = tool_reduction(env, i)
        steps.append(red)
        env = red.reduced
        remaining = [j - 1 if j > i else j for j in remaining]
    return ToolChain(tuple(steps))


def tool_reduced_policy(dcp: DiscreteControlProblem, components: Sequence[int]) -> Policy:
    """Solve the tools-replaced problem by BFS and lift the solution back."""
    from .env import synthesize_policy

    chain = reduce_tools(dcp.env, components)
    reduced_goal = chain.reduce_goal(dcp.goal)
    base = synthesize_policy(DiscreteControlProblem(chain.reduced, reduced_goal))
    return chain.lift(base)
