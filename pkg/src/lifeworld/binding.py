"""Simple projections, bindings, existential goals and binding maps."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .env import IDENTITY, Environment, Policy, State
from .reduction import ImplementationMap, Projection, lift_policy
from .schematic import MaterialType, ObjectWorld, ToolType, classify_state, PREGOAL

MAX_PROJECTIONS = 10**5


@dataclass(frozen=True)
class SimpleProjection:
    """Select components ``indices`` (0-based) of a source state, in that order."""

    indices: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))

    def __call__(self, s: State) -> State:
        return tuple(s[i] for i in self.indices)

    def type_respecting(self, source: Environment, target: Environment) -> bool:
        if len(self.indices) != target.space.arity:
            return False
        if any(not 0 <= i < source.space.arity for i in self.indices):
            return False
        return all(source.components[i] == target.components[k] for k, i in enumerate(self.indices))

    def as_projection(self, source: Environment, target: Environment) -> Projection:
        return Projection(source, target, self)


def back_projection(pi: SimpleProjection, s: State, s_src: State) -> State:
    """``s_src`` with the components ``pi`` keeps replaced by those of ``s``."""
    if len(s) != len(pi.indices):
        raise ValueError(f"target state has {len(s)} components, projection keeps {len(pi.indices)}")
    if any(not 0 <= i < len(s_src) for i in pi.indices):
        raise ValueError("projection index out of range for source state")
    out = list(s_src)
    written: Dict[int, object] = {}
    for k, i in enumerate(pi.indices):
        if i in written and written[i] != s[k]:
            raise ValueError(f"conflicting values for source component {i}")
        written[i] = s[k]
        out[i] = s[k]
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Binding:
    projection: SimpleProjection
    implementation: ImplementationMap
    source: Environment = field(repr=False)
    target: Environment = field(repr=False)

    @property
    def indices(self) -> Tuple[int, ...]:
        return self.projection.indices

    def __call__(self, s: State) -> State:
        return self.projection(s)


@dataclass(frozen=True)
class BindingFailure:
    projection: SimpleProjection
    reason: str
    action: Optional[str] = None
    state: Optional[State] = None

    def __bool__(self):
        return False


def closed_form(pi: SimpleProjection, target: Environment, action: str) -> Callable[[State], Optional[State]]:
    """``s' -> pi^-(a(pi(s')), s')``, undefined where ``a`` is."""
    a = target.action(action)

    def fn(s):
        t = a(pi(s))
        return None if t is None else back_projection(pi, t, s)

    return fn


def is_binding(pi: SimpleProjection, source: Environment, target: Environment) -> Binding | BindingFailure:
    """Check that ``pi`` is a simple reduction whose implementations have the closed form.

    For each target action the closed-form map is built and the first source
    action agreeing with it wherever it is defined is taken as its
    implementation.
    """
    if not pi.type_respecting(source, target):
        return BindingFailure(pi, "not type-respecting")
    states = list(source.states())
    table = {}
    for a in target.action_names:
        want = closed_form(pi, target, a)
        expected = [(s, t) for s in states if (t := want(s)) is not None]
        first_bad = None
        for cand in source.action_names:
            f = source.action(cand)
            bad = next((s for s, t in expected if f(s) != t), None)
            if bad is None:
                table[a] = cand
                break
            if first_bad is None:
                first_bad = bad
        else:
            return BindingFailure(pi, "no implementing action", a, first_bad)
    return Binding(pi, ImplementationMap(table), source, target)


def simple_projections(source: Environment, target: Environment) -> List[SimpleProjection]:
    """All type-respecting, injective simple projections from ``source`` onto ``target``."""
    pools = [[i for i, d in enumerate(source.components) if d == dom] for dom in target.components]
    bound = math.prod(len(p) for p in pools)
    if bound > MAX_PROJECTIONS:
        raise ValueError(f"{bound} candidate projections exceeds the limit of {MAX_PROJECTIONS}")
    return [SimpleProjection(c) for c in itertools.product(*pools) if len(set(c)) == len(c)]


@dataclass(frozen=True)
class UniformReport:
    ok: bool
    bindings: Tuple[Binding, ...]
    failure: Optional[BindingFailure] = None

    def __bool__(self):
        return self.ok


def is_uniformly_reducible(source: Environment, target: Environment) -> UniformReport:
    found = []
    for pi in simple_projections(source, target):
        b = is_binding(pi, source, target)
        if not b:
            return UniformReport(False, tuple(found), b)
        found.append(b)
    return UniformReport(True, tuple(found))


def existential_goal(goal, bindings: Sequence[Binding], source: Environment | None = None) -> frozenset:
    """Union of the preimages of ``goal`` under every binding."""
    if not bindings:
        raise ValueError("need at least one binding")
    env = source if source is not None else bindings[0].source
    return frozenset(s for s in env.states() if any(b(s) in goal for b in bindings))


class ExistentialGoal:
    """Membership-only version of :func:`existential_goal` for large worlds."""

    def __init__(self, goal, bindings: Sequence[Binding]):
        self.goal, self.bindings = goal, tuple(bindings)

    def __contains__(self, s):
        return any(b(s) in self.goal for b in self.bindings)


def bind_policy(b: Binding, p: Policy) -> Policy:
    return lift_policy(b.implementation, p, b.projection.as_projection(b.source, b.target))


# binding maps ------------------------------------------------------------------

class BindingMap:
    """A function from world states to bindings (or None where undefined)."""

    def __init__(self, source: Environment, target: Environment, choose: Callable[[State], Optional[Tuple[int, ...]]],
                 diagnose: Callable[[State], str] | None = None, name: str = ""):
        self.source, self.target = source, target
        self._choose = choose
        self._diagnose = diagnose
        self._cache: Dict[Tuple[int, ...], Binding] = {}
        self.name = name

    def indices(self, s: State) -> Optional[Tuple[int, ...]]:
        return self._choose(s)

    def select(self, s: State) -> Optional[Binding]:
        idx = self._choose(s)
        if idx is None:
            return None
        b = self._cache.get(idx)
        if b is None:
            b = is_binding(SimpleProjection(idx), self.source, self.target)
            if not b:
                raise ValueError(f"binding map {self.name!r} chose a non-binding {idx}: {b.reason}")
            self._cache[idx] = b
        return b

    __call__ = select

    def diagnose(self, s: State) -> str:
        if self._choose(s) is not None:
            return ""
        return self._diagnose(s) if self._diagnose else "binding map undefined"


def binding_map_policy(m: BindingMap, p: Policy) -> Policy:
    """The stateless policy ``s -> A_{M(s)}(p(M(s)(s)))``; identity where ``M`` is undefined."""

    def choose(s):
        b = m.select(s)
        if b is None:
            return IDENTITY
        a = p(b(s))
        return None if a is None else b.implementation.get(a)

    return Policy(choose, name=f"p_{m.name}")


def _slots(schematic: ObjectWorld):
    mats = [k for k, t in enumerate(schematic.object_types) if isinstance(schematic.types[t], MaterialType)]
    if len(mats) != 1:
        raise ValueError("schematic world must have exactly one material slot")
    return mats[0], schematic.object_types[mats[0]]


def _goal_values(schematic: ObjectWorld, goal, slot: int) -> set:
    return {g[slot] for g in goal}


def pregoal_scanner(world: ObjectWorld, mtype: str, goal_values) -> Callable[[State], List[int]]:
    """Return ``s -> [indices of pregoal objects of mtype, left to right]``."""
    m = world.types[mtype]

    def f(s):
        return [k for k in world.indices_of_type(mtype) if classify_state(m, s[k], goal_values) == PREGOAL]

    return f


def _tool_indices(world: ObjectWorld, schematic: ObjectWorld, s: State, prefer_ready: bool):
    used = set()
    out = {}
    for k, t in enumerate(schematic.object_types):
        tt = schematic.types[t]
        if not isinstance(tt, ToolType):
            continue
        pool = [j for j in world.indices_of_type(t) if j not in used]
        if not pool:
            raise ValueError(f"world has too few objects of type {t!r}")
        pick = pool[0]
        if prefer_ready:
            ready = [j for j in pool if s[j] == tt.ready]
            if ready:
                pick = ready[0]
        used.add(pick)
        out[k] = pick
    return out


def _leftmost(world: ObjectWorld, schematic: ObjectWorld, goal, reset_tools: bool, name: str) -> BindingMap:
    mslot, mtype = _slots(schematic)
    gv = _goal_values(schematic, goal, mslot)
    pregoal = pregoal_scanner(world, mtype, gv)

    def choose(s):
        cands = pregoal(s)
        if not cands:
            return None
        tools = _tool_indices(world, schematic, s, reset_tools)
        return tuple(cands[0] if k == mslot else tools[k] for k in range(schematic.space.arity))

    return BindingMap(world, schematic, choose, lambda s: "no pregoal material", name=name)


def leftmost_map_m0(world: ObjectWorld, schematic: ObjectWorld, goal) -> BindingMap:
    """Leftmost pregoal material; tools fixed at the lowest index of their type."""
    return _leftmost(world, schematic, goal, False, "M0")


def leftmost_with_tools_m1(world: ObjectWorld, schematic: ObjectWorld, goal) -> BindingMap:
    """Like M0, but each tool slot takes the lowest-index tool currently in its ready state."""
    return _leftmost(world, schematic, goal, True, "M1")


def constant_map(world: Environment, schematic: Environment, indices: Sequence[int]) -> BindingMap:
    """Always the same binding; metabolism stops after the first object."""
    idx = tuple(indices)
    return BindingMap(world, schematic, lambda s: idx, name="constant")


def gaze_map(world: Environment, schematic: Environment, gaze: int, objects: Sequence[int] | None = None) -> BindingMap:
    """Bind the object the gaze component currently points at.

    The gaze component holds 0-based positions into ``objects`` (default:
    every non-gaze component, in order).
    """
    objs = list(objects) if objects is not None else [k for k in range(world.space.arity) if k != gaze]
    return BindingMap(world, schematic, lambda s: (objs[s[gaze]],), name="gaze")


def convention_map(kind: str, world: Environment, schematic: Environment, mtype: str | None = None, *,
                   start=None, locations: Mapping[int, int] | None = None, workspace=None) -> BindingMap:
    """Bindings maintained by a convention in the world.

    ``kind="state"``: bind the unique object of ``mtype`` not in ``start``.
    ``kind="spatial"``: bind the unique object whose location component
    (``locations[object] -> component``) equals ``workspace``.
    Zero or several candidates leave the map undefined.
    """
    if kind not in ("state", "spatial"):
        raise ValueError(f"unknown convention {kind!r}")
    if mtype is None:
        mtype = schematic.components[0].name
    pool = [k for k, d in enumerate(world.components) if d.name == mtype]
    if kind == "state":
        if start is None:
            start = world.components[pool[0]].values[0]

        def cands(s):
            return [k for k in pool if s[k] != start]
    else:
        if locations is None or workspace is None:
            raise ValueError("spatial convention needs locations and workspace")

        def cands(s):
            return [k for k in pool if s[locations[k]] == workspace]

    def choose(s):
        c = cands(s)
        return (c[0],) if len(c) == 1 else None

    def diagnose(s):
        c = cands(s)
        if not c:
            return f"{kind} convention: no bound {mtype}"
        return f"{kind} convention violated: {len(c)} candidates at components {c}"

    return BindingMap(world, schematic, choose, diagnose, name=f"{kind}-convention")


def bound_index_sequence(m: BindingMap, states: Iterable[State], slot: int = 0) -> List[Optional[int]]:
    """The material index ``m`` binds along a run (None where undefined)."""
    out = []
    for s in states:
        idx = m.indices(s)
        out.append(None if idx is None else idx[slot])
    return out
