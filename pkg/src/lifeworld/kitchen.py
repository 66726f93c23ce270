"""A tick-driven kitchen and the stateless cook that runs it.

Each object carries ``(state, location, elapsed)``.  ``elapsed`` counts
ticks spent in the current state and drives the timers declared with
``param auto.<type>.<state> = N``: after N ticks a material moves to its
next chain state and a tool takes its reset from that state.

The cook keeps nothing between ticks.  Everything it needs is read off
the world: which materials are in progress (started but short of their
goal state), which tools are held (a tool whose state an action changed
records the material in its location), and how many orders are done
(objects already in the goal state).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .dsl import ActionDecl, WorldModel, elaborate, parse, resolve
from .schematic import MaterialType, ObjectWorld, ToolType

ObjState = Tuple[str, Optional[str], int]
KState = Tuple[ObjState, ...]

STEP = "step"
RESET = "reset"


@dataclass(frozen=True)
class GroundAction:
    """An action with its objects chosen.  ``objects`` are indices, primary first."""

    kind: str
    name: str
    objects: Tuple[int, ...]
    decl: Optional[ActionDecl] = None

    def label(self, kitchen: "KitchenWorld") -> str:
        ids = " ".join(kitchen.ids[k] for k in self.objects)
        return f"{self.name} {ids}".upper()


@dataclass(frozen=True)
class StepResult:
    """What the cook does this tick.  ``action`` is None when it idles.

    ``blocked`` names the type that stopped the most urgent material;
    ``deadlock`` is set when nothing can move and no timer is running.
    """

    action: Optional[GroundAction]
    blocked: Optional[str] = None
    deadlock: bool = False


class KitchenError(Exception):
    pass


class KitchenWorld:
    def __init__(self, model: WorldModel):
        self.model = model
        self.config = model.config
        self.types = model.types
        self.ids = tuple(str(o.id) for o in model.objects)
        self.object_types = tuple(str(o.type) for o in model.objects)
        self.init_locs = tuple(None if o.at is None else str(o.at) for o in model.objects)
        self.by_id = {oid: k for k, oid in enumerate(self.ids)}
        self.by_label = {oid.upper(): k for k, oid in enumerate(self.ids)}
        self.next_action: Dict[Tuple[str, str], ActionDecl] = {
            (str(d.primary.type), str(d.primary.src)): d for d in model.actions
        }
        self.need: Dict[Tuple[str, str], int] = {}
        for g in model.goals:
            self.need[g] = self.need.get(g, 0) + 1
        self.goal_state = {t: s for t, s in model.goals}
        self.goal_pos = {t: self.types[t].position(s) for t, s in model.goals}
        self.timers = dict(self.config.timers)
        prio = list(self.config.priority)
        goal_types = []
        for t, _ in model.goals:
            if t not in goal_types:
                goal_types.append(t)
        self.order_types = sorted(goal_types, key=lambda t: (prio.index(t) if t in prio else len(prio), goal_types.index(t)))
        self.rank = {t: k for k, t in enumerate(self.order_types)}
        self.of_type: Dict[str, List[int]] = {}
        for k, t in enumerate(self.object_types):
            self.of_type.setdefault(t, []).append(k)

    @classmethod
    def from_text(cls, text: str) -> "KitchenWorld":
        return cls(resolve(parse(text)))

    @classmethod
    def from_file(cls, path) -> "KitchenWorld":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def __len__(self):
        return len(self.ids)

    def is_tool(self, k: int) -> bool:
        return isinstance(self.types[self.object_types[k]], ToolType)

    def initial_state(self) -> KState:
        out = []
        for k, t in enumerate(self.object_types):
            x = self.types[t]
            out.append((x.start if isinstance(x, MaterialType) else x.ready, self.init_locs[k], 0))
        return tuple(out)

    def environment(self) -> ObjectWorld:
        """The formal object world (no locations, timers become ``wait`` steps)."""
        return elaborate(self.model.doc).env

    # derived bookkeeping ----------------------------------------------------

    def in_progress(self, s: KState, k: int) -> bool:
        t = self.object_types[k]
        if t not in self.goal_pos:
            return False
        pos = self.types[t].position(s[k][0])
        return 0 < pos < self.goal_pos[t]

    def actives(self, s: KState) -> List[int]:
        ks = [k for k in range(len(s)) if self.in_progress(s, k)]
        return sorted(ks, key=lambda k: (self.rank[self.object_types[k]], k))

    def done_count(self, s: KState, t: str, state: str) -> int:
        return sum(1 for k in self.of_type.get(t, ()) if s[k][0] == state)

    def outstanding(self, s: KState) -> Dict[str, int]:
        """Per goal type, how many more objects still need starting."""
        out = {}
        for (t, st), c in self.need.items():
            busy = sum(1 for k in self.of_type[t] if self.in_progress(s, k))
            out[t] = c - self.done_count(s, t, st) - busy
        return out

    def orders_done(self, s: KState) -> bool:
        return all(self.done_count(s, t, st) >= c for (t, st), c in self.need.items())

    def holders(self, s: KState) -> Dict[int, int]:
        """Object -> the in-progress material that holds it (or sits in it)."""
        out = {}
        for m in range(len(s)):
            if not self.in_progress(s, m):
                continue
            loc = s[m][1]
            if loc in self.by_id:
                out.setdefault(self.by_id[loc], m)
        for k, (_, loc, _) in enumerate(s):
            if loc in self.by_id and self.in_progress(s, self.by_id[loc]):
                out.setdefault(k, self.by_id[loc])
        return out

    def timed(self, s: KState, k: int) -> bool:
        return (self.object_types[k], s[k][0]) in self.timers

    def tools_reset(self, s: KState) -> bool:
        return all(s[k][0] == self.types[self.object_types[k]].ready for k in range(len(s)) if self.is_tool(k))

    def finished(self, s: KState) -> bool:
        if not self.orders_done(s) or self.actives(s):
            return False
        return self.tools_reset(s) if self.config.cleanup else True

    # dynamics -------------------------------------------------------------

    def tick(self, s: KState) -> KState:
        """One clock cycle of the active objects: age everything, fire due timers."""
        out = []
        for k, (st, loc, el) in enumerate(s):
            t = self.object_types[k]
            n = self.timers.get((t, st))
            if n is None:
                # only timed states keep a count, so equal situations are equal states
                out.append((st, loc, 0))
                continue
            el += 1
            if el >= n:
                x = self.types[t]
                if isinstance(x, MaterialType):
                    st = x.chain[x.position(st) + 1]
                else:
                    st = x.reset_from(st)[2]
                el = 0
            out.append((st, loc, el))
        return tuple(out)

    def apply(self, s: KState, g: GroundAction) -> KState:
        """Perform ``g``; raises :class:`KitchenError` if it is not applicable."""
        out = list(s)
        if g.kind == RESET:
            (k,) = g.objects
            r = self.types[self.object_types[k]].reset_from(s[k][0])
            if r is None or r[0] != g.name:
                raise KitchenError(f"{g.name} does not apply to {self.ids[k]} in state {s[k][0]}")
            out[k] = (r[2], s[k][1], 0)
            return tuple(out)
        d = g.decl
        p = g.objects[0]
        effects = (d.primary,) + d.uses
        if len(g.objects) != len(effects):
            raise KitchenError(f"{g.name} needs {len(effects)} objects")
        for k, e in zip(g.objects, effects):
            if self.object_types[k] != e.type or s[k][0] != e.src:
                raise KitchenError(f"{g.name}: {self.ids[k]} is not a {e.type} in state {e.src}")
        if len(set(g.objects)) != len(g.objects):
            raise KitchenError(f"{g.name}: an object appears twice")
        for k, e in zip(g.objects[1:], d.uses):
            st, loc, el = s[k]
            if e.src != e.dst:
                out[k] = (str(e.dst), self.ids[p], 0)
        loc = s[p][1]
        if d.at is not None:
            if d.at in self.types:
                loc = self.ids[next(k for k, e in zip(g.objects[1:], d.uses) if e.type == d.at)]
            else:
                loc = str(d.at)
        out[p] = (str(d.primary.dst), loc, 0)
        return tuple(out)

    def ground(self, s: KState, d: ActionDecl, p: int, held: Dict[int, int]):
        """Choose objects for ``d`` with primary ``p``.

        Returns a step, a reset that frees a needed tool, or the name of the
        type nothing could be found for.
        """
        chosen = [p]
        for u in d.uses:
            pool = [k for k in self.of_type.get(u.type, ()) if k not in chosen and held.get(k, p) == p]
            ready = [k for k in pool if s[k][0] == u.src]
            if ready:
                here = s[p][1]
                mine = [k for k in ready if s[k][1] == self.ids[p] or (here is not None and s[k][1] == here)]
                chosen.append((mine or ready)[0])
                continue
            x = self.types[u.type]
            if isinstance(x, ToolType):
                for k in pool:
                    r = x.reset_from(s[k][0])
                    if r is not None and not self.timed(s, k):
                        return GroundAction(RESET, r[0], (k,))
            return str(u.type)
        return GroundAction(STEP, str(d.name), tuple(chosen), d)


def toast_step(kitchen: KitchenWorld, s: KState) -> StepResult:
    """One decision of the cook, computed from the world state alone.

    Materials already in progress come first (by priority, then leftmost);
    the first one whose next step can be grounded, or whose missing tool
    can be reset, acts.  Otherwise a new order is started on the leftmost
    untouched object of its type.  With nothing left to cook and cleanup
    on, dirty tools are reset one at a time.
    """
    held = kitchen.holders(s)
    blocked = None
    busy = any(kitchen.timed(s, k) for k in range(len(s)))
    for k in kitchen.actives(s):
        if kitchen.timed(s, k):
            continue
        t = kitchen.object_types[k]
        d = kitchen.next_action.get((t, s[k][0]))
        if d is None:
            blocked = blocked or t
            continue
        r = kitchen.ground(s, d, k, held)
        if isinstance(r, GroundAction):
            return StepResult(r)
        blocked = blocked or r
    left = kitchen.outstanding(s)
    for t in kitchen.order_types:
        if left[t] <= 0:
            continue
        start = kitchen.types[t].start
        fresh = [k for k in kitchen.of_type[t] if s[k][0] == start and k not in held]
        if not fresh:
            blocked = blocked or t
            continue
        d = kitchen.next_action.get((t, start))
        if d is None:
            blocked = blocked or t
            continue
        r = kitchen.ground(s, d, fresh[0], held)
        if isinstance(r, GroundAction):
            return StepResult(r)
        blocked = blocked or r
    work = kitchen.actives(s) or any(v > 0 for v in left.values())
    if not work and kitchen.config.cleanup:
        for k in range(len(s)):
            if not kitchen.is_tool(k) or k in held or kitchen.timed(s, k):
                continue
            r = kitchen.types[kitchen.object_types[k]].reset_from(s[k][0])
            if r is not None and s[k][0] != kitchen.types[kitchen.object_types[k]].ready:
                return StepResult(GroundAction(RESET, r[0], (k,)))
    if work and not busy:
        return StepResult(None, blocked, deadlock=True)
    return StepResult(None, blocked)


# traces ---------------------------------------------------------------------

ACTION, MILESTONE, BLOCKED = "action", "milestone", "blocked"


@dataclass(frozen=True)
class TraceEntry:
    tick: int
    kind: str
    text: str

    def line(self) -> str:
        return f"{self.tick}\t{self.text}"


@dataclass(frozen=True)
class EventTrace:
    entries: Tuple[TraceEntry, ...]
    start: int
    ticks: int
    final: KState
    completed: bool

    def format(self) -> str:
        return "".join(e.line() + "\n" for e in self.entries)

    def actions(self) -> List[TraceEntry]:
        return [e for e in self.entries if e.kind == ACTION]

    def milestones(self) -> List[TraceEntry]:
        return [e for e in self.entries if e.kind == MILESTONE]


def milestone_text(kitchen: KitchenWorld, s: KState, k: int) -> str:
    loc = s[k][1] or "nowhere"
    body = f"{kitchen.object_types[k]} {s[k][0]} {loc}".upper()
    return f"*** Done with goal ({body}) ***"


def _new_milestones(kitchen: KitchenWorld, before: Optional[KState], s: KState, emitted: Dict) -> List[int]:
    out = []
    for (t, st), c in kitchen.need.items():
        for k in kitchen.of_type[t]:
            if s[k][0] == st and (before is None or before[k][0] != st) and emitted.get((t, st), 0) < c:
                emitted[(t, st)] = emitted.get((t, st), 0) + 1
                out.append(k)
    return sorted(out)


def run_toast(kitchen: KitchenWorld, max_ticks: int | None = None, start: int = 0) -> EventTrace:
    """Simulate from the initial state.

    Every tick: the clock advances the active objects, newly reached goals
    are announced, and then the cook takes one step.  ``start`` only
    offsets the tick numbers.
    """
    if max_ticks is None:
        max_ticks = kitchen.config.max_ticks
    if max_ticks < 1:
        raise ValueError("max_ticks must be >= 1")
    s = kitchen.initial_state()
    entries: List[TraceEntry] = []
    emitted: Dict = {}
    before = None
    for t in range(start, start + max_ticks):
        if t > start:
            s = kitchen.tick(s)
        for k in _new_milestones(kitchen, before, s, emitted):
            entries.append(TraceEntry(t, MILESTONE, milestone_text(kitchen, s, k)))
        if kitchen.finished(s):
            return EventTrace(tuple(entries), start, t - start, s, True)
        r = toast_step(kitchen, s)
        before = s
        if r.action is not None:
            entries.append(TraceEntry(t, ACTION, r.action.label(kitchen)))
            s = kitchen.apply(s, r.action)
        elif r.deadlock:
            entries.append(TraceEntry(t, BLOCKED, f"!!! Blocked: no usable {str(r.blocked).upper()} !!!"))
            return EventTrace(tuple(entries), start, t - start, s, False)
    return EventTrace(tuple(entries), start, max_ticks, s, False)


_LINE = re.compile(r"^(\d+)\t(.*)$")


def parse_trace(text: str) -> List[TraceEntry]:
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        m = _LINE.match(raw)
        if not m:
            raise ValueError(f"line {n}: not a trace line: {raw!r}")
        body = m.group(2)
        kind = MILESTONE if body.startswith("***") else BLOCKED if body.startswith("!!!") else ACTION
        out.append(TraceEntry(int(m.group(1)), kind, body))
    return out


def decode(kitchen: KitchenWorld, s: KState, text: str) -> GroundAction:
    """Turn an action line back into a ground action, checked against ``s``."""
    name, *labels = text.split()
    try:
        objs = tuple(kitchen.by_label[x] for x in labels)
    except KeyError as e:
        raise KitchenError(f"unknown object {e.args[0]}") from None
    name = name.lower()
    if len(objs) == 1 and kitchen.is_tool(objs[0]):
        return GroundAction(RESET, name, objs)
    p = objs[0]
    d = kitchen.next_action.get((kitchen.object_types[p], s[p][0]))
    if d is None or d.name != name:
        raise KitchenError(f"{text}: not the next step of {kitchen.ids[p]}")
    return GroundAction(STEP, name, objs, d)


def replay(kitchen: KitchenWorld, entries: Iterable[TraceEntry], until: int | None = None, start: int = 0) -> KState:
    """Re-run recorded actions through the clock.

    Returns the state at tick ``until`` just before the cook acts (or the
    state after the last entry when ``until`` is None).  Raises if any
    recorded action is not applicable when it was taken.
    """
    acts: Dict[int, str] = {}
    for e in entries:
        if e.kind == ACTION:
            if e.tick in acts:
                raise KitchenError(f"two actions at tick {e.tick}")
            acts[e.tick] = e.text
    last = max(acts, default=start)
    end = until if until is not None else last + 1
    s = kitchen.initial_state()
    for t in range(start, end + 1):
        if t > start:
            s = kitchen.tick(s)
        if t == end and until is not None:
            return s
        if t in acts:
            s = kitchen.apply(s, decode(kitchen, s, acts[t]))
        if until is None and t == last:
            return s
    return s


def load_kitchen(path) -> KitchenWorld:
    return KitchenWorld.from_file(path)


def scenario_path(name: str = "breakfast.lw") -> str:
    from importlib.resources import files

    return str(files("lifeworld") / "scenarios" / name)
