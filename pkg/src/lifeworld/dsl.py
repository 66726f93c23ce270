"""The ``.lw`` world-specification format.

One declaration per statement, each terminated by ``;``::

    material egg chain fresh -> broken -> beaten -> cooked ;
    tool whisk ready clean states clean dirty reset wash: dirty -> clean ;
    action beat egg: broken -> beaten uses whisk: clean -> dirty ;
    world { egg egg-1 ; egg egg-2 ; whisk whisk-1 ; }
    goal exists egg cooked ;
    param cleanup = true ;

Declaration order matters: objects are laid out in the order they are
declared, and that order is what "leftmost" refers to everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

KEYWORDS = frozenset(
    {"material", "chain", "tool", "ready", "states", "reset", "action", "uses", "at", "world", "goal", "exists", "param"}
)
PUNCT = ("->", "{", "}", ";", ":", "=")
IDENT_START = set("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_")
IDENT_CHARS = IDENT_START | set("-.")


class Name(str):
    """A string that remembers where it was written.  Compares as a plain string."""

    line: int
    col: int

    def __new__(cls, value, line=0, col=0):
        obj = super().__new__(cls, value)
        obj.line, obj.col = line, col
        return obj


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def contains(self, line: int, col: int) -> bool:
        return (self.line, self.col) <= (line, col) <= (self.end_line, self.end_col)


class LwError(Exception):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line, self.column, self.message = line, column, message

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.column}: error: {self.message}"


class ParseError(LwError):
    def __init__(self, line: int, column: int, message: str, expected: Sequence[str] = ()):
        super().__init__(line, column, message)
        self.expected = tuple(expected)


class ValidationError(LwError):
    """A well-formed document that does not describe a valid world."""

    def __init__(self, line: int, column: int, message: str, span: Span | None = None):
        super().__init__(line, column, message)
        self.span = span


# tokens -----------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "punct", "eof"
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        return f"'{self.text}'"


def tokenize(text: str) -> List[Token]:
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("->", i):
            toks.append(Token("punct", "->", line, col))
            i += 2
            col += 2
            continue
        if c in "{};:=":
            toks.append(Token("punct", c, line, col))
            i += 1
            col += 1
            continue
        if c in IDENT_START:
            j = i + 1
            while j < n and text[j] in IDENT_CHARS and not text.startswith("->", j):
                j += 1
            word = text[i:j]
            toks.append(Token("kw" if word in KEYWORDS else "ident", word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(line, col, f"unexpected character {c!r}", ())
    toks.append(Token("eof", "", line, col))
    return toks


# document ---------------------------------------------------------------------

def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class MaterialDecl:
    name: Name
    chain: Tuple[Name, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ResetClause:
    action: Name
    src: Name
    dst: Name


@dataclass(frozen=True)
class ToolDecl:
    name: Name
    ready: Name
    states: Tuple[Name, ...]
    resets: Tuple[ResetClause, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Effect:
    type: Name
    src: Name
    dst: Name


@dataclass(frozen=True)
class ActionDecl:
    name: Name
    primary: Effect
    uses: Tuple[Effect, ...]
    at: Optional[Name]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ObjectDecl:
    type: Name
    id: Name
    at: Optional[Name]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class WorldDecl:
    objects: Tuple[ObjectDecl, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class GoalDecl:
    type: Name
    state: Name
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ParamDecl:
    key: Name
    values: Tuple[Name, ...]
    span: Optional[Span] = _span()


Decl = Union[MaterialDecl, ToolDecl, ActionDecl, WorldDecl, GoalDecl, ParamDecl]


@dataclass(frozen=True)
class SpecDocument:
    decls: Tuple[Decl, ...] = ()

    def of(self, kind) -> List:
        return [d for d in self.decls if isinstance(d, kind)]

    @property
    def materials(self) -> List[MaterialDecl]:
        return self.of(MaterialDecl)

    @property
    def tools(self) -> List[ToolDecl]:
        return self.of(ToolDecl)

    @property
    def actions(self) -> List[ActionDecl]:
        return self.of(ActionDecl)

    @property
    def worlds(self) -> List[WorldDecl]:
        return self.of(WorldDecl)

    @property
    def goals(self) -> List[GoalDecl]:
        return self.of(GoalDecl)

    @property
    def params(self) -> List[ParamDecl]:
        return self.of(ParamDecl)


# parser -----------------------------------------------------------------------

def _quote(items) -> str:
    items = [x if x in ("identifier", "end of input") else f"'{x}'" for x in items]
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " or " + items[-1]


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.k = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def fail(self, expected: Sequence[str]):
        t = self.tok
        raise ParseError(t.line, t.col, f"expected {_quote(expected)}, found {t.describe()}", expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("kw", "punct") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail([text])
        t = self.tok
        self.k += 1
        return t

    def ident(self, also: Sequence[str] = ()) -> Name:
        t = self.tok
        if t.kind != "ident":
            self.fail(["identifier", *also])
        self.k += 1
        return Name(t.text, t.line, t.col)

    def span_from(self, start: Token) -> Span:
        last = self.toks[self.k - 1]
        return Span(start.line, start.col, last.line, last.col + len(last.text) - 1)

    def document(self) -> SpecDocument:
        decls = []
        starters = ("material", "tool", "action", "world", "goal", "param")
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "kw" or t.text not in starters:
                self.fail([*starters, "end of input"])
            decls.append(getattr(self, "p_" + t.text)())
        return SpecDocument(tuple(decls))

    def p_material(self):
        start = self.expect("material")
        name = self.ident()
        self.expect("chain")
        chain = [self.ident()]
        while not self.at(";"):
            if not self.at("->"):
                self.fail(["->", ";"])
            self.k += 1
            chain.append(self.ident())
        self.expect(";")
        return MaterialDecl(name, tuple(chain), self.span_from(start))

    def p_tool(self):
        start = self.expect("tool")
        name = self.ident()
        self.expect("ready")
        ready = self.ident()
        self.expect("states")
        states = [self.ident()]
        while self.tok.kind == "ident":
            states.append(self.ident())
        resets = []
        while self.at("reset"):
            self.k += 1
            act = self.ident()
            self.expect(":")
            a = self.ident()
            self.expect("->")
            b = self.ident()
            resets.append(ResetClause(act, a, b))
        if not self.at(";"):
            self.fail(["identifier", "reset", ";"] if not resets else ["reset", ";"])
        self.k += 1
        return ToolDecl(name, ready, tuple(states), tuple(resets), self.span_from(start))

    def effect(self) -> Effect:
        t = self.ident()
        self.expect(":")
        a = self.ident()
        self.expect("->")
        b = self.ident()
        return Effect(t, a, b)

    def p_action(self):
        start = self.expect("action")
        name = self.ident()
        primary = self.effect()
        uses = []
        while self.at("uses"):
            self.k += 1
            uses.append(self.effect())
        at = None
        if self.at("at"):
            self.k += 1
            at = self.ident()
        if not self.at(";"):
            self.fail(["uses", "at", ";"] if at is None else [";"])
        self.k += 1
        return ActionDecl(name, primary, tuple(uses), at, self.span_from(start))

    def p_world(self):
        start = self.expect("world")
        self.expect("{")
        objs = []
        while not self.at("}"):
            if self.tok.kind != "ident":
                self.fail(["identifier", "}"])
            o0 = self.tok
            t = self.ident()
            oid = self.ident()
            at = None
            if self.at("at"):
                self.k += 1
                at = self.ident()
            if not self.at(";"):
                self.fail(["at", ";"] if at is None else [";"])
            self.k += 1
            objs.append(ObjectDecl(t, oid, at, self.span_from(o0)))
        self.expect("}")
        return WorldDecl(tuple(objs), self.span_from(start))

    def p_goal(self):
        start = self.expect("goal")
        self.expect("exists")
        t = self.ident()
        s = self.ident()
        self.expect(";")
        return GoalDecl(t, s, self.span_from(start))

    def p_param(self):
        start = self.expect("param")
        key = self.ident()
        self.expect("=")
        vals = [self.ident()]
        while not self.at(";"):
            if self.tok.kind != "ident":
                self.fail(["identifier", ";"])
            vals.append(self.ident())
        self.k += 1
        return ParamDecl(key, tuple(vals), self.span_from(start))


def parse(text: str) -> SpecDocument:
    """Parse a document, raising :class:`ParseError` at the first problem."""
    return _Parser(text).document()


# pretty printing ----------------------------------------------------------------

def pretty_print(doc: SpecDocument) -> str:
    out = []
    for d in doc.decls:
        if isinstance(d, MaterialDecl):
            out.append(f"material {d.name} chain {' -> '.join(d.chain)} ;")
        elif isinstance(d, ToolDecl):
            line = f"tool {d.name} ready {d.ready} states {' '.join(d.states)}"
            for r in d.resets:
                line += f" reset {r.action}: {r.src} -> {r.dst}"
            out.append(line + " ;")
        elif isinstance(d, ActionDecl):
            p = d.primary
            line = f"action {d.name} {p.type}: {p.src} -> {p.dst}"
            for u in d.uses:
                line += f" uses {u.type}: {u.src} -> {u.dst}"
            if d.at is not None:
                line += f" at {d.at}"
            out.append(line + " ;")
        elif isinstance(d, WorldDecl):
            out.append("world {")
            for o in d.objects:
                out.append(f"  {o.type} {o.id}" + (f" at {o.at}" if o.at is not None else "") + " ;")
            out.append("}")
        elif isinstance(d, GoalDecl):
            out.append(f"goal exists {d.type} {d.state} ;")
        elif isinstance(d, ParamDecl):
            out.append(f"param {d.key} = {' '.join(d.values)} ;")
    return "\n".join(out) + ("\n" if out else "")


# validation and elaboration ----------------------------------------------------

@dataclass(frozen=True)
class KitchenConfig:
    """Scenario parameters read from ``param`` declarations."""

    priority: Tuple[str, ...] = ()
    cleanup: bool = False
    timers: Dict[Tuple[str, str], int] = field(default_factory=dict)
    max_ticks: int = 500
    params: Dict[str, Tuple[str, ...]] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class WorldModel:
    """A checked document: every name resolved, every clause validated."""

    types: Dict[str, object]
    actions: Tuple[ActionDecl, ...]
    objects: Tuple[ObjectDecl, ...]
    goals: Tuple[Tuple[str, str], ...]
    config: KitchenConfig
    doc: SpecDocument = field(repr=False)

    def materials(self) -> List[str]:
        from .schematic import MaterialType

        return [n for n, t in self.types.items() if isinstance(t, MaterialType)]

    def tools(self) -> List[str]:
        from .schematic import ToolType

        return [n for n, t in self.types.items() if isinstance(t, ToolType)]


def _err(name, msg, span=None):
    line = getattr(name, "line", 0) or (span.line if span else 0)
    col = getattr(name, "col", 0) or (span.col if span else 0)
    return ValidationError(line, col, msg, span)


def _reachable_ready(states, resets, ready):
    back = {s: set() for s in states}
    for r in resets:
        back[r.dst].add(r.src)
    seen = {ready}
    todo = [ready]
    while todo:
        t = todo.pop()
        for s in back[t]:
            if s not in seen:
                seen.add(s)
                todo.append(s)
    return [s for s in states if s not in seen]


def resolve(doc: SpecDocument) -> WorldModel:
    """Check a parsed document and resolve its names.  Raises :class:`ValidationError`."""
    from .schematic import MaterialType, ToolType

    types: Dict[str, object] = {}
    spans: Dict[str, Span] = {}
    for d in doc.decls:
        if isinstance(d, (MaterialDecl, ToolDecl)):
            if d.name in types:
                raise _err(d.name, f"duplicate type '{d.name}'", d.span)
            spans[d.name] = d.span
            types[d.name] = None

    primary_from: Dict[Tuple[str, str], ActionDecl] = {}
    actions = doc.actions
    for d in actions:
        t = d.primary.type
        if t in types and (t, d.primary.src) not in primary_from:
            primary_from[(t, d.primary.src)] = d

    for d in doc.decls:
        if isinstance(d, MaterialDecl):
            seen = set()
            for s in d.chain:
                if s in seen:
                    raise _err(s, f"duplicate chain state '{s}'", d.span)
                seen.add(s)
            steps = []
            for a, b in zip(d.chain, d.chain[1:]):
                act = primary_from.get((d.name, a))
                steps.append(act.name if act is not None else f"{a}->{b}")
            types[d.name] = MaterialType(d.name, tuple(d.chain), tuple(steps))
        elif isinstance(d, ToolDecl):
            seen = set()
            for s in d.states:
                if s in seen:
                    raise _err(s, f"duplicate tool state '{s}'", d.span)
                seen.add(s)
            if d.ready not in seen:
                raise _err(d.ready, f"ready state '{d.ready}' is not one of the states of '{d.name}'", d.span)
            for r in d.resets:
                for s in (r.src, r.dst):
                    if s not in seen:
                        raise _err(s, f"'{s}' is not a state of tool '{d.name}'", d.span)
            stranded = _reachable_ready(d.states, d.resets, d.ready)
            if stranded:
                raise _err(d.name, f"tool '{d.name}': ready state '{d.ready}' cannot be reached from "
                                   f"'{stranded[0]}' by reset actions (reachability clause)", d.span)
            types[d.name] = ToolType(d.name, tuple(d.states), d.ready, tuple((r.action, r.src, r.dst) for r in d.resets))

    def states_of(t):
        x = types[t]
        return x.chain if isinstance(x, MaterialType) else x.states

    def check_effect(e: Effect, span, role):
        if e.type not in types:
            raise _err(e.type, f"undeclared type '{e.type}'", span)
        for s in (e.src, e.dst):
            if s not in states_of(e.type):
                raise _err(s, f"'{s}' is not a state of '{e.type}'", span)
        x = types[e.type]
        if isinstance(x, MaterialType):
            i, j = x.position(e.src), x.position(e.dst)
            if not (j == i + 1 or (role == "uses" and i == j)):
                raise _err(e.src, f"'{e.src} -> {e.dst}' is not a step of the chain of '{e.type}'", span)
        elif role == "primary":
            raise _err(e.type, f"'{e.type}' is a tool; tools change state only through uses clauses "
                               f"and reset actions (focus clause)", span)
        elif e.src != x.ready:
            raise _err(e.src, f"tool '{e.type}' is required in state '{e.src}', but actions may only require "
                              f"its ready state '{x.ready}' (trichotomy clause)", span)

    seen_from: Dict[Tuple[str, str], ActionDecl] = {}
    for d in actions:
        check_effect(d.primary, d.span, "primary")
        key = (d.primary.type, d.primary.src)
        if key in seen_from:
            raise _err(d.primary.src, f"'{d.primary.type}' already has an action from '{d.primary.src}' "
                                      f"('{seen_from[key].name}'); a chain state has one next step", d.span)
        seen_from[key] = d
        for u in d.uses:
            check_effect(u, d.span, "uses")
        if d.at is not None and d.at in types:
            if d.at not in [u.type for u in d.uses]:
                raise _err(d.at, f"'at {d.at}' names a type this action does not use", d.span)

    worlds = doc.worlds
    if len(worlds) > 1:
        w = worlds[1]
        raise ValidationError(w.span.line, w.span.col, "duplicate world declaration", w.span)
    objects = worlds[0].objects if worlds else ()
    ids = set()
    for o in objects:
        if o.type not in types:
            raise _err(o.type, f"undeclared type '{o.type}'", o.span)
        if o.id in ids:
            raise _err(o.id, f"duplicate object id '{o.id}'", o.span)
        ids.add(o.id)

    goals = []
    goal_state: Dict[str, str] = {}
    for g in doc.goals:
        if g.type not in types:
            raise _err(g.type, f"undeclared type '{g.type}'", g.span)
        if not isinstance(types[g.type], MaterialType):
            raise _err(g.type, f"goal type '{g.type}' is not a material", g.span)
        if g.state not in types[g.type].chain:
            raise _err(g.state, f"'{g.state}' is not a state of '{g.type}'", g.span)
        if goal_state.setdefault(g.type, g.state) != g.state:
            raise _err(g.state, f"conflicting goal states for '{g.type}'", g.span)
        if not any(o.type == g.type for o in objects):
            raise _err(g.type, f"the world has no objects of type '{g.type}'", g.span)
        goals.append((str(g.type), str(g.state)))

    config = _config(doc, types, states_of)
    for p in doc.params:
        parts = p.key.split(".")
        if len(parts) == 3 and (parts[1], parts[2]) in seen_from:
            act = seen_from[(parts[1], parts[2])]
            raise _err(p.key, f"'{parts[2]}' is timed, but action '{act.name}' also leaves it", p.span)
    return WorldModel(types, tuple(actions), tuple(objects), tuple(goals), config, doc)


def _config(doc, types, states_of) -> KitchenConfig:
    from .schematic import MaterialType

    raw: Dict[str, Tuple[str, ...]] = {}
    timers: Dict[Tuple[str, str], int] = {}
    priority: Tuple[str, ...] = ()
    cleanup = False
    max_ticks = 500

    def integer(p, lo=1):
        if len(p.values) != 1 or not p.values[0].isdigit() or int(p.values[0]) < lo:
            raise _err(p.values[0], f"param '{p.key}' needs a single integer >= {lo}", p.span)
        return int(p.values[0])

    for p in doc.params:
        if p.key in raw:
            raise _err(p.key, f"duplicate param '{p.key}'", p.span)
        raw[p.key] = tuple(str(v) for v in p.values)
        if p.key == "priority":
            for v in p.values:
                if v not in types:
                    raise _err(v, f"undeclared type '{v}'", p.span)
            priority = tuple(str(v) for v in p.values)
        elif p.key == "cleanup":
            if len(p.values) != 1 or p.values[0] not in ("true", "false"):
                raise _err(p.values[0], "param 'cleanup' must be true or false", p.span)
            cleanup = p.values[0] == "true"
        elif p.key == "max-ticks":
            max_ticks = integer(p)
        elif p.key.startswith("auto."):
            parts = p.key.split(".")
            if len(parts) != 3:
                raise _err(p.key, "timer params look like auto.<type>.<state>", p.span)
            _, t, s = parts
            if t not in types:
                raise _err(p.key, f"undeclared type '{t}'", p.span)
            if s not in states_of(t):
                raise _err(p.key, f"'{s}' is not a state of '{t}'", p.span)
            x = types[t]
            if isinstance(x, MaterialType):
                if s == x.final:
                    raise _err(p.key, f"'{s}' is the last state of '{t}'; nothing to advance to", p.span)
            elif x.reset_from(s) is None:
                raise _err(p.key, f"tool '{t}' has no reset from '{s}'", p.span)
            timers[(t, s)] = integer(p)
    return KitchenConfig(priority, cleanup, timers, max_ticks, raw)


class ExistsGoal:
    """``count`` or more objects among ``indices`` are in ``state``."""

    def __init__(self, indices: Sequence[int], state, count: int = 1, label: str = ""):
        self.indices, self.state, self.count, self.label = tuple(indices), state, count, label

    def __contains__(self, s):
        return sum(1 for k in self.indices if s[k] == self.state) >= self.count

    def __repr__(self):
        return f"ExistsGoal({self.label or self.state}, x{self.count})"


class AllGoals:
    def __init__(self, goals):
        self.goals = tuple(goals)

    def __contains__(self, s):
        return all(s in g for g in self.goals)


def world_steps(model: WorldModel):
    """Step templates for every action and reset in the model, same-named cases merged."""
    from .schematic import Step, ToolType

    grouped: Dict[Tuple[str, Tuple[str, ...]], List] = {}
    for d in model.actions:
        slots = (str(d.primary.type),) + tuple(str(u.type) for u in d.uses)
        case = ((str(d.primary.src), str(d.primary.dst)),) + tuple((str(u.src), str(u.dst)) for u in d.uses)
        grouped.setdefault((str(d.name), slots), []).append(case)
    for name, t in model.types.items():
        if isinstance(t, ToolType):
            for act, a, b in t.resets:
                grouped.setdefault((act, (name,)), []).append(((a, b),))
    # timed chain states advance on their own in the kitchen; formally that is one more step
    for (t, s) in model.config.timers:
        m = model.types[t]
        if not isinstance(m, ToolType):
            grouped.setdefault(("wait", (t,)), []).append(((s, m.chain[m.position(s) + 1]),))
    return [Step(n, slots, tuple(cases)) for (n, slots), cases in grouped.items()]


class Elaborated(tuple):
    """``(env, dcps, config)``, with the resolved model and combined goal as attributes."""

    def __new__(cls, env, dcps, config, model, goal):
        obj = super().__new__(cls, (env, dcps, config))
        obj.env, obj.dcps, obj.config, obj.model, obj.goal = env, dcps, config, model, goal
        return obj


def elaborate(doc: SpecDocument) -> Elaborated:
    """Build the object world, one existential-goal problem per goal, and the scenario parameters."""
    from .env import DiscreteControlProblem
    from .schematic import ObjectWorld

    model = resolve(doc)
    env = ObjectWorld([(str(o.id), str(o.type)) for o in model.objects], model.types, world_steps(model), name="world")
    dcps = []
    need: Dict[Tuple[str, str], int] = {}
    for t, s in model.goals:
        need[(t, s)] = need.get((t, s), 0) + 1
        dcps.append(DiscreteControlProblem(env, ExistsGoal(env.indices_of_type(t), s, 1, f"{t} {s}")))
    goal = AllGoals(ExistsGoal(env.indices_of_type(t), s, c, f"{t} {s}") for (t, s), c in need.items())
    return Elaborated(env, dcps, model.config, model, goal)


def load(path) -> Elaborated:
    with open(path, encoding="utf-8") as fh:
        return elaborate(parse(fh.read()))
