"""Interleavings of policies, bounded fairness, and conjunctive goals.

Round-robin needs a tick it can read off the state.  :func:`with_parity`
adds one: the world is run in parallel with the flip-flop, so every step
toggles a 0/1 component that the interleaving consults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .binding import Binding, BindingMap, SimpleProjection, bind_policy, binding_map_policy
from .env import IDENTITY, Domain, Environment, Policy, State, identity_action, Action, make_f, reachable_set
from .products import PARALLEL, ProductEnvironment, pair_name, parallel_product, serial_product

FIRST, SECOND = 0, 1


class Interleaving:
    """``pick(s, p1, p2)`` returns FIRST or SECOND."""

    def __init__(self, pick: Callable[[State, Policy, Policy], int], name: str = ""):
        self._pick = pick
        self.name = name

    def __call__(self, s: State, p1: Policy, p2: Policy) -> int:
        k = self._pick(s, p1, p2)
        if k not in (FIRST, SECOND):
            raise ValueError(f"interleaving {self.name!r} returned {k!r}")
        return k

    def __repr__(self):
        return f"Interleaving({self.name})"


def round_robin(parity: int = -1, first_on: int = 0) -> Interleaving:
    """Pick the first policy when component ``parity`` equals ``first_on``."""
    return Interleaving(lambda s, p1, p2: FIRST if s[parity] == first_on else SECOND, name="round-robin")


def always_first() -> Interleaving:
    return Interleaving(lambda s, p1, p2: FIRST, name="always-first")


def always_second() -> Interleaving:
    return Interleaving(lambda s, p1, p2: SECOND, name="always-second")


def by_goal(goal1) -> Interleaving:
    """Run the first policy until its goal holds, then the second."""
    return Interleaving(lambda s, p1, p2: SECOND if s in goal1 else FIRST, name="by-goal")


def when(pred: Callable[[State], bool], name: str = "conditional") -> Interleaving:
    """Pick the first policy exactly where ``pred`` holds."""
    return Interleaving(lambda s, p1, p2: FIRST if pred(s) else SECOND, name=name)


def interleave(I: Interleaving, p1: Policy, p2: Policy) -> Policy:
    return Policy(lambda s: (p1 if I(s, p1, p2) == FIRST else p2)(s), name=f"{I.name}({p1.name},{p2.name})")


def _succ(env: Environment, p: Policy, s: State) -> Optional[State]:
    a = p(s)
    if a is None or a not in env.action_names:
        return None
    return env.apply(a, s)


def fairness_witness(I: Interleaving, p1: Policy, p2: Policy, env: Environment,
                     s0=None, horizon: int | None = None) -> Optional[State]:
    """A start state from which one policy is not executed within ``horizon`` steps, or None.

    A step counts as executing every policy whose successor coincides with
    the picked one, since the two cannot be told apart at that state.
    Starts are every state reachable from ``s0`` (all states if omitted).
    """
    if horizon is None:
        horizon = 2 * len(env)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    starts = reachable_set(env, s0) if s0 is not None else env.states()
    pols = (p1, p2)
    for start in starts:
        s = start
        done = set()
        for _ in range(horizon):
            k = I(s, p1, p2)
            t = _succ(env, pols[k], s)
            if t is None:
                break
            done.add(k)
            if _succ(env, pols[1 - k], s) == t:
                done.add(1 - k)
            if len(done) == 2:
                break
            s = t
        if len(done) < 2:
            return start
    return None


def is_fair(I: Interleaving, p1: Policy, p2: Policy, env: Environment, s0=None, horizon: int | None = None) -> bool:
    return fairness_witness(I, p1, p2, env, s0, horizon) is None


def independent(pi1: SimpleProjection | Binding, pi2: SimpleProjection | Binding) -> bool:
    return not set(pi1.indices) & set(pi2.indices)


# parity worlds ---------------------------------------------------------------

def with_parity(env: Environment) -> ProductEnvironment:
    """``env || F``: every action also toggles a trailing 0/1 component."""
    return parallel_product(env, make_f())


def on_parity(p: Policy) -> Policy:
    """Lift a policy on ``env`` to ``with_parity(env)``."""

    def choose(s):
        a = p(s[:-1])
        return None if a is None else pair_name(a, "flip")

    return Policy(choose, name=p.name)


class BaseGoal:
    """A goal on ``env`` viewed on ``with_parity(env)`` (parity ignored)."""

    def __init__(self, goal, drop: int = 1):
        self.goal, self.drop = goal, drop

    def __contains__(self, s):
        return s[: len(s) - self.drop] in self.goal


class Intersection:
    def __init__(self, *goals):
        self.goals = goals

    def __contains__(self, s):
        return all(s in g for g in self.goals)


def conjoin(I: Interleaving, b1: Binding, q1: Policy, b2: Binding, q2: Policy,
            world: Environment | None = None, check: bool = True, horizon: int | None = None) -> Policy:
    """Interleave two bound policies to solve the intersection of their goals.

    ``world`` is where ``I`` runs; when it is ``with_parity(b1.source)`` the
    bound policies are lifted onto it.  Independence and bounded fairness
    are checked eagerly unless ``check`` is false.
    """
    p1, p2 = bind_policy(b1, q1), bind_policy(b2, q2)
    if world is not None and world is not b1.source:
        p1, p2 = on_parity(p1), on_parity(p2)
    env = world if world is not None else b1.source
    if check:
        if not independent(b1, b2):
            raise ValueError(f"bindings {b1.indices} and {b2.indices} share components")
        w = fairness_witness(I, p1, p2, env, horizon=horizon)
        if w is not None:
            raise ValueError(f"interleaving {I.name!r} is not fair: starting at {w!r}")
    return interleave(I, p1, p2)


def interleave_bindings(I: Interleaving, b1: Binding, b2: Binding, p: Policy, world: Environment | None = None) -> Policy:
    """One schematic policy run under whichever binding ``I`` selects.

    ``I`` is consulted with the two bound policies so that interleavings
    which look at the policies see the same arguments as in :func:`conjoin`.
    """
    p1, p2 = bind_policy(b1, p), bind_policy(b2, p)
    lifted = world is not None and world is not b1.source
    if lifted:
        p1, p2 = on_parity(p1), on_parity(p2)

    def choose(s):
        b = b1 if I(s, p1, p2) == FIRST else b2
        base = s[:-1] if lifted else s
        a = p(b(base))
        if a is None:
            return None
        a = b.implementation.get(a)
        return pair_name(a, "flip") if lifted else a

    return Policy(choose, name=f"{I.name}[bindings]")


def stutter_ok(states: Sequence[State], b: Binding, q: Policy, drop: int = 0) -> bool:
    """Under ``b`` the run must read ``(t0)+ (t1)+ ...`` with ``t_{k+1} = q(t_k)(t_k)``."""
    proj = [b(s[: len(s) - drop] if drop else s) for s in states]
    for x, y in zip(proj, proj[1:]):
        if y == x:
            continue
        a = q(x)
        if a is None or b.target.apply(a, x) != y:
            return False
    return True


# the two-workspace construction ---------------------------------------------------

def make_d() -> Environment:
    """Two states and two actions: ``i`` and ``flip``."""
    return Environment([Domain("D", (0, 1))], [identity_action(), Action("flip", lambda s: (1 - s[0],))], name="D")


class WorkspaceGoal:
    def __init__(self, goal, k: int):
        self.goal, self.k = goal, k

    def __contains__(self, s):
        k = self.k
        return s[:k] in self.goal and s[k: 2 * k] in self.goal


@dataclass(frozen=True, eq=False)
class FlipConstruction:
    base: Environment = field(repr=False)
    world: Environment = field(repr=False)
    goal: object
    binding_map: BindingMap = field(repr=False)
    p_m: Policy
    p_flip: Policy
    parity: bool

    def initial_states(self, initial: Iterable[State]) -> List[State]:
        """``I x I x {0,1}`` (and the parity bit, when present)."""
        init = list(initial)
        out = []
        tails = [(0,), (1,)]
        if self.parity:
            tails = [(d, b) for d in (0, 1) for b in (0, 1)]
        for x in init:
            for y in init:
                for t in tails:
                    out.append(x + y + t)
        return out


def workspace_flip_world(E: Environment, goal, p: Policy, parity: bool = True) -> FlipConstruction:
    """Build ``E <=> E <=> D`` with the binding map that reads the faced workspace.

    With ``parity`` the whole thing is also run in parallel with ``F`` so a
    round-robin interleaving can alternate ``p_M`` and ``p_flip``.
    """
    base = serial_product(serial_product(E, E), make_d())
    k = E.space.arity
    first = tuple(range(k))
    second = tuple(range(k, 2 * k))
    m = BindingMap(base, E, lambda s: first if s[-1] == 0 else second, name="M_D")
    p_m = binding_map_policy(m, p)
    p_flip = Policy.constant(pair_name(IDENTITY, "flip"))
    g = WorkspaceGoal(goal, k)
    if not parity:
        return FlipConstruction(base, base, g, m, p_m, p_flip, False)
    world = with_parity(base)
    return FlipConstruction(base, world, BaseGoal(g), m, on_parity(p_m), on_parity(p_flip), True)
