"""Parallel and serial products of environments, and composed policies."""

from __future__ import annotations

from typing import Collection

from .env import IDENTITY, Action, DiscreteControlProblem, Environment, Policy, State

MAX_PRODUCT_STATES = 10**6

PARALLEL = "parallel"
SERIAL = "serial"


def pair_name(a: str, b: str) -> str:
    return f"({a},{b})"


class ProductEnvironment(Environment):
    """Product of two environments with explicit transition tables.

    A product state is the concatenation of a left state and a right state,
    so products of products stay flat.
    """

    def __init__(self, kind: str, left: Environment, right: Environment):
        size = len(left) * len(right)
        if size > MAX_PRODUCT_STATES:
            raise ValueError(f"product has {size} states; limit is {MAX_PRODUCT_STATES}")
        self.kind = kind
        self.left = left
        self.right = right
        self.split = left.space.arity
        comps = left.components + right.components
        if kind == PARALLEL:
            pairs = [(a, b) for a in left.action_names for b in right.action_names]
        elif kind == SERIAL:
            pairs = [(a, None) for a in left.action_names] + [(None, b) for b in right.action_names]
        else:
            raise ValueError(f"unknown product kind {kind!r}")
        super().__init__(comps, [], name=f"{left.name or 'E1'} {'||' if kind == PARALLEL else '<=>'} {right.name or 'E2'}")
        acts = {}
        states = list(self.space)
        for a, b in pairs:
            name = pair_name(IDENTITY if a is None else a, IDENTITY if b is None else b)
            if name in acts:
                continue
            fa = left.action(a) if a is not None else None
            fb = right.action(b) if b is not None else None
            table = {}
            for s in states:
                x, y = s[: self.split], s[self.split:]
                x2 = fa(x) if fa is not None else x
                if x2 is None:
                    continue
                y2 = fb(y) if fb is not None else y
                if y2 is None:
                    continue
                table[s] = x2 + y2
            acts[name] = Action.from_table(name, table)
        self._actions = acts

    def halves(self, s: State):
        return s[: self.split], s[self.split:]


def parallel_product(e1: Environment, e2: Environment) -> ProductEnvironment:
    return ProductEnvironment(PARALLEL, e1, e2)


def serial_product(e1: Environment, e2: Environment) -> ProductEnvironment:
    return ProductEnvironment(SERIAL, e1, e2)


class ProductGoal:
    """``G1 x G2`` as a membership test, without enumerating either side."""

    def __init__(self, g1: Collection[State], g2: Collection[State], split: int):
        self.g1, self.g2, self.split = g1, g2, split

    def __contains__(self, s):
        return s[: self.split] in self.g1 and s[self.split:] in self.g2

    def __repr__(self):
        return f"ProductGoal({self.g1!r} x {self.g2!r})"


def _product_dcp(kind, d1: DiscreteControlProblem, d2: DiscreteControlProblem) -> DiscreteControlProblem:
    env = ProductEnvironment(kind, d1.env, d2.env)
    return DiscreteControlProblem(env, ProductGoal(d1.goal, d2.goal, env.split))


def parallel_dcp(d1, d2):
    return _product_dcp(PARALLEL, d1, d2)


def serial_dcp(d1, d2):
    return _product_dcp(SERIAL, d1, d2)


def compose_parallel_policy(product: ProductEnvironment, p1: Policy, p2: Policy) -> Policy:
    """``p(x, y) = p1(x) x p2(y)``."""
    if product.kind != PARALLEL:
        raise ValueError("compose_parallel_policy needs a parallel product")

    def choose(s):
        x, y = product.halves(s)
        a, b = p1(x), p2(y)
        if a is None or b is None:
            return None
        return pair_name(a, b)

    return Policy(choose, name="parallel")


def compose_serial_policy(
    product: ProductEnvironment,
    p1: Policy,
    p2: Policy,
    g1: Collection[State],
    g2: Collection[State],
    tie: str = "left",
) -> Policy:
    """A serial policy obeying both conditional clauses of the serial composition lemma.

    When exactly one side is solved, the other side advances.  When neither
    is, ``tie`` picks the side.  When both are, ``(i,i)`` is used if the
    product has it, otherwise the ``tie`` side keeps acting.
    """
    if product.kind != SERIAL:
        raise ValueError("compose_serial_policy needs a serial product")
    if tie not in ("left", "right"):
        raise ValueError("tie must be 'left' or 'right'")
    names = set(product.action_names)
    idle = pair_name(IDENTITY, IDENTITY)

    def left(x):
        a = p1(x)
        return None if a is None else pair_name(a, IDENTITY)

    def right(y):
        b = p2(y)
        return None if b is None else pair_name(IDENTITY, b)

    def choose(s):
        x, y = product.halves(s)
        in1, in2 = x in g1, y in g2
        if in2 and not in1:
            return left(x)
        if in1 and not in2:
            return right(y)
        if in1 and in2:
            if idle in names and product.apply(idle, s) == s:
                return idle
        return left(x) if tie == "left" else right(y)

    return Policy(choose, name=f"serial-{tie}")


def lift_left(product: ProductEnvironment, p: Policy, right_action: str = IDENTITY) -> Policy:
    """Run ``p`` on the left factor while the right factor does ``right_action``."""

    def choose(s):
        a = p(product.halves(s)[0])
        return None if a is None else pair_name(a, right_action)

    return Policy(choose, name=f"{p.name}+{right_action}")
