"""Projections, simple reductions and policy lifting.

A projection may be partial (return ``None``); states projecting to
nothing are outside the reduction and carry no commuting obligation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

from .env import Environment, Policy, State


@dataclass(frozen=True, eq=False)
class Projection:
    source: Environment
    target: Environment
    fn: Callable[[State], Optional[State]] = field(repr=False)

    def __call__(self, s: State) -> Optional[State]:
        return self.fn(s)

    def preimage(self, goal) -> frozenset:
        return frozenset(s for s in self.source.states() if (t := self.fn(s)) is not None and t in goal)


@dataclass(frozen=True)
class ImplementationMap:
    """Target action name -> source action name."""

    table: Mapping[str, str]

    def __getitem__(self, name):
        return self.table[name]

    def get(self, name, default=None):
        return self.table.get(name, default)

    def __len__(self):
        return len(self.table)


@dataclass(frozen=True)
class ReductionFailure:
    """No source action commutes with ``action``.

    ``failures`` records, for every candidate, the first source state where
    the square does not close; ``state`` is that of the first candidate.
    """

    action: str
    state: Optional[State]
    failures: Mapping[str, State]

    def __bool__(self):
        return False


def commutes_at(proj: Projection, a: str, a_src: str, s: State) -> bool:
    """Check the square at one source state under partial-action semantics."""
    t = proj(s)
    if t is None:
        return True
    want = proj.target.apply(a, t)
    if want is None:
        return True
    got = proj.source.apply(a_src, s)
    if got is None:
        return False
    return proj(got) == want


def check_simple_reduction(proj: Projection) -> ImplementationMap | ReductionFailure:
    """Find a commuting source action for every target action.

    Candidates are tried in the source's declaration order and the first one
    that commutes at every source state wins.
    """
    states = list(proj.source.states())
    for s in states:
        t = proj(s)
        if t is not None and t not in proj.target.space:
            raise ValueError(f"projection maps {s} to {t}, which is not a target state")
    table: Dict[str, str] = {}
    for a in proj.target.action_names:
        failures: Dict[str, State] = {}
        for cand in proj.source.action_names:
            bad = next((s for s in states if not commutes_at(proj, a, cand, s)), None)
            if bad is None:
                table[a] = cand
                break
            failures[cand] = bad
        else:
            first = next(iter(failures.values()), None)
            return ReductionFailure(a, first, failures)
    return ImplementationMap(table)


def verify_implementation(proj: Projection, impl: ImplementationMap) -> Optional[Tuple[str, State]]:
    """Re-check a map independently of how it was found.  Returns a witness or None."""
    for a, a_src in impl.table.items():
        for s in proj.source.states():
            if not commutes_at(proj, a, a_src, s):
                return a, s
    return None


def lift_policy(impl: ImplementationMap, p: Policy, proj: Projection) -> Policy:
    """``s' -> impl[p(proj(s'))]``.  Undefined projections or missing entries yield None."""

    def choose(s):
        t = proj(s)
        if t is None:
            return None
        a = p(t)
        return None if a is None else impl.get(a)

    return Policy(choose, name=f"lifted {p.name}".strip())
