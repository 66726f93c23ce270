import pytest
from hypothesis import given, strategies as st

from lifeworld.env import (
    DCP, DIVERGED, HALTED, REACHED, STUCK, Action, Domain, Environment, Policy, make_c, make_f, make_singleton,
    make_z, orbit, reachable_set, run_policy, shortest_path, solvable, solves, solving_states, synthesize_policy,
)


def test_domain_rejects_duplicates():
    with pytest.raises(ValueError):
        Domain("x", (1, 1))


def test_state_space_size_and_membership():
    e = Environment([Domain("a", (0, 1)), Domain("b", "xyz")], [Action("i", lambda s: s)])
    assert len(e) == 6
    assert (1, "y") in e.space
    assert (2, "y") not in e.space
    assert e.coerce([1, "z"]) == (1, "z")


def test_partial_action_returns_none():
    e = Environment([Domain("a", (0, 1))], [Action("up", lambda s: (1,) if s[0] == 0 else None)])
    assert e.apply("up", (0,)) == (1,)
    assert e.apply("up", (1,)) is None
    assert list(e.applicable((1,))) == []


def test_duplicate_action_names_rejected():
    with pytest.raises(ValueError):
        Environment([Domain("a", (0,))], [Action("i", lambda s: s), Action("i", lambda s: s)])


def test_unknown_action():
    with pytest.raises(KeyError):
        make_c(2).action("nope")


def test_chain_and_corridor():
    c = make_c(3)
    assert c.apply("inc_3", (3,)) == (3,)
    z = make_z(3)
    assert z.apply("dec", (0,)) == (0,)
    assert z.apply("inc_3", (1,)) == (2,)
    with pytest.raises(ValueError):
        make_c(0)


def test_policy_from_table_and_constant():
    p = Policy({(0,): "flip"})
    assert p((0,)) == "flip"
    assert p((1,)) is None
    assert Policy.constant("i")((5,)) == "i"


def test_run_policy_verdicts():
    c = make_c(4)
    inc = Policy.constant("inc_4")
    tr = run_policy(c, inc, (1,), 10, {(4,)})
    assert tr.verdict == HALTED and tr.final == (4,) and len(tr.actions) == 3
    assert run_policy(c, inc, (1,), 10).verdict == DIVERGED
    f = make_f()
    assert run_policy(f, Policy.constant("flip"), (0,), 5, {(1,)}).verdict == REACHED
    assert run_policy(f, Policy.constant("i"), (0,), 5, {(1,)}).verdict == STUCK
    with pytest.raises(ValueError):
        run_policy(c, inc, (1,), -1)


def test_solves_follows_the_orbit():
    f = make_f()
    d = DCP(f, {(1,)})
    r = solves(d, Policy.constant("flip"), (0,))
    assert r.reaches and not r.halts and r.steps == 1
    states, cycle, stuck = orbit(f, Policy.constant("flip"), (0,))
    assert states == [(0,), (1,)] and cycle == 0 and not stuck


def test_stuck_run_after_goal_is_not_a_solution():
    e = Environment([Domain("a", (0, 1))], [Action("up", lambda s: (1,) if s[0] == 0 else None)])
    assert not solves(DCP(e, {(1,)}), Policy.constant("up"), (0,))


def test_goal_must_be_states():
    with pytest.raises(ValueError):
        DCP(make_c(2), {(7,)})


def test_reachability_and_shortest_path():
    z = make_z(4)
    assert reachable_set(z, (2,)) == frozenset((k,) for k in range(4))
    states, actions = shortest_path(DCP(z, {(3,)}), (0,))
    assert actions == ["inc_4"] * 3 and states[-1] == (3,)
    assert shortest_path(DCP(make_c(3), {(1,)}), (2,)) is None
    assert shortest_path(DCP(z, {(3,)}), (0,), max_depth=2) is None


def test_singleton():
    s = make_singleton()
    assert list(s.states()) == [("ready",)]


@given(n=st.integers(1, 6), data=st.data())
def test_synthesized_policy_solves_exactly_the_solvable_states(n, data):
    z = make_z(n)
    goal = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    d = DCP(z, [(g,) for g in goal])
    p = synthesize_policy(d)
    for s in z.states():
        r = solves(d, p, s)
        assert r.reaches == solvable(d, s)
        assert r.halts


@given(n=st.integers(1, 6), data=st.data())
def test_chain_solvable_states(n, data):
    goal = data.draw(st.sets(st.integers(1, n), min_size=1))
    d = DCP(make_c(n), [(g,) for g in goal])
    assert solving_states(d) == frozenset((s,) for s in range(1, max(goal) + 1))
