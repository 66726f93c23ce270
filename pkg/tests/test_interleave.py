import pytest

from lifeworld import corpus
from lifeworld.binding import SimpleProjection, bind_policy, existential_goal, is_binding
from lifeworld.env import DCP, HALTED, Policy, run_policy, solves, synthesize_policy
from lifeworld.interleave import (
    FIRST, SECOND, BaseGoal, Intersection, Interleaving, always_first, always_second, by_goal, conjoin,
    fairness_witness, independent, interleave, interleave_bindings, is_fair, make_d, on_parity, round_robin,
    stutter_ok, when, with_parity, workspace_flip_world,
)

COOKED = corpus.COOKED


@pytest.fixture
def two():
    one = corpus.egg_world(1)
    w = corpus.egg_world(2)
    b1 = is_binding(SimpleProjection((0,)), w, one)
    b2 = is_binding(SimpleProjection((1,)), w, one)
    return one, w, b1, b2, synthesize_policy(DCP(one, COOKED))


def test_pick_must_return_first_or_second():
    bad = Interleaving(lambda s, p1, p2: 7, name="bad")
    with pytest.raises(ValueError):
        bad((0,), Policy.constant("i"), Policy.constant("i"))


def test_round_robin_reads_parity():
    rr = round_robin()
    assert rr(("x", 0), None, None) == FIRST and rr(("x", 1), None, None) == SECOND


def test_parity_world_flips_every_step(two):
    one, w, b1, b2, q = two
    pw = with_parity(w)
    assert pw.space.arity == 3
    p = on_parity(bind_policy(b1, q))
    assert p(("fresh", "fresh", 0)) == "(break(egg-1),flip)"
    assert pw.apply(p(("fresh", "fresh", 0)), ("fresh", "fresh", 0)) == ("broken", "fresh", 1)


def test_fairness(two):
    one, w, b1, b2, q = two
    p1, p2 = bind_policy(b1, q), bind_policy(b2, q)
    pw = with_parity(w)
    assert is_fair(round_robin(), on_parity(p1), on_parity(p2), pw)
    assert fairness_witness(always_first(), p1, p2, w) is not None
    # from a burnt first egg the goal never comes, so the second policy never runs
    g1 = existential_goal(COOKED, [b1])
    assert fairness_witness(by_goal(g1), p1, p2, w)[0] == "burnt"
    with pytest.raises(ValueError):
        fairness_witness(round_robin(), p1, p2, pw, horizon=0)


def test_coinciding_successors_count_for_both(two):
    one, w, b1, b2, q = two
    p = bind_policy(b1, q)
    # the same policy twice: every step executes both
    assert is_fair(always_first(), p, p, w)


def test_independence(two):
    one, w, b1, b2, q = two
    assert independent(b1, b2)
    assert not independent(b1, b1)
    assert not independent(SimpleProjection((0, 1)), SimpleProjection((1,)))


def test_conjunction_solves_intersection(two):
    one, w, b1, b2, q = two
    pw = with_parity(w)
    p = conjoin(round_robin(), b1, q, b2, q, world=pw)
    both = BaseGoal(Intersection(existential_goal(COOKED, [b1]), existential_goal(COOKED, [b2])))
    d = DCP(pw, both)
    for x in ("fresh", "broken", "beaten", "cooked"):
        for y in ("fresh", "broken", "beaten", "cooked"):
            for t in (0, 1):
                r = solves(d, p, (x, y, t))
                assert r.reaches and r.halts
    tr = run_policy(pw, p, ("fresh", "fresh", 0), 30)
    assert stutter_ok(tr.states, b1, q, drop=1) and stutter_ok(tr.states, b2, q, drop=1)


def test_conjoin_rejects_dependent_or_unfair(two):
    one, w, b1, b2, q = two
    with pytest.raises(ValueError):
        conjoin(round_robin(), b1, q, b1, q, world=with_parity(w))
    with pytest.raises(ValueError):
        conjoin(always_first(), b1, q, b2, q, world=w)


def test_binding_level_matches_policy_level(two):
    one, w, b1, b2, q = two
    pw = with_parity(w)
    a = conjoin(round_robin(), b1, q, b2, q, world=pw)
    b = interleave_bindings(round_robin(), b1, b2, q, world=pw)
    for s in pw.states():
        assert a(s) == b(s)


def test_stutter_detects_foreign_moves(two):
    one, w, b1, b2, q = two
    # a run where egg-1 jumps two steps at once is not a stuttered run of q
    assert not stutter_ok([("fresh", "fresh"), ("beaten", "fresh")], b1, q)
    assert stutter_ok([("fresh", "fresh"), ("fresh", "broken"), ("broken", "broken")], b1, q)


def toast_and_egg():
    tp = corpus.timed_pair_world()
    toast = Policy(lambda s: {"fresh": "insert", "toasted": "butter"}.get(s[0], "i"), name="toast")
    egg = Policy(lambda s: {"fresh": "crack", "side-done": "flip"}.get(s[1], "i"), name="egg")
    return tp, toast, egg, DCP(tp, {("buttered", "cooked")})


def test_opportunistic_switching_beats_always_toast():
    tp, toast, egg, d = toast_and_egg()
    free = when(lambda s: s[1] not in corpus.BUSY and s[1] != "cooked", name="egg-when-free")
    tr = run_policy(tp, interleave(free, egg, toast), ("fresh", "fresh"), 20, d.goal)
    assert tr.verdict == HALTED
    # the toast goes in while the egg fries
    assert tr.actions[:2] == ("crack", "insert")
    assert not solves(d, interleave(always_second(), egg, toast), ("fresh", "fresh")).reaches


def test_two_workspaces_and_a_flip():
    e = corpus.egg_world(1)
    p = synthesize_policy(DCP(e, COOKED))
    fc = workspace_flip_world(e, COOKED, p)
    assert fc.world.space.arity == 4
    d = DCP(fc.world, fc.goal)
    starts = fc.initial_states([("fresh",), ("beaten",)])
    assert len(starts) == 16  # I x I x {0,1}, times the parity bit
    rr = interleave(round_robin(), fc.p_m, fc.p_flip)
    assert all(solves(d, rr, s).halts for s in starts)
    flip = interleave(always_second(), fc.p_m, fc.p_flip)
    assert not solves(d, flip, starts[0]).reaches


def test_d_is_flip_with_identity():
    d = make_d()
    assert d.apply("flip", (0,)) == (1,) and d.apply("i", (1,)) == (1,)
