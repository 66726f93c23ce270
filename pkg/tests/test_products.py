import pytest

from lifeworld.env import DCP, Policy, make_c, make_f, make_z, reachable_set, solves, synthesize_policy
from lifeworld.products import (
    compose_parallel_policy, compose_serial_policy, lift_left, pair_name, parallel_dcp, parallel_product, serial_dcp,
    serial_product,
)


def test_parallel_actions_are_pairs():
    p = parallel_product(make_f(), make_c(2))
    assert set(p.action_names) == {"(flip,inc_2)", "(flip,i)"}
    assert p.apply("(flip,inc_2)", (0, 1)) == (1, 2)


def test_serial_actions_move_one_side():
    p = serial_product(make_f(), make_c(2))
    assert set(p.action_names) == {"(flip,i)", "(i,inc_2)", "(i,i)"}
    assert p.apply("(i,inc_2)", (0, 1)) == (0, 2)


def test_parallel_partial_when_either_side_is():
    from lifeworld.env import Action, Domain, Environment

    e = Environment([Domain("a", (0, 1))], [Action("up", lambda s: (1,) if s[0] == 0 else None)])
    p = parallel_product(e, make_f())
    assert p.apply("(up,flip)", (1, 0)) is None


def test_flip_flop_counterexample():
    ff = parallel_product(make_f(), make_f())
    assert all(len(reachable_set(ff, s)) == 2 for s in ff.states())
    assert all(len(reachable_set(serial_product(make_f(), make_f()), s)) == 4 for s in ff.states())
    fi = parallel_product(make_f(True), make_f(True))
    assert all(len(reachable_set(fi, s)) == 4 for s in fi.states())


def test_products_nest_and_split():
    p = parallel_product(make_c(2), serial_product(make_f(), make_z(2)))
    assert p.space.arity == 3
    assert p.halves((1, 0, 1)) == ((1,), (0, 1))


def test_materialization_guard():
    from lifeworld.env import Domain, Environment, identity_action

    big = Environment([Domain("x", tuple(range(1001)))], [identity_action()])
    with pytest.raises(ValueError):
        parallel_product(big, big)


def test_composed_parallel_policy_needs_both():
    d1 = DCP(make_c(3), {(3,)})
    d2 = DCP(make_z(2), {(0,)})
    d = parallel_dcp(d1, d2)
    p = compose_parallel_policy(d.env, synthesize_policy(d1), synthesize_policy(d2))
    r = solves(d, p, (1, 1))
    assert r.reaches and r.halts


def test_serial_tie_breaks():
    d1 = DCP(make_c(2), {(2,)})
    d2 = DCP(make_c(2), {(2,)})
    d = serial_dcp(d1, d2)
    p1, p2 = synthesize_policy(d1), synthesize_policy(d2)
    left = compose_serial_policy(d.env, p1, p2, d1.goal, d2.goal, "left")
    right = compose_serial_policy(d.env, p1, p2, d1.goal, d2.goal, "right")
    assert left((1, 1)) == "(inc_2,i)"
    assert right((1, 1)) == "(i,inc_2)"
    assert solves(d, left, (1, 1)).halts and solves(d, right, (1, 1)).halts
    with pytest.raises(ValueError):
        compose_serial_policy(d.env, p1, p2, d1.goal, d2.goal, "middle")


def test_lift_left_and_names():
    assert pair_name("a", "b") == "(a,b)"
    p = parallel_product(make_c(2), make_f(True))
    q = lift_left(p, Policy.constant("inc_2"))
    assert q((1, 0)) == "(inc_2,i)"
