import random

import pytest

from lifeworld.kitchen import (
    ACTION, BLOCKED, MILESTONE, KitchenError, KitchenWorld, decode, parse_trace, replay, run_toast, scenario_path,
    toast_step,
)

EGGS = """
material egg chain fresh -> broken -> beaten -> cooked ;
tool whisk ready clean states clean dirty reset wash: dirty -> clean ;
action break egg: fresh -> broken ;
action beat egg: broken -> beaten uses whisk: clean -> dirty ;
action fry egg: beaten -> cooked ;
world {
%s  whisk whisk ;
}
%s
param cleanup = true ;
"""


def egg_kitchen(eggs, orders):
    objs = "".join(f"  egg egg-{k} ;\n" for k in range(1, eggs + 1))
    goals = "goal exists egg cooked ;\n" * orders
    return KitchenWorld.from_text(EGGS % (objs, goals))


def test_empty_orders_give_empty_trace():
    tr = run_toast(egg_kitchen(3, 0))
    assert tr.entries == () and tr.completed and tr.ticks == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_metabolism_bridge(n):
    k = egg_kitchen(5, n)
    tr = run_toast(k)
    assert tr.completed and len(tr.milestones()) == n
    cooked = [j for j in range(5) if tr.final[j][0] == "cooked"]
    assert cooked == list(range(n))
    touched = [int(e.text.split()[1].split("-")[1]) for e in tr.actions() if e.text.split()[1].startswith("EGG")]
    assert touched == sorted(touched)


def test_two_pancakes_share_one_pan():
    k = KitchenWorld.from_file(scenario_path("two-pancakes.lw"))
    tr = run_toast(k)
    assert tr.completed
    texts = [e.text for e in tr.entries]
    first_done = texts.index("*** Done with goal (PANCAKE COOKED PAN) ***")
    second_pour = texts.index("POUR PANCAKE-2 PAN")
    # the pan is washed after the first pancake is done and before the second goes in
    assert first_done < texts.index("WASH PAN") < second_pour


def test_dirty_spoon_is_washed_when_needed():
    k = KitchenWorld.from_file(scenario_path("two-pancakes.lw"))
    texts = [e.text for e in run_toast(k).entries]
    assert texts.index("WASH SPOON") == texts.index("MIX PANCAKE-2 SPOON") - 1


def test_deadlock_is_reported():
    text = """
material pancake chain batter -> in-pan -> cooked ;
tool pan ready clean states clean dirty reset wash: dirty -> clean ;
action pour pancake: batter -> in-pan uses pan: clean -> dirty ;
action cook pancake: in-pan -> cooked ;
world { pancake p ; }
goal exists pancake cooked ;
"""
    tr = run_toast(KitchenWorld.from_text(text))
    assert not tr.completed
    assert tr.entries[-1].kind == BLOCKED and tr.entries[-1].text == "!!! Blocked: no usable PAN !!!"


def test_timer_advances_material():
    text = """
material toast chain bread -> toasting -> done ;
action start toast: bread -> toasting ;
world { toast t ; }
goal exists toast done ;
param auto.toast.toasting = 3 ;
"""
    tr = run_toast(KitchenWorld.from_text(text))
    assert [e.line() for e in tr.entries] == ["0\tSTART T", "3\t*** Done with goal (TOAST DONE NOWHERE) ***"]


def test_elapsed_only_counts_in_timed_states():
    k = KitchenWorld.from_text("""
material toast chain bread -> toasting -> done ;
action start toast: bread -> toasting ;
world { toast t ; }
goal exists toast done ;
param auto.toast.toasting = 3 ;
""")
    s = k.initial_state()
    for _ in range(5):
        s = k.tick(s)
    assert s[0] == ("bread", None, 0)


def test_held_objects_are_only_used_by_their_holder(breakfast, golden):
    for e in golden.actions():
        s = replay(breakfast, golden.entries, until=e.tick)
        g = decode(breakfast, s, e.text)
        held = breakfast.holders(s)
        for obj in g.objects[1:]:
            assert held.get(obj, g.objects[0]) == g.objects[0], e.line()


def test_milestone_lines(golden):
    ms = [e.line() for e in golden.milestones()]
    assert "27\t*** Done with goal (OMELETTE COOKED PLATE-1) ***" in ms
    assert sum("PLATE SET KITCHEN-TABLE" in m for m in ms) == 2


def test_parse_trace_round_trip(golden):
    entries = parse_trace(golden.format())
    assert tuple(entries) == golden.entries
    assert {e.kind for e in entries} == {ACTION, MILESTONE}


def test_decode_rejects_wrong_step(breakfast):
    s = breakfast.initial_state()
    with pytest.raises(KitchenError):
        decode(breakfast, s, "SERVE OMELETTE-0 PLATE-1")
    with pytest.raises(KitchenError):
        decode(breakfast, s, "BREAK-EGG NOBODY")


def test_replay_reaches_the_final_state(breakfast, golden):
    assert replay(breakfast, golden.entries) == golden.final


def test_step_is_a_function_of_the_state(breakfast, golden):
    rng = random.Random(7)
    acts = golden.actions()
    for e in rng.sample(acts, 20):
        s = replay(breakfast, golden.entries, until=e.tick)
        assert toast_step(breakfast, s).action.label(breakfast) == e.text
        assert toast_step(breakfast, s) == toast_step(breakfast, s)


def test_seed_ticks_offset(breakfast, golden):
    shifted = run_toast(breakfast, start=100)
    assert [(e.tick - 100, e.text) for e in shifted.entries] == [(e.tick, e.text) for e in golden.entries]
    assert replay(breakfast, shifted.entries, start=100) == golden.final


def test_max_ticks_limit(breakfast):
    tr = run_toast(breakfast, max_ticks=10)
    assert not tr.completed and tr.ticks == 10
    with pytest.raises(ValueError):
        run_toast(breakfast, max_ticks=0)


def test_environment_view(breakfast):
    env = breakfast.environment()
    assert env.objects[0] == "omelette-0"
    assert len(env.objects) == len(breakfast)
