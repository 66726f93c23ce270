"""Making toast while an egg fries.

Both tasks have stages that finish on their own.  Tending the egg whenever
it is not busy, and the toast otherwise, gets both done; a cook who only
ever attends to the toast never cooks the egg.
"""

from lifeworld import corpus
from lifeworld.env import DCP, Policy, run_policy
from lifeworld.interleave import always_second, interleave, when

world = corpus.timed_pair_world()
toast = Policy(lambda s: {"fresh": "insert", "toasted": "butter"}.get(s[0], "i"), name="toast")
egg = Policy(lambda s: {"fresh": "crack", "side-done": "flip"}.get(s[1], "i"), name="egg")
goal = {("buttered", "cooked")}

free = when(lambda s: s[1] not in corpus.BUSY and s[1] != "cooked", name="egg-when-free")
for I in (free, always_second()):
    tr = run_policy(world, interleave(I, egg, toast), ("fresh", "fresh"), 12, goal)
    print(f"{I.name}: {tr.verdict}")
    for s, a in zip(tr.states, tr.actions + ("",)):
        print(f"  {s[0]:9} {s[1]:10} {a}")
