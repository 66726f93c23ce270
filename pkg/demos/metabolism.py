"""Three eggs, one schematic egg policy, and a leftmost binding map.

The policy only knows how to cook "the egg".  The binding map decides which
egg that is; because it always picks the leftmost uncooked one, the whole
carton gets cooked one egg after another.
"""

from lifeworld import corpus
from lifeworld.binding import binding_map_policy, bound_index_sequence, constant_map, leftmost_map_m0
from lifeworld.env import DCP, run_policy, synthesize_policy

one = corpus.egg_world(1)
world = corpus.egg_world(3)
p = synthesize_policy(DCP(one, corpus.COOKED))

for m in (leftmost_map_m0(world, one, corpus.COOKED), constant_map(world, one, (0,))):
    tr = run_policy(world, binding_map_policy(m, p), ("fresh",) * 3, 30)
    print(f"{m.name}:")
    for s, a, b in zip(tr.states, tr.actions + ("",), bound_index_sequence(m, tr.states)):
        print(f"  {' '.join(f'{x:7}' for x in s)}  bound={b}  next={a}")
    print()
