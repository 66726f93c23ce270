"""A whisk is a tool: replace it by its clean state, plan, then lift the plan back.

The lifted policy washes the whisk only when a beat is coming up.
"""

from lifeworld import corpus
from lifeworld.env import DCP, run_policy, solvable
from lifeworld.schematic import is_tool, tool_reduced_policy

w = corpus.egg_whisk_world()
print("whisk:", is_tool(w, 1))
print("egg:  ", is_tool(w, 0))
goal = [s for s in w.states() if s[0] == "cooked"]
p = tool_reduced_policy(DCP(w, goal), [1])
for s in [("fresh", "dirty"), ("broken", "dirty"), ("beaten", "dirty"), ("burnt", "clean")]:
    tr = run_policy(w, p, s, 10, goal)
    print(f"{s}: {' '.join(tr.actions) or '-'}  ({tr.verdict}; solvable={solvable(DCP(w, goal), s)})")
