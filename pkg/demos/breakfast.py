"""Run the shipped breakfast scenario and summarise it."""

from lifeworld.kitchen import KitchenWorld, run_toast, scenario_path

k = KitchenWorld.from_file(scenario_path("breakfast.lw"))
tr = run_toast(k)
print(tr.format(), end="")
print(f"\n{'completed' if tr.completed else 'unfinished'} after {tr.ticks} ticks")
print(f"{len(tr.actions())} actions, {len(tr.milestones())} goals met")
