"""Small worlds used by the verification suites, tests and demos."""

from __future__ import annotations

from typing import Dict, List, Mapping, Sequence, Tuple

from .env import IDENTITY, Action, Domain, Environment, identity_action
from .products import serial_product
from .schematic import MaterialType, ObjectWorld, Step, ToolType

# the object types of the breakfast kitchen, one entry per row
CATALOG_MATERIALS: Tuple[MaterialType, ...] = (
    MaterialType("egg", ("fresh", "broken", "beaten", "cooked"), ("break", "beat", "cook")),
    MaterialType("butter-pat", ("fresh", "melted"), ("melt",)),
    MaterialType("milk-supply", ("non-empty", "empty"), ("pour-milk",)),
    MaterialType(
        "pancake-batter",
        ("has-flour", "has-sugar", "has-dry", "has-milk", "has-all", "mixed"),
        ("add-sugar", "add-baking-powder", "add-milk", "add-egg", "mix"),
    ),
    MaterialType("pancake", ("cooking", "cooked-1-side", "flipped", "cooked", "burnt"), ("cook", "flip", "cook", "cook")),
    MaterialType("bread-slice", ("fresh", "toasted", "buttered"), ("toast", "butter")),
)

CATALOG_TOOLS: Tuple[ToolType, ...] = tuple(
    ToolType(name, ("clean", "dirty"), "clean", (("wash", "dirty", "clean"),))
    for name in ("fork", "spoon", "knife", "spatula", "whisk")
)

CATALOG_CONTAINERS = ("bowl", "plate", "pan", "burner", "countertop", "toaster", "bread-bag")
CATALOG_ACTIVES = ("agent", "burner", "toaster")

CATALOG = {
    "materials": CATALOG_MATERIALS,
    "tools": CATALOG_TOOLS,
    "containers": CATALOG_CONTAINERS,
    "actives": CATALOG_ACTIVES,
}

# the egg used in the formal worlds carries a burnt state past cooked
EGG = MaterialType("egg", ("fresh", "broken", "beaten", "cooked", "burnt"), ("break", "beat", "heat", "heat"))
SCRAMBLE = MaterialType("egg", ("fresh", "broken", "beaten", "cooked", "burnt"), ("break", "beat", "stir", "heat"))
WHISK = ToolType("whisk", ("clean", "dirty"), "clean", (("wash", "dirty", "clean"),))
SPOON = ToolType("spoon", ("clean", "dirty"), "clean", (("wash", "dirty", "clean"),))

COOKED = frozenset({("cooked",)})


def ids(prefix: str, k: int) -> List[str]:
    return [prefix] if k == 1 else [f"{prefix}-{j}" for j in range(1, k + 1)]


def tooled_steps(m: MaterialType, uses: Mapping[str, Sequence[Tuple[str, str, str]]]) -> List[Step]:
    """The chain steps of ``m``, with ``uses[step]`` tool effects attached."""
    out = []
    for st in m.templates():
        extra = tuple(uses.get(st.name, ()))
        cases = tuple(case + tuple((a, b) for _, a, b in extra) for case in st.cases)
        out.append(Step(st.name, st.slots + tuple(t for t, _, _ in extra), cases))
    return out


def egg_world(k: int = 1, material: MaterialType = EGG) -> ObjectWorld:
    return ObjectWorld([(e, "egg") for e in ids("egg", k)], {"egg": material}, material.templates(), name=f"{k}-egg")


def egg_whisk_world(eggs: int = 1, whisks: int = 1, wash: bool = True) -> ObjectWorld:
    """Beating needs a clean whisk and dirties it; washing resets it."""
    objs = [(e, "egg") for e in ids("egg", eggs)] + [(w, "whisk") for w in ids("whisk", whisks)]
    steps = tooled_steps(EGG, {"beat": [("whisk", "clean", "dirty")]})
    if wash:
        steps += WHISK.templates()
    return ObjectWorld(objs, {"egg": EGG, "whisk": WHISK}, steps, name=f"{eggs}-egg+{whisks}-whisk")


def egg_whisk_spoon_world(eggs: int = 1) -> ObjectWorld:
    """Scrambled egg: beat with the whisk, then stir in the pan with the spoon."""
    objs = [(e, "egg") for e in ids("egg", eggs)] + [("whisk", "whisk"), ("spoon", "spoon")]
    steps = tooled_steps(SCRAMBLE, {"beat": [("whisk", "clean", "dirty")], "stir": [("spoon", "clean", "dirty")]})
    steps += [Step("wash", ("whisk",), ((("dirty", "clean"),),)), Step("wash", ("spoon",), ((("dirty", "clean"),),))]
    return ObjectWorld(objs, {"egg": SCRAMBLE, "whisk": WHISK, "spoon": SPOON}, steps, name="egg+whisk+spoon")


def break_only_first(k: int = 2) -> Environment:
    """A k-egg world where only the first egg can be broken."""
    w = egg_world(k)
    keep = [a for n, a in w.actions.items() if not (n.startswith("break(") and n != "break(egg-1)")]
    return Environment(w.space, keep, name=f"{k}-egg, break egg-1 only")


def gaze_world(k: int = 3) -> Environment:
    """``k`` eggs in serial with a gaze component ranging over egg positions (0-based)."""
    d = Environment(
        [Domain("gaze", tuple(range(k)))],
        [identity_action()] + [Action(f"look-{j}", (lambda j: lambda s: (j,))(j)) for j in range(k)],
        name="gaze",
    )
    return serial_product(egg_world(k), d)


PLACES = ("fridge", "pan")


def spatial_world(k: int = 2) -> Environment:
    """Eggs with a location each; an egg is taken out of the fridge before it is cooked.

    Components alternate ``egg-j, place-j``.  Cooking steps need the egg in
    the pan, so the pan is the workspace the spatial convention reads.
    """
    place = Domain("place", PLACES)
    comps = []
    for _ in range(k):
        comps += [EGG.domain, place]
    acts = []
    for j, e in enumerate(ids("egg", k)):
        ei, pi = 2 * j, 2 * j + 1

        def take(s, ei=ei, pi=pi):
            if s[pi] != "fridge" or s[ei] != "fresh":
                return None
            return s[:pi] + ("pan",) + s[pi + 1:]

        acts.append(Action(f"take({e})", take))
        for st in EGG.templates():
            def fn(s, ei=ei, pi=pi, cases=st.cases):
                if s[pi] != "pan":
                    return None
                for ((pre, post),) in cases:
                    if s[ei] == pre:
                        return s[:ei] + (post,) + s[ei + 1:]
                return None

            acts.append(Action(f"{st.name}({e})", fn))
    acts.append(identity_action())
    return Environment(comps, acts, name=f"{k}-egg spatial")


def spatial_locations(k: int = 2) -> Dict[int, int]:
    return {2 * j: 2 * j + 1 for j in range(k)}


# a slice of toast and a fried egg, each with a busy stage that finishes on its own

TOAST_CHAIN = ("fresh", "toasting", "toasted", "buttered")
FRY_CHAIN = ("fresh", "frying", "side-done", "frying-2", "cooked")
BUSY = {"toasting": "toasted", "frying": "side-done", "frying-2": "cooked"}


def timed_pair_world() -> Environment:
    """Components (slice, egg).  Every action also finishes whatever was busy before it.

    The agent's moves are ``insert``/``butter`` for the slice and
    ``crack``/``flip`` for the egg; ``i`` just waits.
    """
    moves = {
        "insert": (0, "fresh", "toasting"),
        "butter": (0, "toasted", "buttered"),
        "crack": (1, "fresh", "frying"),
        "flip": (1, "side-done", "frying-2"),
    }

    def tick(before, after):
        return tuple(BUSY.get(b, a) if b in BUSY else a for b, a in zip(before, after))

    acts = []
    for name, (k, pre, post) in moves.items():
        def fn(s, k=k, pre=pre, post=post):
            if s[k] != pre:
                return None
            return tick(s, s[:k] + (post,) + s[k + 1:])

        acts.append(Action(name, fn))
    acts.append(Action(IDENTITY, lambda s: tick(s, s)))
    return Environment([Domain("slice", TOAST_CHAIN), Domain("fried-egg", FRY_CHAIN)], acts, name="toast+egg")
