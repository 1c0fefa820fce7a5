"""Online scheduling policies and the string-id registry."""
from ..errors import InvalidScenario
from .base import IDLE, GeneratorPolicy, Policy
from .baselines import LongestFirst, PlanPolicy, ShortestFirst
from .greedy import Greedy, GreedyCover
from .mgreedy import MGreedy, MGreedyAdaptive, StageRecord
from .prudent import Prudent

POLICIES = {
    "greedy": Greedy,
    "greedy-cover": GreedyCover,
    "mgreedy": MGreedy,
    "mgreedy-adaptive": MGreedyAdaptive,
    "prudent": Prudent,
    "sl": ShortestFirst,
    "ll": LongestFirst,
}

_PARAMS = {"mgreedy": {"c": int}, "mgreedy-adaptive": {"c0": int, "W": int},
           "prudent": {"preamble": str}}


def parse_policy_id(policy_id: str):
    name, _, rest = policy_id.partition(":")
    name = name.strip().lower()
    if name not in POLICIES:
        raise InvalidScenario(f"unknown policy {policy_id!r}")
    kwargs = {}
    allowed = _PARAMS.get(name, {})
    for part in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = part.partition("=")
        if not eq or key not in allowed:
            raise InvalidScenario(f"bad parameter {part!r} for policy {name}")
        try:
            kwargs[key] = allowed[key](val)
        except ValueError:
            raise InvalidScenario(f"bad value in {part!r}") from None
    return name, kwargs


def make_policy(policy_id: str, ls):
    name, kwargs = parse_policy_id(policy_id)
    pol = POLICIES[name](ls, **kwargs)
    pol.id = policy_id
    return pol


__all__ = [
    "IDLE", "Policy", "GeneratorPolicy", "Greedy", "GreedyCover", "MGreedy",
    "MGreedyAdaptive", "StageRecord", "Prudent", "ShortestFirst", "LongestFirst",
    "PlanPolicy", "POLICIES", "make_policy", "parse_policy_id",
]
