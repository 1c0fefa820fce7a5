"""Scenario files: JSON with rationals written as "p/q" strings.

Times in files are user units.  Length indices are 0-based.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .adversary import AdversarySpec
from .core import build_length_system, lcm_many, to_fraction
from .engine import Scenario, make_scenario
from .errors import InvalidLengths, InvalidScenario

SCENARIO_KEYS = {"lengths", "speedup", "horizon", "arrivals", "errors", "adversary",
                 "seed", "resolution", "opt_plan", "description"}


def _rational(v, field_name):
    try:
        return to_fraction(v)
    except (ValueError, TypeError, ZeroDivisionError):
        raise InvalidScenario(f"field {field_name!r}: {v!r} is not a rational")


def frac_str(x) -> str:
    return str(Fraction(x))


def parse_scenario(doc: dict) -> tuple[Scenario, list | None]:
    """Build a scenario and an optional offline plan (ticks) from a document."""
    if not isinstance(doc, dict):
        raise InvalidScenario("scenario must be a JSON object")
    unknown = set(doc) - SCENARIO_KEYS
    if unknown:
        raise InvalidScenario(f"unknown field(s): {', '.join(sorted(unknown))}")
    for need in ("lengths", "horizon"):
        if need not in doc:
            raise InvalidScenario(f"missing field {need!r}")
    try:
        ls = build_length_system([_rational(x, "lengths") for x in doc["lengths"]])
    except InvalidLengths as e:
        raise InvalidScenario(f"field 'lengths': {e}")
    horizon = _rational(doc["horizon"], "horizon")
    speedup = _rational(doc.get("speedup", 1), "speedup")
    arrivals = []
    for n, a in enumerate(doc.get("arrivals", [])):
        if not isinstance(a, (list, tuple)) or len(a) != 2:
            raise InvalidScenario(f"field 'arrivals'[{n}] must be [time, length_index]")
        idx = a[1]
        try:
            idx = int(idx)
        except (TypeError, ValueError):
            raise InvalidScenario(f"field 'arrivals'[{n}]: bad length index {a[1]!r}")
        if not 0 <= idx < ls.k:
            raise InvalidScenario(f"field 'arrivals'[{n}]: length index {idx} out of range")
        arrivals.append((_rational(a[0], "arrivals"), idx))
    errors = [_rational(e, "errors") for e in doc.get("errors", [])]
    if [t for t, _ in arrivals] != sorted(t for t, _ in arrivals):
        raise InvalidScenario("field 'arrivals' must be sorted by time")
    if errors != sorted(errors):
        raise InvalidScenario("field 'errors' must be sorted")
    adv = None
    if "adversary" in doc:
        block = doc["adversary"]
        if not isinstance(block, dict) or "kind" not in block:
            raise InvalidScenario("field 'adversary' must be an object with a 'kind'")
        params = {k: v for k, v in block.items() if k not in ("kind", "seed")}
        adv = AdversarySpec(block["kind"], params, block.get("seed", doc.get("seed")))
    plan_units = []
    for n, p in enumerate(doc.get("opt_plan") or []):
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise InvalidScenario(f"field 'opt_plan'[{n}] must be [start, length_index]")
        plan_units.append((_rational(p[0], "opt_plan"), int(p[1])))
    res = int(doc.get("resolution", 1))
    if res <= 0:
        raise InvalidScenario("field 'resolution' must be positive")
    # plan starts must also land on the tick grid
    res = lcm_many([res] + [(t * ls.scale).denominator for t, _ in plan_units])
    sc = make_scenario(ls, horizon, arrivals, errors, speedup, adv,
                       doc.get("seed"), resolution=res)
    R = sc.ticks_per_unit
    plan = [(int(t * ls.scale * R), i) for t, i in plan_units] if "opt_plan" in doc else None
    return sc, plan


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise InvalidScenario(f"{path}: not valid JSON ({e})")
    except OSError as e:
        raise InvalidScenario(f"{path}: {e.strerror}")


def load_scenario(path, speedup=None) -> tuple[Scenario, list | None]:
    doc = read_json(path)
    if speedup is not None and isinstance(doc, dict):
        doc = dict(doc, speedup=str(speedup))
    return parse_scenario(doc)


def scenario_to_doc(sc: Scenario, plan=None) -> dict:
    """Inverse of :func:`parse_scenario` for fixed patterns (user units)."""
    unit = sc.ticks_per_unit * sc.ls.scale
    u = lambda t: frac_str(Fraction(t, unit))
    doc = {
        "lengths": [frac_str(Fraction(l, sc.ls.scale)) for l in sc.ls.lengths],
        "speedup": frac_str(sc.speedup),
        "horizon": u(sc.horizon),
        "arrivals": [[u(t), i] for t, i in sc.arrivals],
        "errors": [u(e) for e in sc.errors],
    }
    if sc.ticks_per_unit > 1:
        doc["resolution"] = sc.ticks_per_unit
    if plan is not None:
        doc["opt_plan"] = [[u(s), i] for s, i in plan]
    if sc.seed is not None:
        doc["seed"] = sc.seed
    return doc


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
