import json
import os
from fractions import Fraction

import pytest

from jamsched import make_scenario
from jamsched.adversary import AdversarySpec
from jamsched.errors import InvalidScenario
from jamsched.io import dump_json, load_scenario, parse_scenario, scenario_to_doc
from jamsched.suites import divisible_suite

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def test_parse_rationals_pick_grid():
    sc, plan = parse_scenario({"lengths": [1, 2], "horizon": 4, "arrivals": [[0, 1], ["1/3", 0]],
                               "errors": ["3/2"], "opt_plan": [["1/4", 0]]})
    assert sc.ticks_per_unit == 12
    assert sc.arrivals == [(0, 1), (4, 0)] and sc.errors == [18]
    assert plan == [(3, 0)]


def test_rational_lengths_scale():
    sc, _ = parse_scenario({"lengths": ["1/2", 1], "horizon": 3})
    assert sc.ls.lengths == (1, 2) and sc.ls.scale == 2
    assert sc.horizon == 6


def test_adversary_block():
    sc, _ = parse_scenario({"lengths": [1, 2], "horizon": 10,
                            "adversary": {"kind": "stochastic", "rate": 1, "seed": 4}})
    assert sc.adversary == AdversarySpec("stochastic", {"rate": 1}, 4)


@pytest.mark.parametrize("doc, field", [
    ({"lengths": [1, 2]}, "horizon"),
    ({"lengths": [1], "horizon": 3}, "lengths"),
    ({"lengths": [1, 2], "horizon": "x"}, "horizon"),
    ({"lengths": [1, 2], "horizon": 3, "arrivals": [[0, 5]]}, "arrivals"),
    ({"lengths": [1, 2], "horizon": 3, "arrivals": [[2, 0], [1, 0]]}, "arrivals"),
    ({"lengths": [1, 2], "horizon": 3, "errors": [2, 1]}, "errors"),
    ({"lengths": [1, 2], "horizon": 3, "colour": 1}, "colour"),
    ({"lengths": [1, 2], "horizon": 3, "adversary": 3}, "adversary"),
])
def test_errors_name_the_field(doc, field):
    with pytest.raises(InvalidScenario, match=field):
        parse_scenario(doc)


def test_round_trip():
    sc = make_scenario([1, 2, 4], 10, arrivals=[(0, 2), ("1/2", 0)], errors=["7/3"], speedup=2)
    doc = scenario_to_doc(sc, plan=[(0, 2)])
    again, plan = parse_scenario(json.loads(dump_json(doc)))
    assert (again.arrivals, again.errors, again.horizon) == (sc.arrivals, sc.errors, sc.horizon)
    assert again.speedup == Fraction(2) and plan == [(0, 2)]


def test_load_with_speedup_override(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"lengths": [1, 2], "horizon": 4}))
    sc, _ = load_scenario(str(p), speedup="2")
    assert sc.speedup == 2 and sc.ticks_per_unit == 2


def test_unreadable_files(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{")
    with pytest.raises(InvalidScenario, match="not valid JSON"):
        load_scenario(str(p))
    with pytest.raises(InvalidScenario):
        load_scenario(str(tmp_path / "missing.json"))


def test_checked_in_suite_matches_generator():
    d = os.path.join(ROOT, "suites", "divisible")
    gen = dict(divisible_suite())
    assert sorted(gen) == sorted(os.listdir(d))
    for name, doc in gen.items():
        with open(os.path.join(d, name)) as fh:
            assert fh.read() == dump_json(doc)
