import copy
import json
from importlib import resources

import pytest

from kstab.scenario import (
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
    list_builtins,
    load_scenario,
    loads_scenario,
    register_builtin,
    serialize,
)
from kstab.stability import wall_of


def document(name):
    return json.loads(resources.files("kstab").joinpath("data", f"{name}.json").read_text())


@pytest.mark.parametrize("name", ["m4", "m5"])
def test_builtins_load_and_validate(name):
    sc = load_scenario(name)
    assert sc.name == name
    assert sc.report.passed
    assert name in list_builtins()


def test_missing_table_entry_names_the_multiset():
    doc = document("m4")
    doc["forms"]["E_S"]["table"] = doc["forms"]["E_S"]["table"][:-1]
    with pytest.raises(ScenarioParseError, match=r"forms\.E_S.*F\^3"):
        load_scenario(doc)


def test_float_literal_rejected_with_position():
    text = resources.files("kstab").joinpath("data", "m4.json").read_text().replace('"n": 4,', '"n": 4.0,', 1)
    with pytest.raises(ScenarioParseError) as info:
        loads_scenario(text)
    assert info.value.where == "<string>:5:8"


def test_syntax_error_has_position():
    with pytest.raises(ScenarioParseError, match=r"<string>:1:\d+"):
        loads_scenario('{"name": }')


def test_wrong_stated_check_fails_validation():
    doc = document("m4")
    doc["checks"]["okounkov_volume"]["value"] = "1/5"
    with pytest.raises(ScenarioValidationError) as info:
        load_scenario(doc)
    assert not info.value.report.passed


def test_wrong_stated_volume_fails_validation():
    doc = document("m4")
    doc["volumes"]["W_ES"]["pieces"][0]["volume"] = "3*u - u^3"
    with pytest.raises(ScenarioValidationError):
        load_scenario(doc)


def test_unknown_field_rejected():
    doc = document("m5")
    doc["cone"]["radius"] = "1"
    with pytest.raises(ScenarioParseError, match="radius"):
        load_scenario(doc)


@pytest.mark.parametrize("name", ["m4", "m5"])
def test_serialize_round_trip(name):
    sc = load_scenario(name)
    again = loads_scenario(serialize(sc))
    assert again == sc
    assert serialize(again) == serialize(sc)


def test_term_lists_and_halfspace_objects():
    doc = document("m4")
    fn = doc["ratios"]["functions"][0]
    fn["numerator"] = [{"coeff": "25", "exponents": [0]}]
    fn["denominator"] = [{"coeff": "27", "exponents": [0]}, {"coeff": "-18", "exponents": [1]}]
    doc["volumes"]["W_ES"]["pieces"][0]["cell"] = {
        "halfspaces": [{"normal": ["-1"], "offset": "0"}, {"normal": ["1"], "offset": "1"}]
    }
    sc = load_scenario(doc)
    base = load_scenario("m4")
    assert [wall_of(f) for f in sc.ratios] == [wall_of(f) for f in base.ratios]
    assert sc.volumes["W_ES"] == base.volumes["W_ES"]


def test_register_builtin(tmp_path):
    doc = document("m5")
    doc["name"] = "m5copy"
    path = tmp_path / "copy.json"
    path.write_text(json.dumps(doc))
    register_builtin("m5copy", path)
    assert "m5copy" in list_builtins()
    assert load_scenario("m5copy").chains == load_scenario("m5").chains
    assert load_scenario(str(path)).name == "m5copy"


def test_unknown_source():
    with pytest.raises(ScenarioError, match="builtins"):
        load_scenario("no-such-scenario")


def test_load_does_not_mutate_input():
    doc = document("m4")
    snapshot = copy.deepcopy(doc)
    load_scenario(doc)
    assert doc == snapshot
