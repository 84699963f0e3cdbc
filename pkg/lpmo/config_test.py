from __future__ import print_function, division

import json

from pytest                 import raises

from . config import ConfigError
from . config import check_ids
from . config import check_aliases
from . config import resolve_check_id
from . config import merge
from . config import get_defaults
from . config import parse_suite
from . config import load_suite


def suite(*checks, **defaults):
    document = {"checks": list(checks)}
    if defaults:
        document["defaults"] = defaults
    return json.dumps(document)


def test_every_check_id_has_defaults():
    for check_id in check_ids:
        defaults = get_defaults(check_id)
        assert defaults["dim"] == 2
        assert "rho" in defaults["params"]


def test_nested_tables_merge_by_key():
    assert get_defaults("decay_gstar")["params"] == {"rho": 1.5, "beta": "auto", "lam": 3.}


def test_merge_leaves_arguments_alone():
    base = {"quad": {"rel_tol": 1e-4}, "seed": 0}
    override = {"quad": {"abs_tol": 1e-9}, "seed": 3}
    merged = merge(base, override)
    assert merged == {"quad": {"rel_tol": 1e-4, "abs_tol": 1e-9}, "seed": 3}
    assert base == {"quad": {"rel_tol": 1e-4}, "seed": 0}


def test_suite_defaults_precedence():
    text = suite({"check": "tail", "params": {"rho": 2.}},
                 **{"*": {"quad": {"cells_per_radius": 8}, "seed": 5},
                    "tail": {"seed": 7}})
    table, = parse_suite(text)
    assert table["quad"] == {"cells_per_radius": 8}
    assert table["params"] == {"rho": 2., "beta": "auto", "lam": None}
    assert table["seed"] == 7
    assert table["name"] == "tail_0"
    assert table["index"] == 0


def test_json_errors_report_position():
    with raises(ConfigError) as error:
        parse_suite('{"checks": [}', "suite.json")
    assert "suite.json:1:13" in str(error.value)


def test_unknown_check_id():
    with raises(ConfigError) as error:
        parse_suite(suite({"check": "tail"}, {"check": "bogus"}))
    assert 'check 1: field "check"' in str(error.value)


def test_missing_check_field():
    with raises(ConfigError):
        parse_suite(suite({"params": {}}))


def test_duplicate_names():
    with raises(ConfigError) as error:
        parse_suite(suite({"check": "tail", "name": "a"}, {"check": "aq", "name": "a"}))
    assert "duplicate" in str(error.value)


def test_unknown_top_level_key():
    with raises(ConfigError):
        parse_suite('{"checks": [], "extra": 1}')


def test_missing_file(tmp_path):
    with raises(ConfigError):
        load_suite(str(tmp_path / "missing.json"))


def test_load_suite(tmp_path):
    path = tmp_path / "suite.json"
    path.write_text(suite({"check": "aq"}, {"check": "dilation", "name": "d"}))
    tables = load_suite(str(path))
    assert [table["name"] for table in tables] == ["aq_0", "d"]
    assert tables[1]["index"] == 1


def test_earlier_check_ids_are_accepted():
    text = suite({"check": "lemma22ii"}, {"check": "atom_bound_thm25", "name": "bound"},
                 **{"decay_muS": {"seed": 4}})
    assert get_defaults("decay_muS") == get_defaults("decay_area")
    tail, bound = parse_suite(text)
    assert tail["check"] == "tail"
    assert tail["name"] == "tail_0"
    assert bound["check"] == "atom_bound_area"
    decay, = parse_suite(suite({"check": "decay_area"}, decay_muS={"seed": 4}))
    assert decay["seed"] == 4
    for alias, check_id in check_aliases.items():
        assert check_id in check_ids
        assert resolve_check_id(alias) == check_id


def test_alias_and_id_defaults_conflict():
    with raises(ConfigError) as error:
        parse_suite(suite({"check": "tail"}, lemma22ii={"seed": 1}, tail={"seed": 2}))
    assert "more than one" in str(error.value)
