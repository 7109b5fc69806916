import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedlake.catalog import (
    CatalogParseError,
    CatalogValidationError,
    FilterTerm,
    GlobalSchema,
    AttributeDef,
    NodeMapping,
    UncoveredAttributeError,
    ValueTranslationError,
    load_catalog,
    to_global,
    to_local,
)

MINIMAL = {
    "version": 1,
    "attributes": [
        {"name": "sex", "kind": "categorical", "vocabulary": ["female", "male"]}
    ],
}


def test_minimal_catalog_loads():
    store = load_catalog(json.dumps(MINIMAL))
    assert len(store.schema.attributes) == 1
    assert store.mappings == {}


def test_non_bijective_value_map_rejected():
    doc = dict(
        MINIMAL,
        nodes=[
            {
                "node_id": "n1",
                "base_url": "http://x",
                "table": "t",
                "columns": {"sex": "SEXE"},
                "values": {"sex": {"female": "F", "male": "F"}},
            }
        ],
    )
    with pytest.raises(CatalogValidationError, match="non-bijective value map: sex"):
        load_catalog(json.dumps(doc))


def test_scenario_catalog_has_two_mappings(scenario_catalog):
    assert set(scenario_catalog.mappings) == {"france", "spain"}
    assert len(scenario_catalog.schema.attributes) == 6


def test_unknown_top_level_key_rejected():
    doc = dict(MINIMAL, extra=1)
    with pytest.raises(CatalogParseError, match="unknown top-level keys: extra"):
        load_catalog(json.dumps(doc))


def test_malformed_json_is_parse_error():
    with pytest.raises(CatalogParseError, match="not valid JSON"):
        load_catalog("{nope")


def test_duplicate_attribute_named_in_error():
    doc = {
        "version": 1,
        "attributes": [
            {"name": "sex", "kind": "categorical", "vocabulary": ["f"]},
            {"name": "sex", "kind": "categorical", "vocabulary": ["m"]},
        ],
    }
    with pytest.raises(CatalogValidationError, match=r"attributes\[1\].*duplicate"):
        load_catalog(json.dumps(doc))


def test_attribute_name_case_enforced():
    doc = {
        "version": 1,
        "attributes": [{"name": "Sex", "kind": "categorical", "vocabulary": ["f"]}],
    }
    with pytest.raises(CatalogValidationError, match="snake-case"):
        load_catalog(json.dumps(doc))


def test_vocabulary_required_iff_categorical():
    with pytest.raises(CatalogValidationError, match="non-empty vocabulary"):
        load_catalog(
            json.dumps({"version": 1, "attributes": [{"name": "a", "kind": "categorical"}]})
        )
    with pytest.raises(CatalogValidationError, match="not allowed on numeric"):
        load_catalog(
            json.dumps(
                {
                    "version": 1,
                    "attributes": [
                        {"name": "a", "kind": "numeric-real", "vocabulary": ["x"]}
                    ],
                }
            )
        )


def test_value_map_entry_must_be_in_vocabulary():
    doc = dict(
        MINIMAL,
        nodes=[
            {
                "node_id": "n1",
                "base_url": "http://x",
                "table": "t",
                "columns": {"sex": "SEXE"},
                "values": {"sex": {"other": "O"}},
            }
        ],
    )
    with pytest.raises(CatalogValidationError, match="not in vocabulary"):
        load_catalog(json.dumps(doc))


def test_duplicate_local_columns_rejected():
    doc = {
        "version": 1,
        "attributes": [
            {"name": "sex", "kind": "categorical", "vocabulary": ["f", "m"]},
            {"name": "age", "kind": "numeric-integer"},
        ],
        "nodes": [
            {
                "node_id": "n1",
                "base_url": "http://x",
                "table": "t",
                "columns": {"sex": "C", "age": "C"},
            }
        ],
    }
    with pytest.raises(CatalogValidationError, match="duplicate local column"):
        load_catalog(json.dumps(doc))


# --- to_local ------------------------------------------------------------------

def test_to_local_single_substitution(scenario_catalog):
    mapping = scenario_catalog.mapping("france")
    local = to_local(
        [FilterTerm("sex", "=", "female")], mapping, scenario_catalog.schema
    )
    assert [(t.column, t.comparator, t.value) for t in local.terms] == [
        ("SEXE", "=", "F")
    ]
    assert not local.never_matches


def test_to_local_numeric_passthrough(scenario_catalog):
    mapping = scenario_catalog.mapping("france")
    local = to_local([FilterTerm("age", "=", 40)], mapping, scenario_catalog.schema)
    assert [(t.column, t.comparator, t.value) for t in local.terms] == [("AGE", "=", 40)]


def test_to_local_full_scenario_filter(scenario_catalog):
    terms = [
        FilterTerm("sex", "=", "female"),
        FilterTerm("age", "=", 40),
        FilterTerm("cancer_type", "=", "melanoma"),
        FilterTerm("tnm_stage", "=", "T3AN2Cm0"),
        FilterTerm("treatment", "=", "pembrolizumab_200mg"),
        FilterTerm("frequency", "=", "q3w"),
    ]
    local = to_local(terms, scenario_catalog.mapping("france"), scenario_catalog.schema)
    assert len(local.terms) == 6
    assert [t.value for t in local.terms] == ["F", 40, "MEL", "T3AN2Cm0", "PEMBRO200", "Q3S"]
    assert not local.never_matches


def test_to_local_uncovered_attribute_raises(scenario_schema):
    mapping = NodeMapping(
        node_id="n", base_url="http://x", table="t", columns={"sex": "S"}, values={}
    )
    with pytest.raises(UncoveredAttributeError, match="age"):
        to_local([FilterTerm("age", "=", 40)], mapping, scenario_schema)


def test_to_local_value_absent_at_node_matches_nothing(scenario_catalog):
    # Spain has no encoding for nivolumab: the filter must select zero rows
    # there, not error.
    local = to_local(
        [FilterTerm("treatment", "=", "nivolumab_240mg")],
        scenario_catalog.mapping("spain"),
        scenario_catalog.schema,
    )
    assert local.never_matches


def test_to_local_never_emits_global_names(scenario_catalog):
    terms = [FilterTerm("sex", "=", "female"), FilterTerm("age", ">=", 30)]
    for mapping in scenario_catalog.mappings.values():
        local = to_local(terms, mapping, scenario_catalog.schema)
        for t in local.terms:
            assert t.column not in scenario_catalog.schema.attribute_names


# --- to_global -----------------------------------------------------------------

def test_to_global_inverse_of_to_local_example(scenario_catalog):
    rows = to_global(
        [{"SEXE": "F"}], scenario_catalog.mapping("france"), scenario_catalog.schema
    )
    assert rows == [{"sex": "female"}]


def test_to_global_empty_rows(scenario_catalog):
    assert to_global([], scenario_catalog.mapping("france"), scenario_catalog.schema) == []


def test_to_global_unknown_local_value_names_everything(scenario_catalog):
    with pytest.raises(ValueTranslationError, match="france.*SEXE.*'X'"):
        to_global(
            [{"SEXE": "X"}], scenario_catalog.mapping("france"), scenario_catalog.schema
        )


def test_to_global_unmapped_column_is_error(scenario_catalog):
    with pytest.raises(ValueTranslationError, match="unmapped result column"):
        to_global(
            [{"MYSTERY": 1}], scenario_catalog.mapping("france"), scenario_catalog.schema
        )


# --- round-trip property --------------------------------------------------------

@st.composite
def mapping_and_rows(draw):
    vocab = draw(
        st.lists(
            st.text(alphabet="abcdefgh", min_size=1, max_size=4),
            min_size=1,
            max_size=5,
            unique=True,
        )
    )
    schema = GlobalSchema(
        version=1,
        attributes=(
            AttributeDef(name="color", kind="categorical", vocabulary=tuple(vocab)),
            AttributeDef(name="size", kind="numeric-integer", range=(0.0, 100.0)),
        ),
    )
    locals_ = draw(
        st.lists(
            st.text(alphabet="QRSTUV", min_size=1, max_size=4),
            min_size=len(vocab),
            max_size=len(vocab),
            unique=True,
        )
    )
    mapping = NodeMapping(
        node_id="n",
        base_url="http://x",
        table="t",
        columns={"color": "COL", "size": "SZ"},
        values={"color": dict(zip(vocab, locals_))},
    )
    n_rows = draw(st.integers(min_value=0, max_value=8))
    rows = [
        {
            "color": draw(st.sampled_from(vocab)),
            "size": draw(st.integers(min_value=0, max_value=100)),
        }
        for _ in range(n_rows)
    ]
    return schema, mapping, rows


@given(mapping_and_rows())
@settings(max_examples=60, deadline=None)
def test_forward_then_inverse_value_map_is_identity(data):
    schema, mapping, rows = data
    local_rows = []
    for row in rows:
        local = to_local(
            [FilterTerm("color", "=", row["color"]), FilterTerm("size", "=", row["size"])],
            mapping,
            schema,
        )
        assert not local.never_matches
        local_rows.append({t.column: t.value for t in local.terms})
    restored = to_global(local_rows, mapping, schema)
    assert restored == rows


# --- saved-results log -----------------------------------------------------------

def test_record_result_appends(scenario_catalog):
    store = load_catalog(json.dumps(MINIMAL))
    store.record_result("SELECT", "abc")
    assert len(store.saved_results) == 1
    store.record_result("SELECT", "def")
    assert len(store.saved_results) == 2
    assert [d for _, _, d in store.saved_results] == ["abc", "def"]


def test_record_result_no_dedup_and_monotone_timestamps():
    store = load_catalog(json.dumps(MINIMAL))
    for _ in range(100):
        store.record_result("SELECT", "same-digest")
    assert len(store.saved_results) == 100
    stamps = [ts for _, ts, _ in store.saved_results]
    assert all(a <= b for a, b in zip(stamps, stamps[1:]))


def test_record_result_requires_digest():
    store = load_catalog(json.dumps(MINIMAL))
    with pytest.raises(ValueError):
        store.record_result("SELECT", "")
