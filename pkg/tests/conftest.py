import json

import pytest

from fedlake.catalog import load_catalog

# The six-attribute two-node scenario used across catalog/query tests:
# a federation of a French and a Spanish node with heterogeneous local
# schemas over the same global attributes.
SCENARIO_CATALOG = {
    "version": 1,
    "attributes": [
        {"name": "sex", "kind": "categorical", "vocabulary": ["female", "male"]},
        {"name": "age", "kind": "numeric-integer", "range": [0, 120]},
        {
            "name": "cancer_type",
            "kind": "categorical",
            "vocabulary": ["melanoma", "lung", "renal", "bladder"],
        },
        {
            "name": "tnm_stage",
            "kind": "categorical",
            "vocabulary": ["T1N0M0", "T2N0M0", "T2N1M0", "T3AN2Cm0", "T3N2M1", "T4N3M1"],
        },
        {
            "name": "treatment",
            "kind": "categorical",
            "vocabulary": [
                "pembrolizumab_200mg",
                "nivolumab_240mg",
                "ipilimumab_3mgkg",
                "atezolizumab_1200mg",
                "chemo_standard",
            ],
        },
        {"name": "frequency", "kind": "categorical", "vocabulary": ["q2w", "q3w", "q6w"]},
    ],
    "nodes": [
        {
            "node_id": "france",
            "base_url": "http://127.0.0.1:8101",
            "table": "patients",
            "columns": {
                "sex": "SEXE",
                "age": "AGE",
                "cancer_type": "TYPE_CANCER",
                "tnm_stage": "STADE_TNM",
                "treatment": "TRAITEMENT",
                "frequency": "FREQUENCE",
            },
            "values": {
                "sex": {"female": "F", "male": "M"},
                "cancer_type": {
                    "melanoma": "MEL",
                    "lung": "PULM",
                    "renal": "REN",
                    "bladder": "VES",
                },
                "treatment": {
                    "pembrolizumab_200mg": "PEMBRO200",
                    "nivolumab_240mg": "NIVO240",
                    "ipilimumab_3mgkg": "IPI3",
                    "atezolizumab_1200mg": "ATEZO1200",
                    "chemo_standard": "CHIMIO",
                },
                "frequency": {"q2w": "Q2S", "q3w": "Q3S", "q6w": "Q6S"},
            },
        },
        {
            "node_id": "spain",
            "base_url": "http://127.0.0.1:8102",
            "table": "pacientes",
            "columns": {
                "sex": "sexo",
                "age": "edad",
                "cancer_type": "tipo_cancer",
                "tnm_stage": "estadio_tnm",
                "treatment": "tratamiento",
                "frequency": "frecuencia",
            },
            "values": {
                "sex": {"female": "f", "male": "m"},
                # nivolumab is not offered in Spain: legitimately absent entry
                "treatment": {
                    "pembrolizumab_200mg": "pembro",
                    "ipilimumab_3mgkg": "ipi",
                    "atezolizumab_1200mg": "atezo",
                    "chemo_standard": "quimio",
                },
            },
        },
    ],
}


@pytest.fixture(scope="session")
def scenario_catalog():
    return load_catalog(json.dumps(SCENARIO_CATALOG))


@pytest.fixture(scope="session")
def scenario_schema(scenario_catalog):
    return scenario_catalog.schema
