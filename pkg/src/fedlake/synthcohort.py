"""Synthetic multi-node patient cohort generator with known ground truth.

Real cohort data sits behind data transfer agreements, so every testable
claim in this system runs against generated cohorts instead.  The
generator emits, per node, a CSV in that node's own column names and
value encodings (forcing the mediation machinery to do real work), plus
the federation catalog and a manifest recording the exact outcome rules
and per-row noise realizations, which makes Bayes-optimal accuracy
computable by an oracle.

Outcome labels are driven by decision tables, not a linear function, so a
linear model's achievable accuracy stays strictly below 1 and lands in a
realistic band while trees can do better.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

SEX = ("female", "male")
CANCER_TYPES = ("melanoma", "lung", "renal", "bladder")
TNM_STAGES = ("T1N0M0", "T2N0M0", "T2N1M0", "T3AN2Cm0", "T3N2M1", "T4N3M1")
TREATMENTS = (
    "pembrolizumab_200mg",
    "nivolumab_240mg",
    "ipilimumab_3mgkg",
    "atezolizumab_1200mg",
    "chemo_standard",
)
FREQUENCIES = ("q2w", "q3w", "q6w")
AE_TYPES = ("none", "colitis", "rash", "fatigue", "pneumonitis")
YESNO = ("no", "yes")

LATE_STAGES = {"T3AN2Cm0", "T3N2M1", "T4N3M1"}
AGE_BAND_CUT = 50
DAYS_BAND_CUT = 90

ATTRIBUTE_ORDER = (
    "sex",
    "age",
    "cancer_type",
    "tnm_stage",
    "treatment",
    "frequency",
    "ae_occurred",
    "ae_type",
    "ae_caused_by_treatment",
    "days_since_start",
)


def build_schema_dict() -> dict:
    return {
        "version": 1,
        "attributes": [
            {"name": "sex", "kind": "categorical", "vocabulary": list(SEX)},
            {"name": "age", "kind": "numeric-integer", "range": [18, 90], "unit": "years"},
            {"name": "cancer_type", "kind": "categorical", "vocabulary": list(CANCER_TYPES)},
            {"name": "tnm_stage", "kind": "categorical", "vocabulary": list(TNM_STAGES)},
            {"name": "treatment", "kind": "categorical", "vocabulary": list(TREATMENTS)},
            {"name": "frequency", "kind": "categorical", "vocabulary": list(FREQUENCIES)},
            {"name": "ae_occurred", "kind": "categorical", "vocabulary": list(YESNO)},
            {"name": "ae_type", "kind": "categorical", "vocabulary": list(AE_TYPES)},
            {
                "name": "ae_caused_by_treatment",
                "kind": "categorical",
                "vocabulary": list(YESNO),
            },
            {
                "name": "days_since_start",
                "kind": "numeric-integer",
                "range": [0, 540],
                "unit": "days",
            },
        ],
    }


def stage_band(stage: str) -> str:
    return "late" if stage in LATE_STAGES else "early"


def age_band(age: int) -> str:
    return "ge50" if age >= AGE_BAND_CUT else "lt50"


def days_band(days: int) -> str:
    return "gt90" if days > DAYS_BAND_CUT else "le90"


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    base_url: str
    table: str
    rows: int
    columns: dict[str, str]
    values: dict[str, dict[str, str]] = field(default_factory=dict)
    # Treatments this site can administer; None means all of them.
    available_treatments: tuple[str, ...] | None = None


@dataclass(frozen=True)
class CohortSpec:
    seed: int
    noise: float
    adherence: float
    nodes: tuple[NodeSpec, ...]
    sex_probs: dict[str, float]
    cancer_probs: dict[str, float]
    stage_probs: dict[str, float]
    age_range: tuple[int, int]
    days_range: tuple[int, int]
    freq_given_treatment: dict[str, dict[str, float]]
    guideline: dict[tuple[str, str, str], str]  # (cancer, stage band, age band)
    risk: dict[tuple[str, str, str], float]  # (treatment, tnm stage, age band)
    ae_type_dist: dict[str, dict[str, float]]  # treatment -> type -> p
    causation: dict[tuple[str, str], float]  # (ae type, days band) -> p

    def __post_init__(self) -> None:
        if not 0 <= self.noise < 0.5:
            raise ValueError("noise rate must be in [0, 0.5)")
        if not 0 < self.adherence <= 1:
            raise ValueError("adherence must be in (0, 1]")
        for name, dist in [
            ("sex_probs", self.sex_probs),
            ("cancer_probs", self.cancer_probs),
            ("stage_probs", self.stage_probs),
            *((f"freq[{t}]", d) for t, d in self.freq_given_treatment.items()),
            *((f"ae_type_dist[{t}]", d) for t, d in self.ae_type_dist.items()),
        ]:
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{name} probabilities sum to {total}, not 1")
        for key, p in self.risk.items():
            if not 0 <= p <= 1:
                raise ValueError(f"risk[{key}] = {p} outside [0, 1]")


def default_qualitop_spec(seed: int = 0) -> CohortSpec:
    """Three nodes x 2000 rows with heterogeneous local schemas.

    Rule strength is tuned so a linear model's achievable accuracy on the
    prediction patterns lands in the 0.70-0.90 band, the adverse-event
    minority fraction sits just under the balancing gate threshold, and
    the causation task stays close to deterministic.
    """
    guideline = {
        ("melanoma", "early", "lt50"): "pembrolizumab_200mg",
        ("melanoma", "early", "ge50"): "pembrolizumab_200mg",
        ("melanoma", "late", "lt50"): "ipilimumab_3mgkg",
        ("melanoma", "late", "ge50"): "nivolumab_240mg",
        ("lung", "early", "lt50"): "atezolizumab_1200mg",
        ("lung", "early", "ge50"): "atezolizumab_1200mg",
        ("lung", "late", "lt50"): "atezolizumab_1200mg",
        ("lung", "late", "ge50"): "chemo_standard",
        ("renal", "early", "lt50"): "pembrolizumab_200mg",
        ("renal", "early", "ge50"): "pembrolizumab_200mg",
        ("renal", "late", "lt50"): "ipilimumab_3mgkg",
        ("renal", "late", "ge50"): "chemo_standard",
        ("bladder", "early", "lt50"): "atezolizumab_1200mg",
        ("bladder", "early", "ge50"): "atezolizumab_1200mg",
        ("bladder", "late", "lt50"): "chemo_standard",
        ("bladder", "late", "ge50"): "chemo_standard",
    }

    # The risk table is enumerated per (treatment, stage, age band) cell.
    # Cell values come from a mostly additive logit (so the pattern is
    # learnable) made bimodal by strong late-stage terms (so post-balancing
    # decisions stay stable); a few interaction overrides keep the table
    # strictly richer than any linear model, and label noise keeps measured
    # accuracy under the top of the band.
    treatment_logit = {
        "pembrolizumab_200mg": 0.0,
        "nivolumab_240mg": -0.2,
        "ipilimumab_3mgkg": 1.2,
        "atezolizumab_1200mg": 0.0,
        "chemo_standard": 0.8,
    }
    stage_logit = {
        "T1N0M0": 0.0,
        "T2N0M0": 0.2,
        "T2N1M0": 0.5,
        "T3AN2Cm0": 4.2,
        "T3N2M1": 4.6,
        "T4N3M1": 5.0,
    }
    risk = {}
    for treatment in TREATMENTS:
        for stage in TNM_STAGES:
            for aband in ("lt50", "ge50"):
                logit = (
                    -3.2
                    + treatment_logit[treatment]
                    + stage_logit[stage]
                    + (0.35 if aband == "ge50" else 0.0)
                )
                risk[(treatment, stage, aband)] = round(1 / (1 + np.exp(-logit)), 4)
    # Interaction cells no additive model can represent.
    risk[("ipilimumab_3mgkg", "T4N3M1", "ge50")] = 0.97
    risk[("nivolumab_240mg", "T3AN2Cm0", "lt50")] = 0.30
    risk[("chemo_standard", "T2N1M0", "ge50")] = 0.30

    # Each agent has one signature adverse event.
    ae_type_dist = {
        "pembrolizumab_200mg": {"colitis": 0.92, "rash": 0.04, "fatigue": 0.02, "pneumonitis": 0.02},
        "nivolumab_240mg": {"pneumonitis": 0.92, "fatigue": 0.04, "rash": 0.02, "colitis": 0.02},
        "ipilimumab_3mgkg": {"colitis": 0.90, "rash": 0.05, "pneumonitis": 0.03, "fatigue": 0.02},
        "atezolizumab_1200mg": {"rash": 0.90, "fatigue": 0.05, "colitis": 0.03, "pneumonitis": 0.02},
        "chemo_standard": {"fatigue": 0.90, "rash": 0.05, "colitis": 0.03, "pneumonitis": 0.02},
    }

    causation = {
        ("colitis", "le90"): 0.95,
        ("colitis", "gt90"): 0.88,
        ("rash", "le90"): 0.93,
        ("rash", "gt90"): 0.82,
        ("fatigue", "le90"): 0.18,
        ("fatigue", "gt90"): 0.10,
        ("pneumonitis", "le90"): 0.96,
        ("pneumonitis", "gt90"): 0.90,
        ("none", "le90"): 0.0,
        ("none", "gt90"): 0.0,
    }

    freq_given_treatment = {
        "pembrolizumab_200mg": {"q2w": 0.05, "q3w": 0.75, "q6w": 0.20},
        "nivolumab_240mg": {"q2w": 0.55, "q3w": 0.10, "q6w": 0.35},
        "ipilimumab_3mgkg": {"q2w": 0.05, "q3w": 0.80, "q6w": 0.15},
        "atezolizumab_1200mg": {"q2w": 0.25, "q3w": 0.60, "q6w": 0.15},
        "chemo_standard": {"q2w": 0.30, "q3w": 0.50, "q6w": 0.20},
    }

    france = NodeSpec(
        node_id="france",
        base_url="http://127.0.0.1:8101",
        table="patients",
        rows=2000,
        columns={
            "sex": "SEXE",
            "age": "AGE",
            "cancer_type": "TYPE_CANCER",
            "tnm_stage": "STADE_TNM",
            "treatment": "TRAITEMENT",
            "frequency": "FREQUENCE",
            "ae_occurred": "EI_SURVENU",
            "ae_type": "TYPE_EI",
            "ae_caused_by_treatment": "EI_CAUSE_TRT",
            "days_since_start": "JOURS_DEBUT",
        },
        values={
            "sex": {"female": "F", "male": "M"},
            "cancer_type": {"melanoma": "MEL", "lung": "PULM", "renal": "REN", "bladder": "VES"},
            "treatment": {
                "pembrolizumab_200mg": "PEMBRO200",
                "nivolumab_240mg": "NIVO240",
                "ipilimumab_3mgkg": "IPI3",
                "atezolizumab_1200mg": "ATEZO1200",
                "chemo_standard": "CHIMIO",
            },
            "frequency": {"q2w": "Q2S", "q3w": "Q3S", "q6w": "Q6S"},
            "ae_occurred": {"no": "NON", "yes": "OUI"},
            "ae_type": {
                "none": "AUCUN",
                "colitis": "COLITE",
                "rash": "ERUPTION",
                "fatigue": "FATIGUE",
                "pneumonitis": "PNEUMOPATHIE",
            },
            "ae_caused_by_treatment": {"no": "NON", "yes": "OUI"},
        },
    )

    spain = NodeSpec(
        node_id="spain",
        base_url="http://127.0.0.1:8102",
        table="pacientes",
        rows=2000,
        columns={
            "sex": "sexo",
            "age": "edad",
            "cancer_type": "tipo_cancer",
            "tnm_stage": "estadio_tnm",
            "treatment": "tratamiento",
            "frequency": "frecuencia",
            "ae_occurred": "ea_ocurrido",
            "ae_type": "tipo_ea",
            "ae_caused_by_treatment": "ea_causado",
            "days_since_start": "dias_inicio",
        },
        values={
            "sex": {"female": "f", "male": "m"},
            "cancer_type": {"melanoma": "mel", "lung": "pulmon", "renal": "renal", "bladder": "vejiga"},
            # nivolumab is not on the Spanish formulary: no encoding for it
            "treatment": {
                "pembrolizumab_200mg": "pembro",
                "ipilimumab_3mgkg": "ipi",
                "atezolizumab_1200mg": "atezo",
                "chemo_standard": "quimio",
            },
            "ae_occurred": {"no": "no", "yes": "si"},
            "ae_type": {
                "none": "ninguno",
                "colitis": "colitis",
                "rash": "erupcion",
                "fatigue": "fatiga",
                "pneumonitis": "neumonitis",
            },
            "ae_caused_by_treatment": {"no": "no", "yes": "si"},
        },
        available_treatments=(
            "pembrolizumab_200mg",
            "ipilimumab_3mgkg",
            "atezolizumab_1200mg",
            "chemo_standard",
        ),
    )

    netherlands = NodeSpec(
        node_id="netherlands",
        base_url="http://127.0.0.1:8103",
        table="patienten",
        rows=2000,
        columns={
            "sex": "geslacht",
            "age": "leeftijd",
            "cancer_type": "kanker_type",
            "tnm_stage": "tnm_stadium",
            "treatment": "behandeling",
            "frequency": "frequentie",
            "ae_occurred": "bijwerking",
            "ae_type": "bijwerking_type",
            "ae_caused_by_treatment": "door_behandeling",
            "days_since_start": "dagen_sinds_start",
        },
        values={
            "sex": {"female": "V", "male": "M"},
            "ae_occurred": {"no": "nee", "yes": "ja"},
            "ae_caused_by_treatment": {"no": "nee", "yes": "ja"},
        },
    )

    return CohortSpec(
        seed=seed,
        noise=0.05,
        adherence=0.86,
        nodes=(france, spain, netherlands),
        sex_probs={"female": 0.48, "male": 0.52},
        cancer_probs={"melanoma": 0.40, "lung": 0.25, "renal": 0.20, "bladder": 0.15},
        stage_probs={
            "T1N0M0": 0.26,
            "T2N0M0": 0.24,
            "T2N1M0": 0.21,
            "T3AN2Cm0": 0.13,
            "T3N2M1": 0.10,
            "T4N3M1": 0.06,
        },
        age_range=(22, 88),
        days_range=(0, 540),
        freq_given_treatment=freq_given_treatment,
        guideline=guideline,
        risk=risk,
        ae_type_dist=ae_type_dist,
        causation=causation,
    )


# --- row synthesis ------------------------------------------------------------

def _sample(rng, dist: dict[str, float]):
    names = list(dist)
    probs = np.array([dist[n] for n in names])
    return names[rng.choice(len(names), p=probs / probs.sum())]


def _type_probs(spec: CohortSpec, treatment: str, p_ae: float) -> dict[str, float]:
    probs = {"none": 1.0 - p_ae}
    for ae_type, p in spec.ae_type_dist[treatment].items():
        probs[ae_type] = p_ae * p
    return probs


def _generate_node_rows(spec: CohortSpec, node: NodeSpec, rng):
    available = list(node.available_treatments or TREATMENTS)
    rows = []
    truth = {
        "p_ae": [],
        "pre_noise": {"ae_occurred": [], "ae_type": [], "ae_caused_by_treatment": []},
        "flips": {"ae_occurred": [], "ae_type": [], "ae_caused_by_treatment": []},
        "bayes": {
            "treatment": [],
            "ae_occurred": [],
            "ae_type": [],
            "ae_caused_by_treatment": [],
        },
    }
    for _ in range(node.rows):
        sex = _sample(rng, spec.sex_probs)
        age = int(rng.integers(spec.age_range[0], spec.age_range[1] + 1))
        cancer = _sample(rng, spec.cancer_probs)
        stage = _sample(rng, spec.stage_probs)
        sband, aband = stage_band(stage), age_band(age)

        preferred = spec.guideline[(cancer, sband, aband)]
        if preferred not in available:
            preferred = available[0]
        if rng.uniform() < spec.adherence:
            treatment = preferred
        else:
            alternatives = [t for t in available if t != preferred]
            treatment = alternatives[int(rng.integers(0, len(alternatives)))]
        frequency = _sample(rng, spec.freq_given_treatment[treatment])
        days = int(rng.integers(spec.days_range[0], spec.days_range[1] + 1))

        p_ae = spec.risk[(treatment, stage, aband)]
        ae_occurred = "yes" if rng.uniform() < p_ae else "no"
        if ae_occurred == "yes":
            ae_type = _sample(rng, spec.ae_type_dist[treatment])
            p_caused = spec.causation[(ae_type, days_band(days))]
            ae_caused = "yes" if rng.uniform() < p_caused else "no"
        else:
            ae_type = "none"
            ae_caused = "no"

        pre = (ae_occurred, ae_type, ae_caused)

        # Label noise: occurrence flips regenerate a coherent type; type noise
        # re-draws among the non-none types; causation flips directly.
        flip_occurred = rng.uniform() < spec.noise
        if flip_occurred:
            ae_occurred = "no" if ae_occurred == "yes" else "yes"
            if ae_occurred == "yes":
                ae_type = _sample(rng, spec.ae_type_dist[treatment])
                p_caused = spec.causation[(ae_type, days_band(days))]
                ae_caused = "yes" if rng.uniform() < p_caused else "no"
            else:
                ae_type = "none"
                ae_caused = "no"
        flip_type = False
        if ae_occurred == "yes" and rng.uniform() < spec.noise:
            flip_type = True
            others = [t for t in AE_TYPES[1:] if t != ae_type]
            ae_type = others[int(rng.integers(0, len(others)))]
        flip_caused = False
        if ae_occurred == "yes" and rng.uniform() < spec.noise:
            flip_caused = True
            ae_caused = "no" if ae_caused == "yes" else "yes"

        rows.append(
            {
                "sex": sex,
                "age": age,
                "cancer_type": cancer,
                "tnm_stage": stage,
                "treatment": treatment,
                "frequency": frequency,
                "ae_occurred": ae_occurred,
                "ae_type": ae_type,
                "ae_caused_by_treatment": ae_caused,
                "days_since_start": days,
            }
        )
        truth["p_ae"].append(p_ae)
        truth["pre_noise"]["ae_occurred"].append(pre[0])
        truth["pre_noise"]["ae_type"].append(pre[1])
        truth["pre_noise"]["ae_caused_by_treatment"].append(pre[2])
        truth["flips"]["ae_occurred"].append(flip_occurred)
        truth["flips"]["ae_type"].append(flip_type)
        truth["flips"]["ae_caused_by_treatment"].append(flip_caused)

        type_probs = _type_probs(spec, treatment, p_ae)
        truth["bayes"]["treatment"].append(preferred)
        truth["bayes"]["ae_occurred"].append("yes" if p_ae > 0.5 else "no")
        truth["bayes"]["ae_type"].append(max(type_probs, key=lambda t: (type_probs[t], t)))
        # Causation features include the observed event type, so the oracle
        # conditions on it.
        truth["bayes"]["ae_caused_by_treatment"].append(
            "yes" if spec.causation[(ae_type, days_band(days))] > 0.5 else "no"
        )
    return rows, truth


def _encode_cell(node: NodeSpec, attribute: str, value) -> str:
    vmap = node.values.get(attribute)
    if vmap is not None and isinstance(value, str):
        return vmap[value]
    return str(value)


def generate(spec: CohortSpec, out_dir) -> dict:
    """Write per-node CSVs, node mapping documents, the federation catalog
    and the ground-truth manifest.  Deterministic per (spec, seed)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    schema_dict = build_schema_dict()

    catalog_doc = {
        "version": schema_dict["version"],
        "attributes": schema_dict["attributes"],
        "nodes": [],
    }
    manifest: dict = {
        "seed": spec.seed,
        "noise": spec.noise,
        "adherence": spec.adherence,
        "rules": {
            "guideline": {"|".join(k): v for k, v in spec.guideline.items()},
            "risk": {"|".join(k): v for k, v in spec.risk.items()},
            "ae_type_dist": spec.ae_type_dist,
            "causation": {"|".join(k): v for k, v in spec.causation.items()},
        },
        "marginals": {
            "sex": spec.sex_probs,
            "cancer_type": spec.cancer_probs,
            "tnm_stage": spec.stage_probs,
            "age_range": list(spec.age_range),
            "days_range": list(spec.days_range),
        },
        "nodes": {},
    }

    for index, node in enumerate(spec.nodes):
        rng = np.random.default_rng([spec.seed, index])
        rows, truth = _generate_node_rows(spec, node, rng)

        node_dir = out / "nodes" / node.node_id
        node_dir.mkdir(parents=True, exist_ok=True)
        local_columns = [node.columns[a] for a in ATTRIBUTE_ORDER]
        with open(node_dir / "data.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(local_columns)
            for row in rows:
                writer.writerow(
                    [_encode_cell(node, a, row[a]) for a in ATTRIBUTE_ORDER]
                )

        mapping_doc = {
            "node_id": node.node_id,
            "base_url": node.base_url,
            "table": node.table,
            "columns": node.columns,
            "values": node.values,
        }
        with open(node_dir / "node.json", "w", encoding="utf-8") as fh:
            json.dump(
                {"schema": schema_dict, "node": mapping_doc},
                fh,
                indent=2,
                sort_keys=True,
            )
        catalog_doc["nodes"].append(mapping_doc)
        manifest["nodes"][node.node_id] = {"rows": node.rows, **truth}

    with open(out / "catalog.json", "w", encoding="utf-8") as fh:
        json.dump(catalog_doc, fh, indent=2, sort_keys=True)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return {
        "catalog": str(out / "catalog.json"),
        "manifest": str(out / "manifest.json"),
        "nodes": {
            n.node_id: {
                "data": str(out / "nodes" / n.node_id / "data.csv"),
                "config": str(out / "nodes" / n.node_id / "node.json"),
            }
            for n in spec.nodes
        },
    }


# --- spec (de)serialization for the CLI ----------------------------------------

def spec_to_dict(spec: CohortSpec) -> dict:
    raw = asdict(spec)
    raw["guideline"] = {"|".join(k): v for k, v in spec.guideline.items()}
    raw["risk"] = {"|".join(k): v for k, v in spec.risk.items()}
    raw["causation"] = {"|".join(k): v for k, v in spec.causation.items()}
    raw["nodes"] = [asdict(n) for n in spec.nodes]
    return raw


def spec_from_dict(raw: dict) -> CohortSpec:
    nodes = tuple(
        NodeSpec(
            node_id=n["node_id"],
            base_url=n["base_url"],
            table=n["table"],
            rows=n["rows"],
            columns=dict(n["columns"]),
            values={a: dict(v) for a, v in n.get("values", {}).items()},
            available_treatments=(
                tuple(n["available_treatments"])
                if n.get("available_treatments")
                else None
            ),
        )
        for n in raw["nodes"]
    )
    return CohortSpec(
        seed=raw["seed"],
        noise=raw["noise"],
        adherence=raw["adherence"],
        nodes=nodes,
        sex_probs=dict(raw["sex_probs"]),
        cancer_probs=dict(raw["cancer_probs"]),
        stage_probs=dict(raw["stage_probs"]),
        age_range=tuple(raw["age_range"]),
        days_range=tuple(raw["days_range"]),
        freq_given_treatment={t: dict(d) for t, d in raw["freq_given_treatment"].items()},
        guideline={tuple(k.split("|")): v for k, v in raw["guideline"].items()},
        risk={tuple(k.split("|")): v for k, v in raw["risk"].items()},
        ae_type_dist={t: dict(d) for t, d in raw["ae_type_dist"].items()},
        causation={tuple(k.split("|")): v for k, v in raw["causation"].items()},
    )
