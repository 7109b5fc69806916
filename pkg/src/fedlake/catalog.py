"""Global schema catalog and per-node metadata mappings.

The catalog is the coordinator's single source of truth: a flat list of
global attributes (the "virtual view" schema) plus, for every registered
data node, the translation tables that map global attribute names and
categorical vocabularies onto that node's local column names and value
encodings.  Translating a filter into a node's dialect (``to_local``) and
lifting result rows back into the global vocabulary (``to_global``) are
the two halves of the mediation step every federated query goes through.
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, field

CATEGORICAL = "categorical"
NUMERIC_INTEGER = "numeric-integer"
NUMERIC_REAL = "numeric-real"
ATTRIBUTE_KINDS = (CATEGORICAL, NUMERIC_INTEGER, NUMERIC_REAL)

_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")


class CatalogError(Exception):
    """Base class for catalog failures."""


class CatalogParseError(CatalogError):
    """The catalog document is not well-formed."""


class CatalogValidationError(CatalogError):
    """The document parsed but violates a catalog invariant.

    The message always names the offending path (attribute, node, value).
    """


class UncoveredAttributeError(CatalogError):
    """A filter references an attribute this node does not map.

    Planners catch this to exclude the node from a query plan.
    """


class ValueTranslationError(CatalogError):
    """A local result cell has no inverse mapping to the global vocabulary."""


@dataclass(frozen=True)
class AttributeDef:
    name: str
    kind: str
    vocabulary: tuple[str, ...] = ()
    unit: str | None = None
    range: tuple[float, float] | None = None

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    @property
    def is_numeric(self) -> bool:
        return self.kind in (NUMERIC_INTEGER, NUMERIC_REAL)


@dataclass(frozen=True)
class GlobalSchema:
    version: int
    attributes: tuple[AttributeDef, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_by_name", {a.name: a for a in self.attributes}
        )

    def attribute(self, name: str) -> AttributeDef:
        try:
            return self._by_name[name]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"unknown attribute: {name}") from None

    def has_attribute(self, name: str) -> bool:
        return name in self._by_name  # type: ignore[attr-defined]

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def to_dict(self) -> dict:
        attrs = []
        for a in self.attributes:
            d: dict = {"name": a.name, "kind": a.kind}
            if a.is_categorical:
                d["vocabulary"] = list(a.vocabulary)
            else:
                if a.unit is not None:
                    d["unit"] = a.unit
                if a.range is not None:
                    d["range"] = list(a.range)
            attrs.append(d)
        return {"version": self.version, "attributes": attrs}


@dataclass(frozen=True)
class NodeMapping:
    node_id: str
    base_url: str
    table: str
    columns: dict[str, str]
    values: dict[str, dict[str, str]]

    @property
    def covered_attributes(self) -> frozenset[str]:
        return frozenset(self.columns)

    def covers(self, attributes) -> bool:
        return set(attributes) <= self.covered_attributes

    def inverse_values(self, attribute: str) -> dict[str, str]:
        """Local value -> global value map; bijectivity is validated at load."""
        return {local: glob for glob, local in self.values.get(attribute, {}).items()}

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "base_url": self.base_url,
            "table": self.table,
            "columns": dict(self.columns),
            "values": {a: dict(v) for a, v in self.values.items()},
        }


@dataclass(frozen=True)
class FilterTerm:
    attribute: str
    comparator: str
    value: object

    def as_tuple(self) -> tuple:
        return (self.attribute, self.comparator, self.value)


@dataclass(frozen=True)
class LocalFilterTerm:
    column: str
    comparator: str
    value: object


@dataclass(frozen=True)
class LocalFilter:
    """A filter translated into one node's columns and value encodings.

    ``never_matches`` is set when a categorical filter value has no local
    encoding at this node: the site legitimately lacks that vocabulary
    entry, so the filter selects zero rows there rather than erroring.
    """

    terms: tuple[LocalFilterTerm, ...]
    never_matches: bool = False


@dataclass
class CatalogStore:
    schema: GlobalSchema
    mappings: dict[str, NodeMapping]
    saved_results: list[tuple[str, float, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._log_lock = threading.Lock()

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.mappings))

    def mapping(self, node_id: str) -> NodeMapping:
        return self.mappings[node_id]

    def record_result(self, query_text: str, digest: str) -> None:
        """Append one entry to the saved-results log (serialized, append-only)."""
        if not digest:
            raise ValueError("digest must be non-empty")
        with self._log_lock:
            now = time.time()
            if self.saved_results:
                now = max(now, self.saved_results[-1][1])
            self.saved_results.append((query_text, now, digest))


# --- document loading -------------------------------------------------------

_TOP_LEVEL_KEYS = {"version", "attributes", "nodes"}
_ATTR_KEYS = {"name", "kind", "vocabulary", "unit", "range"}
_NODE_KEYS = {"node_id", "base_url", "table", "columns", "values"}


def load_catalog(document: str) -> CatalogStore:
    """Parse and validate a catalog JSON document into a CatalogStore."""
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise CatalogParseError(f"catalog is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise CatalogParseError("catalog document must be a JSON object")

    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise CatalogParseError(
            f"unknown top-level keys: {', '.join(sorted(unknown))}"
        )
    for key in ("version", "attributes"):
        if key not in raw:
            raise CatalogParseError(f"missing top-level key: {key}")
    if not isinstance(raw["version"], int):
        raise CatalogParseError("version must be an integer")

    schema = _load_schema(raw["version"], raw["attributes"])
    mappings: dict[str, NodeMapping] = {}
    for i, node_raw in enumerate(raw.get("nodes", [])):
        mapping = _load_node(node_raw, schema, f"nodes[{i}]")
        if mapping.node_id in mappings:
            raise CatalogValidationError(
                f"nodes[{i}]: duplicate node_id: {mapping.node_id}"
            )
        mappings[mapping.node_id] = mapping
    return CatalogStore(schema=schema, mappings=mappings)


def load_catalog_file(path) -> CatalogStore:
    with open(path, encoding="utf-8") as fh:
        return load_catalog(fh.read())


def _load_schema(version: int, attrs_raw) -> GlobalSchema:
    if not isinstance(attrs_raw, list):
        raise CatalogParseError("attributes must be a list")
    attributes = []
    seen: set[str] = set()
    for i, a in enumerate(attrs_raw):
        path = f"attributes[{i}]"
        if not isinstance(a, dict):
            raise CatalogParseError(f"{path}: must be an object")
        unknown = set(a) - _ATTR_KEYS
        if unknown:
            raise CatalogParseError(
                f"{path}: unknown keys: {', '.join(sorted(unknown))}"
            )
        name = a.get("name")
        kind = a.get("kind")
        if not isinstance(name, str) or not _NAME_RE.match(name):
            raise CatalogValidationError(
                f"{path}: attribute name must be lowercase snake-case, got {name!r}"
            )
        if name in seen:
            raise CatalogValidationError(f"{path}: duplicate attribute: {name}")
        seen.add(name)
        if kind not in ATTRIBUTE_KINDS:
            raise CatalogValidationError(f"{path} ({name}): unknown kind: {kind!r}")

        if kind == CATEGORICAL:
            vocab = a.get("vocabulary")
            if not isinstance(vocab, list) or not vocab:
                raise CatalogValidationError(
                    f"{path} ({name}): categorical attribute needs a non-empty vocabulary"
                )
            if len(set(vocab)) != len(vocab):
                raise CatalogValidationError(
                    f"{path} ({name}): duplicate vocabulary entries"
                )
            if "range" in a or "unit" in a:
                raise CatalogValidationError(
                    f"{path} ({name}): range/unit not allowed on categorical attributes"
                )
            attributes.append(
                AttributeDef(name=name, kind=kind, vocabulary=tuple(vocab))
            )
        else:
            if "vocabulary" in a:
                raise CatalogValidationError(
                    f"{path} ({name}): vocabulary not allowed on numeric attributes"
                )
            rng = a.get("range")
            if rng is not None:
                if (
                    not isinstance(rng, list)
                    or len(rng) != 2
                    or not all(isinstance(x, (int, float)) for x in rng)
                    or rng[0] >= rng[1]
                ):
                    raise CatalogValidationError(
                        f"{path} ({name}): range must be [min, max] with min < max"
                    )
                rng = (float(rng[0]), float(rng[1]))
            attributes.append(
                AttributeDef(name=name, kind=kind, unit=a.get("unit"), range=rng)
            )
    return GlobalSchema(version=version, attributes=tuple(attributes))


def _load_node(raw, schema: GlobalSchema, path: str) -> NodeMapping:
    if not isinstance(raw, dict):
        raise CatalogParseError(f"{path}: must be an object")
    unknown = set(raw) - _NODE_KEYS
    if unknown:
        raise CatalogParseError(f"{path}: unknown keys: {', '.join(sorted(unknown))}")
    for key in ("node_id", "base_url", "table", "columns"):
        if key not in raw:
            raise CatalogParseError(f"{path}: missing key: {key}")
    node_id = raw["node_id"]
    columns = raw["columns"]
    if not isinstance(columns, dict):
        raise CatalogParseError(f"{path}: columns must be an object")

    for attr in columns:
        if not schema.has_attribute(attr):
            raise CatalogValidationError(
                f"{path} ({node_id}): column map references unknown attribute: {attr}"
            )
    local_names = list(columns.values())
    if len(set(local_names)) != len(local_names):
        dupes = sorted({c for c in local_names if local_names.count(c) > 1})
        raise CatalogValidationError(
            f"{path} ({node_id}): duplicate local column names: {', '.join(dupes)}"
        )

    values = raw.get("values", {})
    if not isinstance(values, dict):
        raise CatalogParseError(f"{path}: values must be an object")
    for attr, vmap in values.items():
        if attr not in columns:
            raise CatalogValidationError(
                f"{path} ({node_id}): value map for unmapped attribute: {attr}"
            )
        attr_def = schema.attribute(attr)
        if not attr_def.is_categorical:
            raise CatalogValidationError(
                f"{path} ({node_id}): value map on non-categorical attribute: {attr}"
            )
        if not isinstance(vmap, dict):
            raise CatalogParseError(f"{path}: values.{attr} must be an object")
        for glob in vmap:
            if glob not in attr_def.vocabulary:
                raise CatalogValidationError(
                    f"{path} ({node_id}): values.{attr}: {glob!r} not in vocabulary"
                )
        locals_ = list(vmap.values())
        if len(set(locals_)) != len(locals_):
            raise CatalogValidationError(
                f"{path} ({node_id}): non-bijective value map: {attr}"
            )
    return NodeMapping(
        node_id=node_id,
        base_url=raw["base_url"],
        table=raw["table"],
        columns=dict(columns),
        values={a: dict(v) for a, v in values.items()},
    )


# --- the two-step mediation -------------------------------------------------

def to_local(
    filter_terms, mapping: NodeMapping, schema: GlobalSchema
) -> LocalFilter:
    """Translate a global filter conjunction into one node's dialect.

    Attribute names become local column names and categorical values go
    through the node's value map; comparators and numeric values pass
    through untouched.
    """
    local_terms = []
    never = False
    for term in filter_terms:
        attr, comparator, value = term.as_tuple() if isinstance(term, FilterTerm) else term
        if attr not in mapping.covered_attributes:
            raise UncoveredAttributeError(
                f"node {mapping.node_id} does not cover attribute {attr}"
            )
        column = mapping.columns[attr]
        attr_def = schema.attribute(attr)
        if attr_def.is_categorical and attr in mapping.values:
            vmap = mapping.values[attr]
            if value in vmap:
                value = vmap[value]
            else:
                # Vocabulary entry absent at this site: matches zero rows.
                never = True
        local_terms.append(LocalFilterTerm(column, comparator, value))
    return LocalFilter(terms=tuple(local_terms), never_matches=never)


def to_global(rows, mapping: NodeMapping, schema: GlobalSchema) -> list[dict]:
    """Rename columns to global names and invert categorical value encodings.

    A categorical attribute without a value map uses the identity encoding:
    the node is assumed to store global vocabulary spellings verbatim.
    """
    column_to_attr = {local: attr for attr, local in mapping.columns.items()}
    inverse = {attr: mapping.inverse_values(attr) for attr in mapping.values}
    out = []
    for row in rows:
        translated = {}
        for column, cell in row.items():
            if column not in column_to_attr:
                raise ValueTranslationError(
                    f"node {mapping.node_id}: unmapped result column: {column}"
                )
            attr = column_to_attr[column]
            attr_def = schema.attribute(attr)
            if attr_def.is_categorical:
                if attr in inverse:
                    if cell not in inverse[attr]:
                        raise ValueTranslationError(
                            f"node {mapping.node_id}: column {column}: "
                            f"no inverse mapping for value {cell!r}"
                        )
                    cell = inverse[attr][cell]
                elif cell not in attr_def.vocabulary:
                    raise ValueTranslationError(
                        f"node {mapping.node_id}: column {column}: "
                        f"value {cell!r} not in global vocabulary"
                    )
            translated[attr] = cell
        out.append(translated)
    return out
