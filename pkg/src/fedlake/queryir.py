"""Analytical query language: parsing, validation, rendering, planning.

The surface grammar is deliberately small and LL(1):

    SELECT [WHERE <conjunction>]
    TREE <target> BY <attr> (, <attr>)* [WHERE <conjunction>]
    PREDICT <treatment|ae_caused|ae_risk|ae_type> WHERE <conjunction>

    conjunction := <attr> <cmp> <value> (AND ...)*
    cmp         := = | != | < | <= | > | >=

Keywords are case-insensitive, literals case-sensitive.  Filters are pure
conjunctions; ordering comparators apply to numeric attributes only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import catalog as cat
from . import patterns as pat
from .catalog import CatalogStore, FilterTerm, GlobalSchema, LocalFilter

SELECT_ROWS = "SELECT_ROWS"
COUNT_BY = "COUNT_BY"

ROW_UNION = "ROW_UNION"
COUNT_TREE_MERGE = "COUNT_TREE_MERGE"
MODEL_INFERENCE = "MODEL_INFERENCE"

ORDER_COMPARATORS = ("<", "<=", ">", ">=")
COMPARATORS = ("=", "!=") + ORDER_COMPARATORS


class QuerySyntaxError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class QueryValidationError(Exception):
    """The query parsed but does not type-check against the schema."""


class PlanError(Exception):
    """No executable plan exists for this query over this catalog."""


@dataclass(frozen=True)
class AnalyticalQuery:
    pattern: str
    filter: tuple[FilterTerm, ...] = ()
    target: str | None = None
    group_by: tuple[str, ...] = ()

    def referenced_attributes(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for term in self.filter:
            seen.setdefault(term.attribute)
        if self.target is not None:
            seen.setdefault(self.target)
        for attr in self.group_by:
            seen.setdefault(attr)
        return tuple(seen)


@dataclass(frozen=True)
class LocalSubQuery:
    table: str
    filter: LocalFilter
    mode: str = SELECT_ROWS
    group_columns: tuple[str, ...] = ()

    def to_wire(self) -> dict:
        return {
            "table": self.table,
            "filter": [
                {"column": t.column, "comparator": t.comparator, "value": t.value}
                for t in self.filter.terms
            ],
            "never_matches": self.filter.never_matches,
            "mode": self.mode,
            "group_columns": list(self.group_columns),
        }

    @classmethod
    def from_wire(cls, raw: dict) -> "LocalSubQuery":
        terms = tuple(
            cat.LocalFilterTerm(t["column"], t["comparator"], t["value"])
            for t in raw.get("filter", [])
        )
        return cls(
            table=raw["table"],
            filter=LocalFilter(terms=terms, never_matches=raw.get("never_matches", False)),
            mode=raw.get("mode", SELECT_ROWS),
            group_columns=tuple(raw.get("group_columns", ())),
        )


@dataclass(frozen=True)
class QueryPlan:
    query: AnalyticalQuery
    subqueries: tuple[tuple[str, LocalSubQuery], ...]
    aggregation: str


# --- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?\d+(?P<frac>\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'[^'\n]*')
  | (?P<cmp><=|>=|!=|=|<|>)
  | (?P<comma>,)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"select", "tree", "predict", "by", "where", "and"}


@dataclass(frozen=True)
class _Token:
    kind: str  # keyword | ident | number | string | cmp | comma | eof
    value: object
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        col = pos - line_start + 1
        if m.group("ws"):
            nl = m.group(0).count("\n")
            if nl:
                line += nl
                line_start = pos + m.group(0).rindex("\n") + 1
        elif m.group("number") is not None:
            raw = m.group("number")
            value = float(raw) if m.group("frac") else int(raw)
            tokens.append(_Token("number", value, line, col))
        elif m.group("ident") is not None:
            word = m.group("ident")
            if word.lower() in _KEYWORDS:
                tokens.append(_Token("keyword", word.lower(), line, col))
            else:
                tokens.append(_Token("ident", word, line, col))
        elif m.group("string") is not None:
            tokens.append(_Token("string", m.group("string")[1:-1], line, col))
        elif m.group("cmp") is not None:
            tokens.append(_Token("cmp", m.group("cmp"), line, col))
        else:
            tokens.append(_Token("comma", ",", line, col))
        pos = m.end()
    tokens.append(_Token("eof", None, line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, schema: GlobalSchema):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.schema = schema

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise QuerySyntaxError(message, tok.line, tok.column)

    def expect_keyword(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind != "keyword" or tok.value != word:
            self.error(f"expected {word.upper()}")
        return self.advance()

    def expect_ident(self, what: str) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            self.error(f"expected {what}")
        return str(self.advance().value)

    def parse_query(self) -> AnalyticalQuery:
        tok = self.peek()
        if tok.kind != "keyword":
            self.error("expected SELECT, TREE or PREDICT")
        if tok.value == "select":
            query = self.parse_select()
        elif tok.value == "tree":
            query = self.parse_tree()
        elif tok.value == "predict":
            query = self.parse_predict()
        else:
            self.error("expected SELECT, TREE or PREDICT")
        end = self.peek()
        if end.kind != "eof":
            self.error("unexpected trailing input", end)
        return query

    def parse_select(self) -> AnalyticalQuery:
        self.advance()
        return AnalyticalQuery(pattern=pat.RETRIEVE, filter=self.parse_optional_where())

    def parse_tree(self) -> AnalyticalQuery:
        self.advance()
        target_tok = self.peek()
        target = self.expect_ident("target attribute after TREE")
        self.check_categorical(target, "TREE target", target_tok)
        self.expect_keyword("by")
        group_by = [self.expect_ident("attribute after BY")]
        self.check_categorical(group_by[0], "BY attribute")
        while self.peek().kind == "comma":
            self.advance()
            tok = self.peek()
            attr = self.expect_ident("attribute after comma")
            self.check_categorical(attr, "BY attribute", tok)
            if attr in group_by:
                self.error(f"duplicate BY attribute: {attr}", tok)
            group_by.append(attr)
        return AnalyticalQuery(
            pattern=pat.TREE_INSIGHT,
            filter=self.parse_optional_where(),
            target=target,
            group_by=tuple(group_by),
        )

    def parse_predict(self) -> AnalyticalQuery:
        self.advance()
        tok = self.peek()
        keyword = self.expect_ident("prediction target after PREDICT")
        if keyword not in pat.KEYWORD_TO_PATTERN:
            known = ", ".join(sorted(pat.KEYWORD_TO_PATTERN))
            self.error(f"unknown prediction pattern {keyword!r} (one of: {known})", tok)
        pattern_id = pat.KEYWORD_TO_PATTERN[keyword]
        target = pat.pattern_spec(pattern_id).target
        if not self.schema.has_attribute(target):
            raise QueryValidationError(
                f"pattern {pattern_id} predicts attribute {target!r}, "
                "which this schema does not define"
            )
        self.expect_keyword("where")
        return AnalyticalQuery(
            pattern=pattern_id, filter=self.parse_conjunction(), target=target
        )

    def parse_optional_where(self) -> tuple[FilterTerm, ...]:
        tok = self.peek()
        if tok.kind == "keyword" and tok.value == "where":
            self.advance()
            return self.parse_conjunction()
        return ()

    def parse_conjunction(self) -> tuple[FilterTerm, ...]:
        terms = [self.parse_term()]
        while True:
            tok = self.peek()
            if tok.kind == "keyword" and tok.value == "and":
                self.advance()
                terms.append(self.parse_term())
            else:
                return tuple(terms)

    def parse_term(self) -> FilterTerm:
        attr_tok = self.peek()
        attr = self.expect_ident("attribute name")
        if not self.schema.has_attribute(attr):
            self.error(f"unknown attribute: {attr}", attr_tok)
        attr_def = self.schema.attribute(attr)
        cmp_tok = self.peek()
        if cmp_tok.kind != "cmp":
            self.error("expected comparator")
        comparator = str(self.advance().value)
        value_tok = self.peek()
        if value_tok.kind not in ("number", "string"):
            self.error("expected value literal")
        self.advance()
        value = value_tok.value
        self.check_term(attr_def, comparator, value, value_tok)
        return FilterTerm(attr, comparator, value)

    def check_term(self, attr_def, comparator, value, tok):
        if attr_def.is_categorical:
            if comparator in ORDER_COMPARATORS:
                self.error(
                    f"comparator {comparator} not allowed on categorical "
                    f"attribute {attr_def.name}",
                    tok,
                )
            if not isinstance(value, str):
                self.error(
                    f"type mismatch: attribute {attr_def.name} is categorical, "
                    f"got number {value}",
                    tok,
                )
            if value not in attr_def.vocabulary:
                self.error(
                    f"unknown value {value!r} for attribute {attr_def.name}", tok
                )
        else:
            if isinstance(value, str):
                self.error(
                    f"type mismatch: attribute {attr_def.name} is numeric, "
                    f"got string {value!r}",
                    tok,
                )
            if attr_def.kind == cat.NUMERIC_INTEGER and isinstance(value, float):
                self.error(
                    f"type mismatch: attribute {attr_def.name} takes integers, "
                    f"got {value}",
                    tok,
                )

    def check_categorical(self, attr: str, role: str, tok: _Token | None = None):
        if not self.schema.has_attribute(attr):
            self.error(f"unknown attribute: {attr}", tok)
        if not self.schema.attribute(attr).is_categorical:
            self.error(f"{role} must be categorical: {attr}", tok)


def parse(text: str, schema: GlobalSchema) -> AnalyticalQuery:
    """Parse query text into a validated IR.  Deterministic; see render()."""
    return _Parser(text, schema).parse_query()


def render(query: AnalyticalQuery) -> str:
    """Canonical single-line text such that parse(render(q)) == q."""
    parts: list[str] = []
    if query.pattern == pat.RETRIEVE:
        parts.append("SELECT")
    elif query.pattern == pat.TREE_INSIGHT:
        parts.append(f"TREE {query.target} BY {', '.join(query.group_by)}")
    else:
        keyword = pat.pattern_spec(query.pattern).keyword
        parts.append(f"PREDICT {keyword}")
    if query.filter:
        rendered = " AND ".join(
            f"{t.attribute} {t.comparator} {_render_value(t.value)}"
            for t in query.filter
        )
        parts.append(f"WHERE {rendered}")
    return " ".join(parts)


def _render_value(value) -> str:
    if isinstance(value, str):
        return f"'{value}'"
    return repr(value)


def plan(query: AnalyticalQuery, catalog: CatalogStore) -> QueryPlan:
    """Decompose a query into per-node sub-queries.

    Only nodes covering every referenced attribute participate; partial
    coverage would return supersets and break union equivalence.  Sub-query
    order is deterministic (sorted by node_id).
    """
    referenced = query.referenced_attributes()
    participating = [
        node_id
        for node_id in sorted(catalog.mappings)
        if catalog.mappings[node_id].covers(referenced)
    ]
    if not participating:
        missing = _least_covered(referenced, catalog)
        raise PlanError(
            f"query unanswerable: attribute {missing} not available at any node"
        )

    if query.pattern == pat.TREE_INSIGHT:
        aggregation = COUNT_TREE_MERGE
    elif query.pattern == pat.RETRIEVE:
        aggregation = ROW_UNION
    else:
        aggregation = MODEL_INFERENCE

    subqueries = []
    for node_id in participating:
        mapping = catalog.mappings[node_id]
        local = cat.to_local(query.filter, mapping, catalog.schema)
        if query.pattern == pat.TREE_INSIGHT:
            group_columns = tuple(
                mapping.columns[a] for a in (*query.group_by, query.target)
            )
            sq = LocalSubQuery(
                table=mapping.table,
                filter=local,
                mode=COUNT_BY,
                group_columns=group_columns,
            )
        else:
            sq = LocalSubQuery(table=mapping.table, filter=local, mode=SELECT_ROWS)
        subqueries.append((node_id, sq))
    return QueryPlan(query=query, subqueries=tuple(subqueries), aggregation=aggregation)


def _least_covered(referenced, catalog: CatalogStore) -> str:
    counts = {
        attr: sum(
            1 for m in catalog.mappings.values() if attr in m.covered_attributes
        )
        for attr in referenced
    }
    return min(counts, key=lambda a: (counts[a], a)) if counts else "<none>"
