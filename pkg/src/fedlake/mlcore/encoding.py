"""One-hot design-matrix encoding driven by the global schema.

Column order follows the schema's attribute order, so every node in the
federation produces geometrically identical matrices: categorical
attributes expand to one indicator column per vocabulary entry (in
vocabulary order) and numeric attributes pass through as a single column
min-max scaled by the schema range.  That width equality is the silent
precondition parameter averaging relies on.
"""

from __future__ import annotations

import numpy as np

from ..catalog import GlobalSchema


class EncodingError(Exception):
    pass


def encoded_width(schema: GlobalSchema, features) -> int:
    """Design-matrix width: sum of vocabulary sizes plus one per numeric."""
    width = 0
    for name in features:
        attr = schema.attribute(name)
        width += len(attr.vocabulary) if attr.is_categorical else 1
    return width


def feature_columns(schema: GlobalSchema, features) -> list[str]:
    """Human-readable column labels in encoding order."""
    labels: list[str] = []
    for name in features:
        attr = schema.attribute(name)
        if attr.is_categorical:
            labels.extend(f"{name}={v}" for v in attr.vocabulary)
        else:
            labels.append(name)
    return labels


def one_hot_encode(rows, schema: GlobalSchema, features) -> np.ndarray:
    """Encode globally-translated rows into a float design matrix.

    Rows are mappings from attribute name to value.  An out-of-vocabulary
    categorical cell is a hard error: result translation upstream should
    have made it impossible.
    """
    rows = list(rows)
    width = encoded_width(schema, features)
    X = np.zeros((len(rows), width), dtype=float)
    for i, row in enumerate(rows):
        col = 0
        for name in features:
            attr = schema.attribute(name)
            try:
                value = row[name]
            except KeyError:
                raise EncodingError(f"row {i}: missing attribute {name}") from None
            if attr.is_categorical:
                try:
                    offset = attr.vocabulary.index(value)
                except ValueError:
                    raise EncodingError(
                        f"row {i}: value {value!r} not in vocabulary of {name}"
                    ) from None
                X[i, col + offset] = 1.0
                col += len(attr.vocabulary)
            else:
                if attr.range is None:
                    raise EncodingError(
                        f"attribute {name} has no range; cannot min-max scale"
                    )
                lo, hi = attr.range
                value = float(value)
                if not np.isfinite(value):
                    raise EncodingError(f"row {i}: non-finite value for {name}")
                X[i, col] = (value - lo) / (hi - lo)
                col += 1
    return X
