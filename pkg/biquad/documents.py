"""Tensor documents (JSON) and edge lists (plain text): parsing, conversion, emission.

External indices are 1-based; they become 0-based only when a document is
turned into a BiquadraticTensor or an edge list into a BipartiteTwoGraph.

Edge list format::

    # comment
    m n
    i1 i2 j1 j2 [weight]
"""

from __future__ import annotations

import json
import logging
import math
from typing import TYPE_CHECKING

from pydantic import ValidationError

from biquad.graph import BipartiteTwoGraph, Edge, GraphError
from biquad.models import TensorDocument, TensorEntry
from biquad.tensor_core import BiquadraticTensor, DimensionError

if TYPE_CHECKING:
    from pathlib import Path

logger = logging.getLogger(__name__)


class DocumentParseError(Exception):
    """Malformed input text. ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def location(self) -> str:
        if self.line is None:
            return ""
        if self.column is None:
            return f"line {self.line}: "
        return f"line {self.line}, column {self.column}: "


def _validation_message(e: ValidationError) -> str:
    first = e.errors()[0]
    where = ".".join(str(part) for part in first["loc"])
    return f"{where}: {first['msg']}" if where else str(first["msg"])


def parse_tensor_document(text: str) -> TensorDocument:
    """Parse a TensorDocument, rejecting malformed JSON and duplicate index quadruples."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentParseError(f"invalid JSON: {e.msg}", e.lineno, e.colno) from e
    try:
        doc = TensorDocument.model_validate(data)
    except ValidationError as e:
        raise DocumentParseError(f"invalid tensor document: {_validation_message(e)}") from e

    seen: set[tuple[int, int, int, int]] = set()
    for k, entry in enumerate(doc.entries):
        if entry.key() in seen:
            raise DocumentParseError(f"entries.{k}: duplicate entry {entry.key()}")
        seen.add(entry.key())
    return doc


def read_tensor_document(path: Path) -> TensorDocument:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DocumentParseError(f"cannot read {path}: {e}") from e
    return parse_tensor_document(text)


def normalized(doc: TensorDocument) -> TensorDocument:
    """Same document with entries in lexicographic index order."""
    return doc.model_copy(update={"entries": sorted(doc.entries, key=TensorEntry.key)})


def serialize_document(doc: TensorDocument) -> str:
    return json.dumps(normalized(doc).model_dump(), indent=2) + "\n"


def document_to_tensor(doc: TensorDocument) -> BiquadraticTensor:
    """Dense tensor of a document; out-of-range indices raise DimensionError."""
    for entry in doc.entries:
        if entry.i1 > doc.m or entry.i2 > doc.m or entry.j1 > doc.n or entry.j2 > doc.n:
            raise DimensionError(
                f"entry {entry.key()} out of range for m={doc.m}, n={doc.n} (1-based)"
            )
    return BiquadraticTensor.from_entries(
        doc.m,
        doc.n,
        [(e.i1 - 1, e.j1 - 1, e.i2 - 1, e.j2 - 1, e.value) for e in doc.entries],
    )


def tensor_to_document(
    tensor: BiquadraticTensor, metadata: dict[str, str] | None = None
) -> TensorDocument:
    entries = [
        TensorEntry(i1=i1 + 1, j1=j1 + 1, i2=i2 + 1, j2=j2 + 1, value=value)
        for i1, j1, i2, j2, value in tensor.nonzero_entries()
    ]
    return TensorDocument(m=tensor.m, n=tensor.n, entries=entries, metadata=metadata or {})


def _token_columns(line: str) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with their 1-based starting columns."""
    tokens: list[tuple[str, int]] = []
    start: int | None = None
    for col, ch in enumerate(line + " "):
        if ch.isspace():
            if start is not None:
                tokens.append((line[start:col], start + 1))
                start = None
        elif start is None:
            start = col
    return tokens


def _parse_int(token: str, column: int, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise DocumentParseError(f"expected an integer, got {token!r}", lineno, column) from None


def parse_edge_list(text: str) -> BipartiteTwoGraph:
    """Parse an edge list. Out-of-range vertices raise DimensionError, not a parse error."""
    header: tuple[int, int] | None = None
    edges: list[Edge] = []
    seen: dict[tuple[tuple[int, int], tuple[int, int]], int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = _token_columns(line)
        if not tokens:
            continue

        if header is None:
            if len(tokens) != 2:
                raise DocumentParseError(
                    f"header must be 'm n', got {len(tokens)} fields", lineno, tokens[0][1]
                )
            m = _parse_int(*tokens[0], lineno)
            n = _parse_int(*tokens[1], lineno)
            for value, (_, column) in zip((m, n), tokens, strict=True):
                if value < 1:
                    raise DocumentParseError("vertex counts must be positive", lineno, column)
            header = (m, n)
            continue

        if len(tokens) not in (4, 5):
            raise DocumentParseError(
                f"edge line needs 'i1 i2 j1 j2 [weight]', got {len(tokens)} fields",
                lineno,
                tokens[0][1],
            )
        i1, i2, j1, j2 = (_parse_int(tok, col, lineno) for tok, col in tokens[:4])
        weight = 1.0
        if len(tokens) == 5:
            token, column = tokens[4]
            try:
                weight = float(token)
            except ValueError:
                raise DocumentParseError(
                    f"expected a weight, got {token!r}", lineno, column
                ) from None
            if not math.isfinite(weight):
                raise DocumentParseError(f"weight must be finite, got {token!r}", lineno, column)
        m, n = header
        for (token, column), value, bound, side in zip(
            tokens[:4], (i1, i2, j1, j2), (m, m, n, n), "SSTT", strict=True
        ):
            if not 1 <= value <= bound:
                raise DimensionError(
                    f"line {lineno}, column {column}: {side}-vertex {token} out of range 1..{bound}"
                )
        try:
            edge = Edge((i1 - 1, i2 - 1), (j1 - 1, j2 - 1), weight)
        except GraphError as e:
            raise DocumentParseError(e.message, lineno, tokens[0][1]) from e
        key = (edge.s_pair, edge.t_pair)
        if key in seen:
            raise DocumentParseError(
                f"duplicate edge (first given on line {seen[key]})", lineno, tokens[0][1]
            )
        seen[key] = lineno
        edges.append(edge)

    if header is None:
        raise DocumentParseError("edge list is empty; expected an 'm n' header", 1, 1)
    logger.debug("parsed edge list: m=%d n=%d, %d edges", header[0], header[1], len(edges))
    return BipartiteTwoGraph(header[0], header[1], tuple(edges))


def read_edge_list(path: Path) -> BipartiteTwoGraph:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DocumentParseError(f"cannot read {path}: {e}") from e
    return parse_edge_list(text)
