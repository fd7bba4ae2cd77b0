"""Tests for biquad/documents.py: tensor documents and edge lists."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from biquad.documents import (
    DocumentParseError,
    document_to_tensor,
    parse_edge_list,
    parse_tensor_document,
    read_edge_list,
    read_tensor_document,
    serialize_document,
    tensor_to_document,
)
from biquad.graph import adjacency_tensor
from biquad.tensor_core import BiquadraticTensor, DimensionError

EXAMPLE_DOC = """{
  "m": 2, "n": 2,
  "entries": [
    {"i1": 2, "j1": 2, "i2": 2, "j2": 2, "value": 2},
    {"i1": 1, "j1": 1, "i2": 1, "j2": 1, "value": 1},
    {"i1": 1, "j1": 2, "i2": 1, "j2": 2, "value": 3}
  ],
  "metadata": {"name": "example"}
}
"""


class TestTensorDocuments:
    def test_parse(self) -> None:
        doc = parse_tensor_document(EXAMPLE_DOC)
        assert (doc.m, doc.n) == (2, 2)
        assert len(doc.entries) == 3
        assert doc.metadata == {"name": "example"}

    def test_to_tensor_is_zero_based(self) -> None:
        t = document_to_tensor(parse_tensor_document(EXAMPLE_DOC))
        assert t.entries[0, 0, 0, 0] == 1.0
        assert t.entries[1, 1, 1, 1] == 2.0
        assert t.entries[0, 1, 0, 1] == 3.0
        assert t.entries.sum() == 6.0

    def test_serialize_is_canonical(self) -> None:
        first = serialize_document(parse_tensor_document(EXAMPLE_DOC))
        assert serialize_document(parse_tensor_document(first)) == first
        keys = [(e["i1"], e["j1"], e["i2"], e["j2"]) for e in json.loads(first)["entries"]]
        assert keys == sorted(keys)
        assert first.endswith("}\n")

    def test_tensor_to_document(self, example: BiquadraticTensor) -> None:
        doc = tensor_to_document(example, {"source": "test"})
        assert all(e.i1 >= 1 and e.j2 >= 1 for e in doc.entries)
        np.testing.assert_array_equal(document_to_tensor(doc).entries, example.entries)
        assert doc.metadata == {"source": "test"}

    def test_empty_entries(self) -> None:
        doc = parse_tensor_document('{"m": 3, "n": 1}')
        assert not document_to_tensor(doc).entries.any()

    def test_duplicate_entry(self) -> None:
        text = json.dumps(
            {
                "m": 2,
                "n": 2,
                "entries": [
                    {"i1": 1, "j1": 1, "i2": 1, "j2": 1, "value": 1.0},
                    {"i1": 1, "j1": 1, "i2": 1, "j2": 1, "value": 2.0},
                ],
            }
        )
        with pytest.raises(DocumentParseError, match="entries.1: duplicate"):
            parse_tensor_document(text)

    def test_malformed_json_has_location(self) -> None:
        with pytest.raises(DocumentParseError) as exc_info:
            parse_tensor_document('{\n  "m": 2,\n  "n": ,\n}')
        assert exc_info.value.line == 3
        assert exc_info.value.column is not None
        assert exc_info.value.location().startswith("line 3, column ")

    @pytest.mark.parametrize(
        "text",
        [
            '{"m": 0, "n": 2}',
            '{"m": 2}',
            '{"m": 2, "n": 2, "entries": [{"i1": 0, "j1": 1, "i2": 1, "j2": 1, "value": 1}]}',
            '{"m": 2, "n": 2, "entries": [{"i1": 1, "j1": 1, "i2": 1, "j2": 1, "value": "x"}]}',
            "[1, 2]",
        ],
    )
    def test_invalid_documents(self, text: str) -> None:
        with pytest.raises(DocumentParseError, match="invalid tensor document"):
            parse_tensor_document(text)

    def test_out_of_range_is_dimension_error(self) -> None:
        doc = parse_tensor_document(
            '{"m": 2, "n": 2, "entries": [{"i1": 3, "j1": 1, "i2": 1, "j2": 1, "value": 1}]}'
        )
        with pytest.raises(DimensionError):
            document_to_tensor(doc)

    def test_read_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(DocumentParseError, match="cannot read"):
            read_tensor_document(tmp_path / "missing.json")

    def test_read_file(self, tmp_path: Path) -> None:
        path = tmp_path / "t.json"
        path.write_text(EXAMPLE_DOC)
        assert read_tensor_document(path).metadata == {"name": "example"}


class TestEdgeLists:
    def test_single_edge(self) -> None:
        g = parse_edge_list("# one edge\n2 2\n1 2 1 2\n")
        assert (g.m, g.n) == (2, 2)
        assert len(g.edges) == 1
        assert g.edges[0].s_pair == (0, 1)
        assert g.edges[0].t_pair == (0, 1)
        assert g.edges[0].weight == 1.0
        assert len(adjacency_tensor(g).nonzero_entries()) == 4

    def test_weights_and_comments(self) -> None:
        g = parse_edge_list("3 2  # sizes\n\n1 3 2 1 0.5\n2 3 1 2 # unweighted\n")
        assert [e.weight for e in g.edges] == [0.5, 1.0]
        assert g.edges[0].t_pair == (0, 1)

    def test_header_only(self) -> None:
        g = parse_edge_list("2 3\n")
        assert g.edges == ()

    def test_empty_file(self) -> None:
        with pytest.raises(DocumentParseError, match="empty"):
            parse_edge_list("# nothing here\n")

    def test_bad_header(self) -> None:
        with pytest.raises(DocumentParseError) as exc_info:
            parse_edge_list("2 2 2\n")
        assert (exc_info.value.line, exc_info.value.column) == (1, 1)

    def test_non_integer_vertex(self) -> None:
        with pytest.raises(DocumentParseError) as exc_info:
            parse_edge_list("2 2\n1 x 1 2\n")
        assert (exc_info.value.line, exc_info.value.column) == (2, 3)

    def test_wrong_field_count(self) -> None:
        with pytest.raises(DocumentParseError, match="got 3 fields"):
            parse_edge_list("2 2\n1 2 1\n")

    @pytest.mark.parametrize("weight", ["nan", "inf", "heavy"])
    def test_bad_weight(self, weight: str) -> None:
        with pytest.raises(DocumentParseError) as exc_info:
            parse_edge_list(f"2 2\n1 2 1 2 {weight}\n")
        assert (exc_info.value.line, exc_info.value.column) == (2, 9)

    def test_negative_weight(self) -> None:
        with pytest.raises(DocumentParseError) as exc_info:
            parse_edge_list("2 2\n1 2 1 2 -1\n")
        assert exc_info.value.line == 2

    def test_repeated_vertex(self) -> None:
        with pytest.raises(DocumentParseError) as exc_info:
            parse_edge_list("2 2\n1 1 1 2\n")
        assert exc_info.value.line == 2

    def test_duplicate_edge(self) -> None:
        with pytest.raises(DocumentParseError, match="first given on line 2") as exc_info:
            parse_edge_list("2 2\n1 2 1 2\n2 1 2 1\n")
        assert exc_info.value.line == 3

    def test_out_of_range_vertex(self) -> None:
        with pytest.raises(DimensionError, match="line 2, column 5"):
            parse_edge_list("2 2\n1 2 3 1\n")

    def test_read_file(self, tmp_path: Path) -> None:
        path = tmp_path / "g.txt"
        path.write_text("2 2\n1 2 1 2\n")
        assert len(read_edge_list(path).edges) == 1
