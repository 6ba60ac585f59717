import numpy as np
import pytest

from summa.errors import MatrixFormatError
from summa.matrix_io import (
    load_family,
    load_matrix,
    matrix_to_json,
    parse_exponent_flag,
    parse_family_json,
    parse_matrix_csv,
    parse_matrix_json,
)


def test_parse_matrix_json():
    a = parse_matrix_json('{"rows": 2, "cols": 3, "data": [1, 2, 3, 4, 5, 6]}')
    assert a.shape == (2, 3)
    assert a[1, 0] == 4.0


def test_matrix_json_wrong_entry_count():
    with pytest.raises(MatrixFormatError) as e:
        parse_matrix_json('{"rows": 2, "cols": 2, "data": [1, 2, 3]}', source="m.json")
    assert "expected rows*cols = 4" in str(e.value)
    assert str(e.value).startswith("m.json:1:1:")


def test_matrix_json_syntax_error_position():
    with pytest.raises(MatrixFormatError) as e:
        parse_matrix_json('{"rows": 2,\n "cols": x}', source="bad.json")
    assert e.value.line == 2
    assert e.value.column == 10
    assert str(e.value).startswith("bad.json:2:10:")


def test_parse_matrix_csv_skips_comments_and_blanks():
    text = "# a comment\n1, 2\n\n  # another\n3,4\n"
    assert np.array_equal(parse_matrix_csv(text), [[1.0, 2.0], [3.0, 4.0]])


def test_matrix_csv_bad_token_position():
    with pytest.raises(MatrixFormatError) as e:
        parse_matrix_csv("1, 2\n3, x\n")
    assert e.value.line == 2
    assert e.value.column == 4


def test_matrix_csv_ragged_rows():
    with pytest.raises(MatrixFormatError) as e:
        parse_matrix_csv("1,2,3\n4,5\n")
    assert e.value.line == 2


def test_matrix_csv_empty():
    with pytest.raises(MatrixFormatError):
        parse_matrix_csv("# nothing here\n")


def test_load_matrix_by_suffix(tmp_path):
    csv_path = tmp_path / "a.csv"
    csv_path.write_text("1,0\n0,1\n", encoding="utf-8")
    json_path = tmp_path / "a.json"
    json_path.write_text(matrix_to_json(np.eye(2)), encoding="utf-8")
    assert np.array_equal(load_matrix(csv_path), np.eye(2))
    assert np.array_equal(load_matrix(json_path), np.eye(2))


def test_load_matrix_rejects_non_finite(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("1,nan\n", encoding="utf-8")
    with pytest.raises(MatrixFormatError):
        load_matrix(path)


def test_load_matrix_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_matrix(tmp_path / "missing.json")


def test_parse_family_json():
    fam = parse_family_json('{"space": {"dim": 2, "p": "inf"}, "vectors": [[1, 0], [0, 1]]}')
    assert fam.space.exp.is_inf
    assert fam.size == 2

    empty = parse_family_json('{"space": {"dim": 3, "p": 1.5}, "vectors": []}')
    assert empty.size == 0
    assert empty.vectors.shape == (0, 3)


def test_family_json_errors(tmp_path):
    with pytest.raises(MatrixFormatError):
        parse_family_json('{"space": {"dim": 2, "p": 2}, "vectors": [[1, 2, 3]]}')
    with pytest.raises(MatrixFormatError):
        parse_family_json('{"space": {"dim": 2, "p": 0.5}, "vectors": []}')
    with pytest.raises(MatrixFormatError):
        parse_family_json('{"space": {"dim": 2}, "vectors": []}')
    path = tmp_path / "fam.json"
    path.write_text('{"space": {"dim": 1, "p": "2"}, "vectors": [[1], [2]]}', encoding="utf-8")
    assert load_family(path).size == 2


@pytest.mark.parametrize(
    "flag, expected",
    [("linf", float("inf")), ("l1", 1.0), ("L2", 2.0), ("inf", float("inf")), ("1.5", 1.5)],
)
def test_parse_exponent_flag(flag, expected):
    assert parse_exponent_flag(flag).value == expected
