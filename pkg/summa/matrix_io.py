"""Matrix and vector-family files.

Matrix, JSON::

    {"rows": 2, "cols": 2, "data": [1, 1, 1, -1]}

``data`` is row-major and holds exactly rows*cols numbers.

Matrix, CSV: one matrix row per line, entries separated by commas and
optional spaces. Blank lines and lines whose first non-blank character is
``#`` are skipped. Every row must have the same number of entries.

Family, JSON::

    {"space": {"dim": 2, "p": "inf"}, "vectors": [[1, 0], [0, 1]]}

``p`` is a number or the string "inf" (also "2", "1.5" as strings).

Errors carry the 1-based line and column of the offending token; for
structurally valid JSON with wrong contents the position of the document
start is reported together with the failing field.
"""

import json
import logging
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from summa.errors import MatrixFormatError
from summa.linalg import Exponent, SpaceSpec
from summa.sequences import VectorFamily

logger = logging.getLogger(__name__)


class MatrixFile(BaseModel):
    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    data: list[float]

    @model_validator(mode="after")
    def _count(self) -> "MatrixFile":
        if len(self.data) != self.rows * self.cols:
            raise ValueError(f"data has {len(self.data)} entries, expected rows*cols = {self.rows * self.cols}")
        return self


class _SpaceEntry(BaseModel):
    dim: int = Field(..., ge=1)
    p: Union[float, str] = Field(..., description="Exponent, number or 'inf'")


class FamilyFile(BaseModel):
    space: _SpaceEntry
    vectors: list[list[float]]


def parse_exponent_flag(text: str) -> Exponent:
    """'linf', 'l1', 'l2', 'inf', '1.5' -> Exponent."""
    s = str(text).strip().lower()
    if s.startswith("l"):
        s = s[1:]
    return Exponent.of(s)


def _load_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise MatrixFormatError(e.msg, line=e.lineno, column=e.colno, source=source) from e


def _validation_message(e: ValidationError) -> str:
    err = e.errors()[0]
    loc = ".".join(str(x) for x in err.get("loc", ()))
    return f"{loc}: {err.get('msg')}" if loc else str(err.get("msg"))


def parse_matrix_json(text: str, source: str = "<input>") -> np.ndarray:
    raw = _load_json(text, source)
    try:
        mf = MatrixFile.model_validate(raw)
    except ValidationError as e:
        raise MatrixFormatError(_validation_message(e), source=source) from e
    return np.array(mf.data, dtype=float).reshape(mf.rows, mf.cols)


def parse_matrix_csv(text: str, source: str = "<input>") -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        row = []
        col = 1
        for cell in line.split(","):
            token = cell.strip()
            column = col + (len(cell) - len(cell.lstrip()))
            try:
                row.append(float(token))
            except ValueError:
                raise MatrixFormatError(f"not a number: {token!r}", line=lineno, column=column, source=source)
            col += len(cell) + 1
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixFormatError(f"row has {len(row)} entries, expected {width}", line=lineno, column=1, source=source)
        rows.append(row)
    if not rows:
        raise MatrixFormatError("no matrix rows found", source=source)
    return np.array(rows, dtype=float)


def load_matrix(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        a = parse_matrix_csv(text, source=str(path))
    else:
        a = parse_matrix_json(text, source=str(path))
    if not np.all(np.isfinite(a)):
        raise MatrixFormatError("matrix has non-finite entries", source=str(path))
    logger.debug("loaded matrix %s shape=%s", path, a.shape)
    return a


def parse_family_json(text: str, source: str = "<input>") -> VectorFamily:
    raw = _load_json(text, source)
    try:
        ff = FamilyFile.model_validate(raw)
        space = SpaceSpec.lp(ff.space.dim, ff.space.p)
        vectors = np.array(ff.vectors, dtype=float).reshape(len(ff.vectors), -1) if ff.vectors else np.zeros((0, space.dim))
        return VectorFamily(space=space, vectors=vectors)
    except ValidationError as e:
        raise MatrixFormatError(_validation_message(e), source=source) from e
    except ValueError as e:
        raise MatrixFormatError(str(e), source=source) from e


def load_family(path: Union[str, Path]) -> VectorFamily:
    path = Path(path)
    return parse_family_json(path.read_text(encoding="utf-8"), source=str(path))


def matrix_to_json(a: np.ndarray) -> str:
    a = np.asarray(a, dtype=float)
    return json.dumps({"rows": a.shape[0], "cols": a.shape[1], "data": a.ravel().tolist()})
