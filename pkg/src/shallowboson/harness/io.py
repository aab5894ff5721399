"""Plain-text matrix files, circuit JSON and sample records."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..linalg import ComplexMatrix
from ..photonics import CircuitSpec


def parse_matrix(text: str) -> ComplexMatrix:
    """Header ``rows cols`` followed by row-major ``re im`` pairs."""
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("matrix file needs a 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != 2 * rows * cols:
        raise ValueError(f"expected {2 * rows * cols} numbers after the header, got {len(body)}")
    vals = np.array([float(x) for x in body]).reshape(rows, cols, 2)
    return ComplexMatrix(vals[..., 0] + 1j * vals[..., 1])


def read_matrix(path) -> ComplexMatrix:
    return parse_matrix(Path(path).read_text())


def format_matrix(m) -> str:
    a = np.asarray(m)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def write_matrix(path, m) -> None:
    Path(path).write_text(format_matrix(m))


def format_complex(z: complex) -> str:
    return f"{z.real:.17g} {z.imag:.17g}"


def read_circuit(path) -> CircuitSpec:
    return CircuitSpec.from_json(Path(path).read_text())


def sample_record(sample, seed: int, index: int) -> str:
    return json.dumps(
        {
            "r": list(sample.r),
            "occupation": list(sample.occupation),
            "alpha": list(sample.alpha),
            "seed": seed,
            "index": index,
        }
    )
