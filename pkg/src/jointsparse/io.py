"""Dense complex CSV and compact JSON formats for matrices and joint signals.

Complex numbers are written as ``re+imi`` (for example ``0.5-1.25i``) using
the shortest round-trip float representation, so a write/read cycle is exact.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Union

import numpy as np

from .core import JointSignal, Support, support_of

PathLike = Union[str, Path]


def format_complex(z: complex) -> str:
    z = complex(z)
    im = repr(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{z.real!r}{im}i"


def parse_complex(text: str) -> complex:
    s = text.strip()
    if not s.endswith("i"):
        return complex(float(s), 0.0)
    body = s[:-1]
    # split at the last sign that is not a leading sign or part of an exponent
    for pos in range(len(body) - 1, 0, -1):
        if body[pos] in "+-" and body[pos - 1] not in "eE":
            return complex(float(body[:pos]), float(body[pos:]))
    raise ValueError(f"cannot parse complex value {text!r}")


def matrix_to_csv(M) -> str:
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M[:, None]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in M:
        writer.writerow([format_complex(z) for z in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ValueError("empty matrix file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged rows in matrix file")
    return np.array([[parse_complex(c) for c in r] for r in rows], dtype=complex)


def save_matrix_csv(M, path: PathLike) -> None:
    Path(path).write_text(matrix_to_csv(M), encoding="utf-8")


def load_matrix_csv(path: PathLike) -> np.ndarray:
    return matrix_from_csv(Path(path).read_text(encoding="utf-8"))


def signal_to_json(X: JointSignal) -> str:
    """Compact JSON ``{n_rows, n_cols, support, values}``.

    ``values`` lists only the rows in the support, each as ``[[re, im], ...]``.
    """
    S = X.declared_support if X.declared_support is not None else support_of(X)
    values = [[[z.real, z.imag] for z in X.entries[j]] for j in S]
    doc = {"n_rows": X.N, "n_cols": X.L, "support": list(S.indices), "values": values}
    return json.dumps(doc)


def signal_from_json(text: str) -> JointSignal:
    doc = json.loads(text)
    N, L = int(doc["n_rows"]), int(doc["n_cols"])
    S = Support.from_iterable(doc["support"])
    values = doc["values"]
    if len(values) != len(S):
        raise ValueError("number of value rows does not match the support size")
    X = np.zeros((N, L), dtype=complex)
    for j, row in zip(S, values):
        if len(row) != L:
            raise ValueError("value row has the wrong number of channels")
        X[j] = [complex(re, im) for re, im in row]
    return JointSignal(X, S)


def signal_to_csv(X: JointSignal) -> str:
    return matrix_to_csv(X.entries)


def signal_from_csv(text: str) -> JointSignal:
    return JointSignal(matrix_from_csv(text))
