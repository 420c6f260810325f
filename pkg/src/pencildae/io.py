"""File formats for pencils, vectors and trajectories.

Pencil files are JSON objects ``{"n": ..., "E": [[...]], "A": [[...]], "mu": ...}``
where every entry is a ``[re, im]`` pair (plain numbers are accepted on
input); ``n`` and ``mu`` are optional.
Vector files are JSON arrays in the same entry format or plain text with one
entry per line.
"""

import csv
import json

import numpy as np

CSV_FLOAT = "{:.16e}"


def _entry(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex entry must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"matrix entry must be a number or [re, im], got {v!r}")
    return complex(v)


def decode_matrix(rows):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError("matrix must be a nonempty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix")
    M = np.array([[_entry(v) for v in r] for r in rows], dtype=complex)
    return M.real.copy() if not np.any(M.imag) else M


def encode_complex(z):
    z = complex(z)
    # adding 0.0 turns -0.0 into 0.0 so output text does not depend on zero signs
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def encode_matrix(M):
    return [[encode_complex(v) for v in row] for row in np.atleast_2d(M)]


def decode_vector(values):
    if not isinstance(values, list) or not values:
        raise ValueError("vector must be a nonempty list")
    v = np.array([_entry(x) for x in values], dtype=complex)
    return v.real.copy() if not np.any(v.imag) else v


def read_pencil(path):
    """Return ``(E, A, mu)`` with ``mu`` None when absent."""
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict) or "E" not in data or "A" not in data:
        raise ValueError("pencil file needs keys 'E' and 'A'")
    E, A = decode_matrix(data["E"]), decode_matrix(data["A"])
    if E.shape != A.shape or E.shape[0] != E.shape[1]:
        raise ValueError(f"E and A must be square of equal size, got {E.shape} and {A.shape}")
    if "n" in data and data["n"] != E.shape[0]:
        raise ValueError(f"declared n = {data['n']} but matrices are {E.shape[0]} x {E.shape[0]}")
    mu = _entry(data["mu"]) if data.get("mu") is not None else None
    return E, A, mu


def write_pencil(path, E, A, mu=None):
    data = {"n": int(np.shape(E)[0]), "E": encode_matrix(E), "A": encode_matrix(A)}
    if mu is not None:
        data["mu"] = encode_complex(mu)
    with open(path, "w") as f:
        json.dump(data, f)


def read_vector(path):
    with open(path) as f:
        text = f.read()
    stripped = text.strip()
    if stripped.startswith("["):
        return decode_vector(json.loads(stripped))
    values = [complex(tok.replace("i", "j")) for tok in stripped.split()]
    if not values:
        raise ValueError(f"empty vector file {path}")
    v = np.array(values)
    return v.real.copy() if not np.any(v.imag) else v


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_trajectory_csv(stream, times, states):
    """Columns ``t, re_x1, im_x1, ..., re_xn, im_xn`` with 17 significant digits."""
    states = np.asarray(states)
    n = states.shape[1]
    w = csv.writer(stream, lineterminator="\n")
    header = ["t"]
    for i in range(1, n + 1):
        header += [f"re_x{i}", f"im_x{i}"]
    w.writerow(header)
    for t, x in zip(times, states):
        row = [CSV_FLOAT.format(t)]
        for v in x:
            v = complex(v)
            row += [CSV_FLOAT.format(v.real), CSV_FLOAT.format(v.imag)]
        w.writerow(row)


def write_table_csv(stream, header, rows):
    """Rows of numbers; floats use 17 significant digits, ints stay integral."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([str(v) if isinstance(v, (int, np.integer)) else CSV_FLOAT.format(float(v))
                    for v in row])
