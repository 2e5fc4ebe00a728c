"""Versioned JSON/CSV persistence.

``complex.v1``: {"schema", "p", "q", "dims", "gram"?, "d01", "d10", "d2m1"},
each component a mapping "u,v" -> dense row-major nested list.  Floats are
written with Python's shortest round-trip repr, so load(save(C)) is
bit-exact.  ``results.v1`` wraps a command result with its configuration
and a timestamp that is ignored by :func:`canonical_report`.
"""
from __future__ import annotations

import csv
import datetime as _dt
import io as _io
import json
import os
import sys
import tempfile
from typing import Any

import numpy as np

from .complex import BigradedComplex
from .errors import InvalidInput

COMPLEX_SCHEMA = "complex.v1"
RESULTS_SCHEMA = "results.v1"
REQUIRED_KEYS = ("schema", "p", "q", "dims", "d01", "d10", "d2m1")
CSV_COLUMNS = ("r", "i", "h", "lambda")


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory and os.replace."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _key(u, v) -> str:
    return f"{u},{v}"


def _parse_key(s: str, name: str):
    try:
        u, v = (int(x) for x in s.split(","))
    except ValueError:
        raise InvalidInput(f"{name}: bad bidegree key {s!r} (expected 'u,v')") from None
    return u, v


def complex_to_dict(C: BigradedComplex) -> dict:
    doc: dict[str, Any] = {
        "schema": COMPLEX_SCHEMA,
        "p": C.p,
        "q": C.q,
        "dims": C.dims.tolist(),
    }
    for name, comp in (("d01", C.d01), ("d10", C.d10), ("d2m1", C.d2m1)):
        doc[name] = {_key(u, v): M.tolist() for (u, v), M in sorted(comp.items()) if M.size and np.any(M)}
    if not C.has_identity_gram():
        doc["gram"] = {_key(u, v): G.tolist() for (u, v), G in sorted(C.gram.items()) if G.size}
    return doc


def _matrix(value, name, key, shape):
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInput(f"{name}[{key}] is not a numeric matrix") from None
    if M.size == 0:
        M = M.reshape(shape)
    return M


def complex_from_dict(doc) -> BigradedComplex:
    if not isinstance(doc, dict):
        raise InvalidInput("complex document must be a JSON object")
    if "schema" in doc and doc["schema"] != COMPLEX_SCHEMA:
        raise InvalidInput(f"unknown schema version {doc['schema']!r} (expected {COMPLEX_SCHEMA!r})")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise InvalidInput(f"missing key '{key}' in {COMPLEX_SCHEMA} document")
    try:
        p, q = int(doc["p"]), int(doc["q"])
    except (TypeError, ValueError):
        raise InvalidInput("p and q must be integers") from None
    dims = np.asarray(doc["dims"])
    if dims.shape != (q + 1, p + 1):
        raise InvalidInput(f"dims must have shape {(q + 1, p + 1)}")
    comps = {}
    shifts = {"d01": (0, 1), "d10": (1, 0), "d2m1": (2, -1)}
    for name, (du, dv) in shifts.items():
        block = doc[name]
        if not isinstance(block, dict):
            raise InvalidInput(f"{name} must map 'u,v' keys to matrices")
        comps[name] = {}
        for key, value in block.items():
            u, v = _parse_key(key, name)
            tu, tv = u + du, v + dv
            rows = int(dims[tu, tv]) if 0 <= tu <= q and 0 <= tv <= p else 0
            cols = int(dims[u, v]) if 0 <= u <= q and 0 <= v <= p else 0
            comps[name][(u, v)] = _matrix(value, name, key, (rows, cols))
    gram = None
    if doc.get("gram") is not None:
        gram = {}
        for key, value in doc["gram"].items():
            u, v = _parse_key(key, "gram")
            n = int(dims[u, v]) if 0 <= u <= q and 0 <= v <= p else 0
            gram[(u, v)] = _matrix(value, "gram", key, (n, n))
    return BigradedComplex(p, q, dims, comps["d01"], comps["d10"], comps["d2m1"], gram)


def save_complex(C: BigradedComplex, path) -> None:
    atomic_write(path, dumps(complex_to_dict(C)))


def parse_complex(text: str) -> BigradedComplex:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return complex_from_dict(doc)


def load_complex(path) -> BigradedComplex:
    if path in (None, "-"):
        return parse_complex(sys.stdin.read())
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    return parse_complex(text)


# -- results.v1 ---------------------------------------------------------------


def _plain(obj):
    """Recursively convert numpy scalars/arrays and tuple keys into JSON-ready values."""
    if isinstance(obj, dict):
        return {(_key(*k) if isinstance(k, tuple) else str(k)): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def results_document(command: str, config: dict, result: dict, passed: bool, timestamp: str | None = None) -> dict:
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return {
        "schema": RESULTS_SCHEMA,
        "command": command,
        "timestamp": timestamp,
        "config": _plain(config),
        "pass": bool(passed),
        "result": _plain(result),
    }


def save_results(doc: dict, path) -> None:
    atomic_write(path, dumps(doc))


def load_results(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != RESULTS_SCHEMA:
        raise InvalidInput(f"unknown schema version {doc.get('schema')!r} (expected {RESULTS_SCHEMA!r})")
    return doc


def canonical_report(doc: dict) -> str:
    """Serialized report with the timestamp removed, for determinism comparisons."""
    return dumps({k: v for k, v in doc.items() if k != "timestamp"})


# -- branch CSV -------------------------------------------------------------------


def branches_csv(sw) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r, i, h, lam in sw.csv_rows():
        w.writerow([r, i, repr(h), repr(lam)])
    return buf.getvalue()


def save_branches_csv(sw, path) -> None:
    atomic_write(path, branches_csv(sw))


def parse_branches_csv(text: str):
    """Rebuild an AdiabaticSweep (grid, degrees, branch values) from CSV text.

    The CSV carries no operator norms, so ``scale`` is the largest stored
    eigenvalue per h; it equals ‖Δ_h‖ when all branches were saved.
    """
    from .adiabatic import AdiabaticSweep

    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise InvalidInput(f"branch CSV must start with header {','.join(CSV_COLUMNS)}")
    data = {}
    hs = []
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 4:
            raise InvalidInput(f"line {line_no}: expected 4 columns")
        try:
            r, i, h, lam = int(row[0]), int(row[1]), float(row[2]), float(row[3])
        except ValueError:
            raise InvalidInput(f"line {line_no}: non-numeric entry") from None
        data[(r, i, h)] = lam
        if h not in hs:
            hs.append(h)
    h_grid = np.array(hs)
    degrees = sorted({r for r, _, _ in data})
    values, scale = {}, {}
    for r in degrees:
        nb = 1 + max(i for rr, i, _ in data if rr == r)
        M = np.zeros((h_grid.size, nb))
        for j, h in enumerate(hs):
            for i in range(nb):
                if (r, i, h) not in data:
                    raise InvalidInput(f"missing entry r={r} i={i} h={h}")
                M[j, i] = data[(r, i, h)]
        values[r] = M
        scale[r] = M.max(axis=1) if nb else np.zeros(h_grid.size)
    return AdiabaticSweep(h_grid=h_grid, degrees=degrees, values=values, scale=scale)


def load_branches_csv(path):
    with open(path, newline="") as fh:
        return parse_branches_csv(fh.read())
