"""Text file formats owned by the command-line interface.

All numeric data is written with 17 significant digits, which round-trips
IEEE doubles exactly, and every writer emits a canonical byte layout so
that parse followed by serialize reproduces a canonical file bit for bit.

Formats:

* Choi file (JSON): ``{"format": "choi-v1", "d": ..., "re": [[...]],
  "im": [[...]], "metadata": {...}}`` with ``re`` symmetric and ``im``
  antisymmetric (Hermiticity).
* Counts file (text): ``#`` header lines with d, n_prep, n_povm, N and
  seed, then ``i,j,n`` rows of normalized frequencies.
* Setup file (JSON): preparations and POVM elements in the Choi-file
  number format; overrides the minimal setup implied by the dimension.
* Benchmark CSV: one row per (d, N, method, trial) with a versioned
  header.
"""

from __future__ import annotations

import json

import numpy as np

from .channel import CountsTable, TomographySetup
from .errors import DomainError

CHOI_FORMAT = "choi-v1"
SETUP_FORMAT = "setup-v1"
COUNTS_FORMAT = "counts-v1"
BENCHMARK_HEADER = (
    "d,N,method,trial,seed,j_distance,final_cost,iterations,"
    "wall_time_s,heralded,status"
)
BENCHMARK_VERSION = "# qptomo-benchmark-v1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _matrix_rows(m: np.ndarray) -> str:
    rows = []
    for row in m:
        rows.append("[" + ", ".join(_fmt(v) for v in row) + "]")
    return "[" + ", ".join(rows) + "]"


def _matrix_block(mat: np.ndarray, indent: str = "") -> str:
    return (
        f'{indent}"re": {_matrix_rows(mat.real)},\n'
        f'{indent}"im": {_matrix_rows(mat.imag)}'
    )


def dump_choi(mat: np.ndarray, d: int, metadata: dict[str, str] | None = None) -> str:
    """Serialize a Choi matrix to the canonical JSON text."""
    mat = np.asarray(mat, dtype=complex)
    meta = json.dumps(
        {str(k): str(v) for k, v in (metadata or {}).items()}, sort_keys=True
    )
    return (
        "{\n"
        f'"format": "{CHOI_FORMAT}",\n'
        f'"d": {d},\n'
        f"{_matrix_block(mat)},\n"
        f'"metadata": {meta}\n'
        "}\n"
    )


def _parse_matrix(doc: dict, d2: int, what: str) -> np.ndarray:
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc["im"], dtype=float)
    if re.shape != (d2, d2) or im.shape != (d2, d2):
        raise DomainError(f"{what}: matrix blocks must be {d2}x{d2}")
    return re + 1j * im


def load_choi(text: str, hermiticity_tol: float = 1e-6) -> tuple[np.ndarray, int, dict]:
    """Parse a Choi file; returns (matrix, d, metadata)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise DomainError(f"not valid JSON: {err}") from err
    if doc.get("format") != CHOI_FORMAT:
        raise DomainError(f"expected format {CHOI_FORMAT!r}, got {doc.get('format')!r}")
    d = int(doc["d"])
    mat = _parse_matrix(doc, d * d, "Choi file")
    if np.abs(mat - mat.conj().T).max() > hermiticity_tol:
        raise DomainError(
            f"matrix is not Hermitian within {hermiticity_tol:g}"
        )
    return mat, d, dict(doc.get("metadata", {}))


def dump_counts(counts: CountsTable, d: int, n_samples, seed) -> str:
    """Serialize a counts table; ``n_samples`` None means infinite data."""
    n_prep, n_povm = counts.n.shape
    n_str = "inf" if n_samples is None else str(int(n_samples))
    seed_str = "none" if seed is None else str(int(seed))
    lines = [
        f"# {COUNTS_FORMAT}",
        f"# d={d} n_prep={n_prep} n_povm={n_povm} N={n_str} seed={seed_str}",
        "i,j,n",
    ]
    for i in range(n_prep):
        for j in range(n_povm):
            lines.append(f"{i},{j},{_fmt(counts.n[i, j])}")
    return "\n".join(lines) + "\n"


def load_counts(text: str) -> tuple[CountsTable, dict]:
    """Parse a counts file; returns (table, header fields)."""
    lines = text.splitlines()
    if len(lines) < 4 or lines[0].strip() != f"# {COUNTS_FORMAT}":
        raise DomainError(f"not a {COUNTS_FORMAT} file")
    header: dict[str, str] = {}
    for item in lines[1].lstrip("# ").split():
        key, _, value = item.partition("=")
        header[key] = value
    try:
        d = int(header["d"])
        n_prep = int(header["n_prep"])
        n_povm = int(header["n_povm"])
    except (KeyError, ValueError) as err:
        raise DomainError(f"bad counts header: {err}") from err
    if lines[2].strip() != "i,j,n":
        raise DomainError("missing i,j,n column line")
    n = np.zeros((n_prep, n_povm))
    for line in lines[3:]:
        line = line.strip()
        if not line:
            continue
        try:
            i_s, j_s, v_s = line.split(",")
            n[int(i_s), int(j_s)] = float(v_s)
        except (ValueError, IndexError) as err:
            raise DomainError(f"bad counts row {line!r}: {err}") from err
    table = CountsTable(n)  # validates row normalization
    info = {"d": d, "n_prep": n_prep, "n_povm": n_povm}
    info["N"] = None if header.get("N") == "inf" else int(header["N"])
    info["seed"] = None if header.get("seed") in (None, "none") else int(header["seed"])
    return table, info


def dump_setup(setup: TomographySetup) -> str:
    """Serialize preparations and POVM elements."""
    parts = []
    for op in setup.preparations:
        parts.append("{\n" + _matrix_block(np.asarray(op)) + "\n}")
    preps = "[" + ",\n".join(parts) + "]"
    parts = []
    for op in setup.povm:
        parts.append("{\n" + _matrix_block(np.asarray(op)) + "\n}")
    povm = "[" + ",\n".join(parts) + "]"
    return (
        "{\n"
        f'"format": "{SETUP_FORMAT}",\n'
        f'"d": {setup.d},\n'
        f'"preparations": {preps},\n'
        f'"povm": {povm}\n'
        "}\n"
    )


def load_setup(text: str) -> TomographySetup:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise DomainError(f"not valid JSON: {err}") from err
    if doc.get("format") != SETUP_FORMAT:
        raise DomainError(f"expected format {SETUP_FORMAT!r}, got {doc.get('format')!r}")
    d = int(doc["d"])
    preps = [_parse_matrix(item, d, "setup preparation") for item in doc["preparations"]]
    povm = [_parse_matrix(item, d, "setup POVM element") for item in doc["povm"]]
    return TomographySetup(preps, povm)


def benchmark_row(
    d: int,
    n_samples,
    method: str,
    trial: int,
    seed: int,
    j_dist: float | None,
    final_cost: float | None,
    iterations: int | None,
    wall_time_s: float | None,
    heralded: bool | None,
    status: str,
) -> str:
    """Format one benchmark CSV row; None fields are left empty."""
    n_str = "inf" if n_samples is None else str(int(n_samples))
    return ",".join(
        [
            str(d),
            n_str,
            method,
            str(trial),
            str(seed),
            "" if j_dist is None else _fmt(j_dist),
            "" if final_cost is None else _fmt(final_cost),
            "" if iterations is None else str(int(iterations)),
            "" if wall_time_s is None else _fmt(wall_time_s),
            "" if heralded is None else ("true" if heralded else "false"),
            status,
        ]
    )


def dump_benchmark(rows: list[str]) -> str:
    return "\n".join([BENCHMARK_VERSION, BENCHMARK_HEADER, *rows]) + "\n"
