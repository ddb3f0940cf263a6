"""Plain-text formats for classes, distributions, certificates and CSV outputs.

Class file::

    n k
    h(0) h(1) ... h(n-1)      one member per line

Distribution file: one probability per line (joint distributions x-major).

Tree file: header ``arity depth``, then one line per internal node in BFS
order, ``x e0 e1 ... e_{arity-1}``. Example trees use the same header with
arity 2 and lines ``x y``.

Set file: header ``set size``, then one line per point, ``x`` for VC
certificates or ``x f0 f1`` for Natarajan certificates.

Lines starting with ``#`` and blank lines are ignored everywhere.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .certificates import ExampleTree, MistakeTree, ShatteredSet, internal_count
from .core import Distribution, HypothesisClass
from .errors import ConfigError, LabError

CSV_VERSION = "v1"


def _lines(text: str) -> list[list[str]]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line.split())
    return out


def _ints(tokens: Sequence[str], where: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise ConfigError(f"{where}: expected integers, got {' '.join(tokens)!r}") from exc


def parse_class(text: str) -> HypothesisClass:
    rows = _lines(text)
    if not rows or len(rows[0]) != 2:
        raise ConfigError("class file must start with a line 'n k'")
    n, k = _ints(rows[0], "class header")
    members = [_ints(r, f"class member {i}") for i, r in enumerate(rows[1:])]
    try:
        return HypothesisClass(n, k, members)
    except LabError as exc:
        raise ConfigError(f"invalid class file: {exc}") from exc


def format_class(H: HypothesisClass) -> str:
    lines = [f"{H.n} {H.k}"] + [" ".join(map(str, h)) for h in H]
    return "\n".join(lines) + "\n"


def parse_distribution(text: str) -> Distribution:
    rows = _lines(text)
    try:
        probs = [float(t) for r in rows for t in r]
        return Distribution(probs)
    except (ValueError, LabError) as exc:
        raise ConfigError(f"invalid distribution file: {exc}") from exc


def format_distribution(D: Distribution) -> str:
    return "".join(f"{p!r}\n" for p in D.probs.tolist())


def format_tree(tree: MistakeTree) -> str:
    lines = [f"{tree.arity} {tree.depth}"]
    for x, edges in zip(tree.nodes.tolist(), tree.edges.tolist()):
        lines.append(" ".join(map(str, [x, *edges])))
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> MistakeTree:
    rows = _lines(text)
    if not rows or len(rows[0]) != 2:
        raise ConfigError("tree file must start with 'arity depth'")
    arity, depth = _ints(rows[0], "tree header")
    body = [_ints(r, f"tree node {i}") for i, r in enumerate(rows[1:])]
    if arity < 2 or len(body) != internal_count(arity, depth) or any(len(r) != arity + 1 for r in body):
        raise ConfigError(f"tree file does not describe a complete {arity}-ary tree of depth {depth}")
    return MistakeTree(arity, depth, [r[0] for r in body], [r[1:] for r in body])


def format_example_tree(tree: ExampleTree) -> str:
    lines = [f"2 {tree.depth}"] + [f"{x} {y}" for x, y in zip(tree.xs.tolist(), tree.ys.tolist())]
    return "\n".join(lines) + "\n"


def parse_example_tree(text: str) -> ExampleTree:
    rows = _lines(text)
    if not rows or _ints(rows[0], "example tree header")[0] != 2:
        raise ConfigError("example tree file must start with '2 depth'")
    depth = _ints(rows[0], "example tree header")[1]
    body = [_ints(r, f"example node {i}") for i, r in enumerate(rows[1:])]
    if len(body) != internal_count(2, depth) or any(len(r) != 2 for r in body):
        raise ConfigError("example tree file is not complete")
    return ExampleTree(depth, [r[0] for r in body], [r[1] for r in body])


def format_set(cert: ShatteredSet) -> str:
    lines = [f"set {cert.size}"]
    for i, x in enumerate(cert.points):
        lines.append(f"{x} {cert.f0[i]} {cert.f1[i]}" if cert.is_natarajan else f"{x}")
    return "\n".join(lines) + "\n"


def parse_set(text: str, natarajan: bool | None = None) -> ShatteredSet:
    rows = _lines(text)
    if not rows or rows[0][0] != "set":
        raise ConfigError("set file must start with 'set size'")
    size = _ints(rows[0][1:], "set header")[0]
    body = [_ints(r, f"set point {i}") for i, r in enumerate(rows[1:])]
    if len(body) != size:
        raise ConfigError(f"set header announces {size} points, file has {len(body)}")
    widths = {len(r) for r in body}
    nat = (widths == {3}) if natarajan is None else natarajan
    if body and widths != {3 if nat else 1}:
        raise ConfigError("set lines must all be 'x' or all be 'x f0 f1'")
    if nat:
        return ShatteredSet(tuple(r[0] for r in body), tuple(r[1] for r in body), tuple(r[2] for r in body))
    return ShatteredSet(tuple(r[0] for r in body))


def format_certificate(cert) -> str:
    if isinstance(cert, ShatteredSet):
        return format_set(cert)
    if isinstance(cert, MistakeTree):
        return format_tree(cert)
    if isinstance(cert, ExampleTree):
        return format_example_tree(cert)
    raise TypeError(f"no text format for {type(cert).__name__}")


def parse_certificate(text: str):
    rows = _lines(text)
    if rows and rows[0][0] == "set":
        return parse_set(text)
    return parse_tree(text)


def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def csv_text(kind: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV with a leading ``# qlearnlab-csv <version> <kind>`` comment line."""
    buf = io.StringIO()
    buf.write(f"# qlearnlab-csv {CSV_VERSION} {kind}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def read_csv(path) -> tuple[str, list[dict[str, str]]]:
    """Returns ``(kind, rows)``; rejects files without the versioned header."""
    text = read_text(path)
    first, _, rest = text.partition("\n")
    parts = first.split()
    if len(parts) != 4 or parts[:2] != ["#", "qlearnlab-csv"]:
        raise ConfigError(f"{path}: missing '# qlearnlab-csv' header line")
    if parts[2] != CSV_VERSION:
        raise ConfigError(f"{path}: unsupported CSV schema {parts[2]}")
    return parts[3], list(csv.DictReader(io.StringIO(rest)))


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
