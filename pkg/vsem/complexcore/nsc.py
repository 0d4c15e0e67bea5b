"""NSC text format for simplicial complexes and vertex maps.

Mesh file::

    nsc 1
    dim <k> ambient <n>
    vertices <N>
    <n floats>            (N lines, 17 significant digits)
    simplices <m>
    <k+1 indices>         (m lines, 1-based)
    density <m>           (optional block; absent means density 1)
    <float>               (m lines)

Map file: same two header lines with k == n, then ``maps <N>`` and N
coordinate lines. Maps carry no simplices; they are paired with a mesh.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from vsem.complexcore.simplicial import (
    MeasuredComplex,
    PiecewiseAffineMap,
    SimplicialComplex,
    check_nondegenerate,
    normalize_orientation,
)
from vsem.errors import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    MalformedHeaderError,
    MeshFormatError,
)

logger = logging.getLogger(__name__)

MAGIC = "nsc"
VERSION = 1


@dataclass(frozen=True, eq=False)
class MeshRecord:
    complex: SimplicialComplex
    density: np.ndarray | None
    orientation_flips: int

    def measured(self) -> MeasuredComplex:
        return MeasuredComplex(self.complex, self.density)


def _format_float(value: float) -> str:
    return format(float(value), ".17g")


class _Lines:
    """Cursor over the non-empty lines of a file, tracking 1-based line numbers."""

    def __init__(self, text: str):
        self._lines = [(no, line.split()) for no, line in enumerate(text.split("\n"), start=1)]
        self._lines = [(no, tokens) for no, tokens in self._lines if tokens]
        self._pos = 0

    def done(self) -> bool:
        return self._pos >= len(self._lines)

    def peek_keyword(self) -> str | None:
        return None if self.done() else self._lines[self._pos][1][0]

    def next(self, what: str) -> tuple[int, list[str]]:
        if self.done():
            raise MalformedHeaderError(f"unexpected end of file while reading {what}")
        item = self._lines[self._pos]
        self._pos += 1
        return item

    def keyword(self, name: str) -> tuple[int, int]:
        no, tokens = self.next(f"'{name}' header")
        if len(tokens) != 2 or tokens[0] != name:
            raise MalformedHeaderError(f"expected '{name} <count>', got {' '.join(tokens)!r}", no)
        try:
            count = int(tokens[1])
        except ValueError:
            raise MalformedHeaderError(f"'{name}' count is not an integer: {tokens[1]!r}", no)
        if count < 0:
            raise MalformedHeaderError(f"'{name}' count is negative", no)
        return no, count

    def block(self, count: int, width: int, dtype, what: str) -> np.ndarray:
        rows = []
        for _ in range(count):
            no, tokens = self.next(what)
            if len(tokens) != width:
                raise DimensionMismatchError(
                    f"{what} row has {len(tokens)} entries, expected {width}", no
                )
            try:
                rows.append([dtype(t) for t in tokens])
            except ValueError:
                raise MeshFormatError(f"{what} row is not numeric: {' '.join(tokens)!r}", no)
        return np.array(rows, dtype=np.float64 if dtype is float else np.int64).reshape(count, width)


def _read_header(lines: _Lines) -> tuple[int, int]:
    no, tokens = lines.next("magic line")
    if tokens != [MAGIC, str(VERSION)]:
        raise MalformedHeaderError(f"expected '{MAGIC} {VERSION}', got {' '.join(tokens)!r}", no)
    no, tokens = lines.next("dimension line")
    if len(tokens) != 4 or tokens[0] != "dim" or tokens[2] != "ambient":
        raise MalformedHeaderError(f"expected 'dim <k> ambient <n>', got {' '.join(tokens)!r}", no)
    try:
        k, n = int(tokens[1]), int(tokens[3])
    except ValueError:
        raise MalformedHeaderError("dimensions must be integers", no)
    if n < 1 or not 0 <= k <= n:
        raise DimensionMismatchError(f"invalid dimensions k={k}, n={n}", no)
    return k, n


def parse_mesh(text: str, normalize: bool = True, validate: bool = True) -> MeshRecord:
    lines = _Lines(text)
    k, n = _read_header(lines)
    _, n_vertices = lines.keyword("vertices")
    vertices = lines.block(n_vertices, n, float, "vertex")
    no, n_simplices = lines.keyword("simplices")
    simplices = lines.block(n_simplices, k + 1, int, "simplex")
    if simplices.size and (simplices.min() < 1 or simplices.max() > n_vertices):
        bad = int(simplices.max() if simplices.max() > n_vertices else simplices.min())
        raise IndexOutOfRangeError(f"simplex index {bad} outside [1, {n_vertices}]", no)
    density = None
    if lines.peek_keyword() == "density":
        no, count = lines.keyword("density")
        if count != n_simplices:
            raise DimensionMismatchError(
                f"density block has {count} entries, mesh has {n_simplices} simplices", no
            )
        density = lines.block(count, 1, float, "density").reshape(-1)
    if not lines.done():
        no, tokens = lines.next("trailing data")
        raise MalformedHeaderError(f"unexpected trailing content {' '.join(tokens)!r}", no)

    complex = SimplicialComplex(vertices, simplices - 1)
    flips = 0
    if normalize:
        complex, flips = normalize_orientation(complex)
    if validate:
        check_nondegenerate(complex)
    return MeshRecord(complex, density, flips)


def read_mesh_record(path) -> MeshRecord:
    path = Path(path)
    record = parse_mesh(path.read_text(encoding="utf-8"))
    logger.info(
        f"Read mesh {path}: k={record.complex.top_dim}, n={record.complex.ambient_dim}, "
        f"N={record.complex.n_vertices}, m={record.complex.n_simplices}, "
        f"orientation flips={record.orientation_flips}."
    )
    return record


def read_mesh(path) -> SimplicialComplex:
    return read_mesh_record(path).complex


def format_mesh(complex: SimplicialComplex, density=None) -> str:
    out = [
        f"{MAGIC} {VERSION}",
        f"dim {complex.top_dim} ambient {complex.ambient_dim}",
        f"vertices {complex.n_vertices}",
    ]
    out.extend(" ".join(_format_float(x) for x in row) for row in complex.vertices)
    out.append(f"simplices {complex.n_simplices}")
    out.extend(" ".join(str(int(i) + 1) for i in row) for row in complex.simplices)
    if density is not None:
        density = np.asarray(density, dtype=np.float64).reshape(-1)
        if density.size != complex.n_simplices:
            raise DimensionMismatchError("density length differs from simplex count")
        out.append(f"density {density.size}")
        out.extend(_format_float(x) for x in density)
    return "\n".join(out) + "\n"


def write_mesh(path, complex: SimplicialComplex, density=None) -> None:
    path = Path(path)
    path.write_text(format_mesh(complex, density), encoding="utf-8", newline="\n")
    logger.info(f"Wrote mesh {path} (N={complex.n_vertices}, m={complex.n_simplices}).")


def format_map(fmap: PiecewiseAffineMap) -> str:
    n = fmap.images.shape[1]
    out = [f"{MAGIC} {VERSION}", f"dim {n} ambient {n}", f"maps {fmap.n_vertices}"]
    out.extend(" ".join(_format_float(x) for x in row) for row in fmap.images)
    return "\n".join(out) + "\n"


def parse_map(text: str) -> PiecewiseAffineMap:
    lines = _Lines(text)
    k, n = _read_header(lines)
    if k != n:
        raise DimensionMismatchError(f"map files need dim == ambient, got {k} != {n}")
    _, count = lines.keyword("maps")
    images = lines.block(count, n, float, "map")
    if not lines.done():
        no, tokens = lines.next("trailing data")
        raise MalformedHeaderError(f"unexpected trailing content {' '.join(tokens)!r}", no)
    return PiecewiseAffineMap(images)


def write_map(path, fmap: PiecewiseAffineMap) -> None:
    Path(path).write_text(format_map(fmap), encoding="utf-8", newline="\n")


def read_map(path) -> PiecewiseAffineMap:
    return parse_map(Path(path).read_text(encoding="utf-8"))
