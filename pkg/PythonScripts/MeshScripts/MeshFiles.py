import os
import io
import logging

import numpy as np

from enum import Enum
from typing import Iterator, List, Optional, TextIO, Tuple, Union

from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh


logger = logging.getLogger(__name__)

PathOrStream = Union[str, os.PathLike, TextIO, Tuple[TextIO, TextIO]]


class MeshFormat(Enum):
    TRIANGLE = "triangle_node_ele"
    OFF = "off"
    TETGEN = "tetgen_node_ele"


class ParseError(ValueError):
    """
    Raised for malformed mesh files. Carries the 1-based line and column of the offending token.
    """

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


# _________________________Tokenizing_________________________
def _token_lines(stream: TextIO) -> Iterator[Tuple[int, List[Tuple[int, str]]]]:
    """
    Yield (line number, [(column, token), ...]) for every line holding data, with '#' comments removed.
    """
    for line_number, raw_line in enumerate(stream, start=1):
        content = raw_line.split("#", 1)[0]
        tokens = []
        column = 0
        for piece in content.split():
            column = content.index(piece, column)
            tokens.append((column + 1, piece))
            column += len(piece)

        if tokens:
            yield line_number, tokens


class _TokenReader:
    def __init__(self, stream: TextIO, source_name: str):
        self._lines = _token_lines(stream)
        self.source_name = source_name
        self.line = 0

    def next_line(self, minimum_tokens: int, what: str) -> List[Tuple[int, str]]:
        try:
            self.line, tokens = next(self._lines)
        except StopIteration:
            raise ParseError(f"{self.source_name}: unexpected end of file while reading {what}", self.line + 1, 1)

        if len(tokens) < minimum_tokens:
            last_column = tokens[-1][0] + len(tokens[-1][1])
            raise ParseError(
                f"{self.source_name}: {what} needs {minimum_tokens} values, found {len(tokens)}", self.line, last_column
            )

        return tokens

    def as_int(self, token: Tuple[int, str]) -> int:
        column, text = token
        try:
            return int(text)
        except ValueError:
            raise ParseError(f"{self.source_name}: expected an integer, found {text!r}", self.line, column)

    def as_float(self, token: Tuple[int, str]) -> float:
        column, text = token
        try:
            value = float(text)
        except ValueError:
            raise ParseError(f"{self.source_name}: expected a number, found {text!r}", self.line, column)

        if not np.isfinite(value):
            raise ParseError(f"{self.source_name}: coordinate {text!r} is not finite", self.line, column)

        return value


# _________________________Node / Ele_________________________
def _read_node(stream: TextIO) -> Tuple[np.ndarray, Optional[np.ndarray], int]:
    """
    Parse a Triangle/TetGen .node file.

    :return: (coordinates, boundary markers or None, index base)
    """
    # Header: vertex count, dimension, attribute count, marker flag
    reader = _TokenReader(stream, ".node")
    header = reader.next_line(2, "the header")
    vertex_count, dimension = reader.as_int(header[0]), reader.as_int(header[1])
    attribute_count = reader.as_int(header[2]) if len(header) > 2 else 0
    marker_count = reader.as_int(header[3]) if len(header) > 3 else 0
    if dimension not in (2, 3):
        raise ParseError(f".node: dimension must be 2 or 3, got {dimension}", reader.line, header[1][0])

    coordinates = np.empty((vertex_count, dimension))
    markers = np.empty(vertex_count, dtype=np.int64) if marker_count > 0 else None
    base = 0
    for position in range(vertex_count):
        tokens = reader.next_line(1 + dimension + attribute_count + marker_count, f"vertex {position}")
        index = reader.as_int(tokens[0])
        # The first vertex fixes the index base
        if position == 0:
            if index not in (0, 1):
                raise ParseError(f".node: first vertex index must be 0 or 1, got {index}", reader.line, tokens[0][0])
            base = index

        if index != position + base:
            raise ParseError(f".node: expected vertex index {position + base}, got {index}", reader.line, tokens[0][0])

        coordinates[position] = [reader.as_float(token) for token in tokens[1:1 + dimension]]
        if markers is not None:
            markers[position] = reader.as_int(tokens[1 + dimension + attribute_count])

    return coordinates, markers, base


def _read_ele(stream: TextIO, dimension: int, base: int, vertex_count: int) -> np.ndarray:
    reader = _TokenReader(stream, ".ele")
    header = reader.next_line(2, "the header")
    cell_count, corners = reader.as_int(header[0]), reader.as_int(header[1])
    attribute_count = reader.as_int(header[2]) if len(header) > 2 else 0
    if corners != dimension + 1:
        raise ParseError(f".ele: expected {dimension + 1} corners per cell, got {corners}", reader.line, header[1][0])

    cells = np.empty((cell_count, corners), dtype=np.int64)
    for position in range(cell_count):
        tokens = reader.next_line(1 + corners + attribute_count, f"cell {position}")
        index = reader.as_int(tokens[0])
        if position == 0 and index != base:
            logger.warning(".ele numbering starts at %d but .node numbering starts at %d", index, base)

        for corner, token in enumerate(tokens[1:1 + corners]):
            reference = reader.as_int(token) - base
            if not 0 <= reference < vertex_count:
                raise IndexError(
                    f".ele line {reader.line}, column {token[0]}: vertex {reference + base} does not exist"
                )
            cells[position, corner] = reference

    return cells


def _check_markers(mesh: SimplicialMesh, markers: Optional[np.ndarray]) -> None:
    if markers is None:
        return

    mismatched = np.flatnonzero((markers != 0) != mesh.boundary_vertex)
    if len(mismatched):
        logger.warning(
            "Boundary markers disagree with facet incidence for %d vertices (first: %d); using facet incidence",
            len(mismatched), int(mismatched[0]),
        )


def _node_ele_paths(path: Union[str, os.PathLike]) -> Tuple[str, str]:
    base, extension = os.path.splitext(os.fspath(path))
    if extension.lower() not in (".node", ".ele"):
        base = os.fspath(path)

    return f"{base}.node", f"{base}.ele"


def _load_node_ele(source: PathOrStream, expected_dimension: Optional[int]) -> SimplicialMesh:
    if isinstance(source, tuple):
        node_stream, ele_stream = source
        coordinates, markers, base = _read_node(node_stream)
        cells = _read_ele(ele_stream, coordinates.shape[1], base, len(coordinates))
    else:
        node_path, ele_path = _node_ele_paths(source)
        with open(node_path, "r") as node_stream:
            coordinates, markers, base = _read_node(node_stream)

        with open(ele_path, "r") as ele_stream:
            cells = _read_ele(ele_stream, coordinates.shape[1], base, len(coordinates))

    if expected_dimension is not None and coordinates.shape[1] != expected_dimension:
        raise ParseError(f".node: expected dimension {expected_dimension}, got {coordinates.shape[1]}", 1, 1)

    mesh = SimplicialMesh.from_arrays(coordinates, cells)
    _check_markers(mesh, markers)
    return mesh


# _________________________OFF_________________________
def _read_off(stream: TextIO) -> SimplicialMesh:
    reader = _TokenReader(stream, ".off")
    tokens = reader.next_line(1, "the OFF keyword")
    if tokens[0][1] != "OFF":
        raise ParseError(f".off: expected 'OFF', found {tokens[0][1]!r}", reader.line, tokens[0][0])

    counts = tokens[1:] if len(tokens) >= 4 else reader.next_line(3, "the counts line")
    vertex_count, face_count = reader.as_int(counts[0]), reader.as_int(counts[1])

    coordinates = np.empty((vertex_count, 3))
    for position in range(vertex_count):
        coordinates[position] = [reader.as_float(token) for token in reader.next_line(3, f"vertex {position}")[:3]]

    faces = np.empty((face_count, 3), dtype=np.int64)
    for position in range(face_count):
        tokens = reader.next_line(4, f"face {position}")
        if reader.as_int(tokens[0]) != 3:
            raise ParseError(".off: only triangular faces are supported", reader.line, tokens[0][0])

        for corner, token in enumerate(tokens[1:4]):
            reference = reader.as_int(token)
            if not 0 <= reference < vertex_count:
                raise IndexError(f".off line {reader.line}, column {token[0]}: vertex {reference} does not exist")
            faces[position, corner] = reference

    if np.any(coordinates[:, 2] != 0.0):
        raise ParseError(".off: planar meshes must store z = 0", reader.line, 1)

    return SimplicialMesh.from_arrays(coordinates[:, :2], faces)


# _________________________Public Interface_________________________
def detect_format(path: Union[str, os.PathLike]) -> MeshFormat:
    """
    Guess the format from the file extension; node/ele pairs are resolved to Triangle or TetGen by dimension.
    """
    extension = os.path.splitext(os.fspath(path))[1].lower()
    if extension == ".off":
        return MeshFormat.OFF

    node_path, _ = _node_ele_paths(path)
    with open(node_path, "r") as node_stream:
        _, tokens = next(_token_lines(node_stream), (0, [(1, "0"), (1, "2")]))

    return MeshFormat.TETGEN if len(tokens) > 1 and tokens[1][1] == "3" else MeshFormat.TRIANGLE


def load_mesh(source: PathOrStream, mesh_format: Union[MeshFormat, str, None] = None) -> SimplicialMesh:
    """
    Read a mesh from disk or from text streams.

    :param source: A path (for node/ele pairs, either file or the shared base name), an OFF text stream, or a
                   (node stream, ele stream) pair.
    :param mesh_format: MeshFormat or its string value; detected from the path when omitted.
    :return: A validated SimplicialMesh with boundary flags recomputed from facet incidence.
    :raises ParseError: On malformed input.
    :raises TopologyError: If a facet is shared by more than two cells.
    :raises IndexError: If a cell references a missing vertex.
    """
    detected_pair = False
    if mesh_format is None:
        if isinstance(source, tuple):
            mesh_format = MeshFormat.TRIANGLE
            detected_pair = True
        elif isinstance(source, io.IOBase):
            mesh_format = MeshFormat.OFF
        else:
            mesh_format = detect_format(source)

    mesh_format = MeshFormat(mesh_format)
    if mesh_format is MeshFormat.OFF:
        if isinstance(source, (str, os.PathLike)):
            with open(source, "r") as stream:
                return _read_off(stream)

        return _read_off(source)

    expected_dimension = 2 if mesh_format is MeshFormat.TRIANGLE else 3
    if detected_pair:
        expected_dimension = None

    return _load_node_ele(source, expected_dimension)


def _write_node(mesh: SimplicialMesh, stream: TextIO) -> None:
    stream.write(f"{mesh.vertex_count} {mesh.vertices.shape[1]} 0 1\n")
    for index, (point, marker) in enumerate(zip(mesh.vertices.tolist(), mesh.boundary_vertex.tolist()), start=1):
        coordinates = " ".join(repr(float(value)) for value in point)
        stream.write(f"{index} {coordinates} {int(marker)}\n")


def _write_ele(mesh: SimplicialMesh, stream: TextIO) -> None:
    stream.write(f"{mesh.cell_count} {mesh.dimension + 1} 0\n")
    for index, cell in enumerate(mesh.cells.tolist(), start=1):
        corners = " ".join(str(vertex + 1) for vertex in cell)
        stream.write(f"{index} {corners}\n")


def _write_off(mesh: SimplicialMesh, stream: TextIO) -> None:
    if mesh.dimension != 2:
        raise ValueError("OFF output is limited to planar triangle meshes")

    stream.write("OFF\n")
    stream.write(f"{mesh.vertex_count} {mesh.cell_count} 0\n")
    for x, y in mesh.vertices.tolist():
        stream.write(f"{x!r} {y!r} 0.0\n")

    for a, b, c in mesh.cells.tolist():
        stream.write(f"3 {a} {b} {c}\n")


def save_mesh(mesh: SimplicialMesh, destination: PathOrStream,
              mesh_format: Union[MeshFormat, str, None] = None) -> None:
    """
    Write a mesh with shortest round-trip float formatting.

    Node/ele output is 1-based with one boundary-marker column, following Triangle's defaults.

    :param mesh: The mesh to write.
    :param destination: Path (base name for node/ele pairs), OFF text stream, or (node stream, ele stream).
    :param mesh_format: Output format; OFF for .off paths, otherwise Triangle/TetGen by mesh dimension.
    :raises ValueError: If the format cannot hold the mesh.
    :raises OSError: If the destination cannot be written.
    """
    if mesh_format is None:
        is_off_path = isinstance(destination, (str, os.PathLike)) and os.fspath(destination).lower().endswith(".off")
        if is_off_path or isinstance(destination, io.IOBase):
            mesh_format = MeshFormat.OFF
        else:
            mesh_format = MeshFormat.TRIANGLE if mesh.dimension == 2 else MeshFormat.TETGEN

    mesh_format = MeshFormat(mesh_format)
    if mesh_format is MeshFormat.OFF:
        if isinstance(destination, (str, os.PathLike)):
            with open(destination, "w") as stream:
                _write_off(mesh, stream)
        else:
            _write_off(mesh, destination)
        return

    expected_dimension = 2 if mesh_format is MeshFormat.TRIANGLE else 3
    if mesh.dimension != expected_dimension:
        raise ValueError(f"{mesh_format.value} stores {expected_dimension}D meshes, got a {mesh.dimension}D mesh")

    if isinstance(destination, tuple):
        node_stream, ele_stream = destination
        _write_node(mesh, node_stream)
        _write_ele(mesh, ele_stream)
        return

    node_path, ele_path = _node_ele_paths(destination)
    with open(node_path, "w") as node_stream:
        _write_node(mesh, node_stream)

    with open(ele_path, "w") as ele_stream:
        _write_ele(mesh, ele_stream)
