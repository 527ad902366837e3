import io
import math
import logging

import matplotlib
import numpy as np

from dataclasses import dataclass
from matplotlib.figure import Figure
from typing import TextIO, Tuple, Union

from PythonScripts.FileManagement import extract_render_defaults
from PythonScripts.GeometryScripts import BatchGeometry as Bg
from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.QualityScripts.QualityReport import QualityReport


logger = logging.getLogger(__name__)

_defaults = extract_render_defaults()

SVG_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'
SVG_NAMESPACE = "http://www.w3.org/2000/svg"


@dataclass(frozen=True)
class RenderStyle:
    """
    Grayscale shading of triangles by their largest angle.

    :param shade_anchors: Lightness (0 black, 1 white) at 60°, just below 90°, at 90° and at 180°. Lightness is
        constant below 60° and linear between anchors, so it never increases with the angle and drops
        discontinuously at 90°.
    """
    image_size: int = _defaults["image_size"]
    margin: float = _defaults["margin"]
    edge_stroke: bool = _defaults["edge_stroke"]
    stroke_width: float = _defaults["stroke_width"]
    shade_anchors: Tuple[float, float, float, float] = tuple(_defaults["shade_anchors"])
    histogram_height: int = _defaults["histogram_height"]

    def __post_init__(self):
        object.__setattr__(self, "shade_anchors", tuple(float(value) for value in self.shade_anchors))
        if self.image_size <= 2 * self.margin or self.margin < 0:
            raise ValueError(f"Image size {self.image_size} leaves no room inside a margin of {self.margin}")

        if self.stroke_width < 0:
            raise ValueError(f"Stroke width must be non-negative, got {self.stroke_width}")

        anchors = self.shade_anchors
        if len(anchors) != 4 or any(not 0.0 <= value <= 1.0 for value in anchors):
            raise ValueError(f"Expected four shade anchors in [0, 1], got {anchors}")

        if not anchors[0] >= anchors[1] > anchors[2] >= anchors[3]:
            raise ValueError(f"Shade anchors must darken with the angle and jump at 90 degrees, got {anchors}")

    @classmethod
    def named(cls, name: str) -> "RenderStyle":
        """
        "default", "outline" (default with thicker edges) or "fill" (no edges).
        """
        styles = {
            "default": cls(),
            "outline": cls(stroke_width=2.0 * _defaults["stroke_width"]),
            "fill": cls(edge_stroke=False),
        }
        if name not in styles:
            raise ValueError(f"Unknown render style {name!r}; expected one of {sorted(styles)}")

        return styles[name]

    # _________________________Shading_________________________
    def lightness(self, max_angle: float) -> float:
        """
        :param max_angle: Largest angle of a triangle, in radians.
        """
        acute_light, acute_dark, right_light, flat_dark = self.shade_anchors
        degrees = math.degrees(max_angle)
        if max_angle >= math.pi / 2:
            return right_light + (flat_dark - right_light) * min(degrees - 90.0, 90.0) / 90.0

        if degrees <= 60.0:
            return acute_light

        return acute_light + (acute_dark - acute_light) * (degrees - 60.0) / 30.0

    def fill(self, max_angle: float) -> str:
        level = int(round(255.0 * self.lightness(max_angle)))
        return f"rgb({level},{level},{level})"


def _number(value: float) -> str:
    text = f"{value:.3f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def _write(text: str, destination: Union[str, TextIO, None]) -> str:
    if destination is None:
        return text

    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="\n") as svg_file:
            svg_file.write(text)

    return text


# _________________________Mesh_________________________
def render_mesh(mesh: SimplicialMesh, destination: Union[str, TextIO, None] = None,
                style: RenderStyle = None) -> str:
    """
    SVG drawing of a triangle mesh, each triangle filled by the shade of its largest angle.

    The drawing keeps the mesh's aspect ratio: the longer side of the bounding box spans image_size - 2·margin
    pixels and the y axis points up.

    :param destination: Optional path or stream that receives the SVG text.
    :return: The SVG document.
    :raises ValueError: For tetrahedral meshes or meshes without cells.
    """
    style = style or RenderStyle()
    if mesh.dimension != 2:
        raise ValueError("Only triangle meshes can be rendered")

    if mesh.cell_count == 0:
        raise ValueError("Cannot render a mesh without cells")

    used = mesh.vertices[np.unique(mesh.cells)]
    lower, upper = used.min(axis=0), used.max(axis=0)
    extent = float((upper - lower).max())
    scale = (style.image_size - 2.0 * style.margin) / extent if extent > 0.0 else 1.0
    width = 2.0 * style.margin + (upper[0] - lower[0]) * scale
    height = 2.0 * style.margin + (upper[1] - lower[1]) * scale

    to_x = lambda x: style.margin + (x - lower[0]) * scale
    to_y = lambda y: style.margin + (upper[1] - y) * scale
    max_angles = Bg.triangle_angles(mesh.cell_coordinates).max(axis=1)

    lines = [
        SVG_HEADER,
        f'<svg xmlns="{SVG_NAMESPACE}" width="{_number(width)}" height="{_number(height)}" '
        f'viewBox="0 0 {_number(width)} {_number(height)}">\n',
    ]
    if style.edge_stroke:
        lines.append(f'<g stroke="black" stroke-width="{_number(style.stroke_width)}" stroke-linejoin="round">\n')
    else:
        lines.append('<g stroke="none">\n')

    for cell, max_angle in zip(mesh.cells, max_angles):
        points = " ".join(f"{_number(to_x(x))},{_number(to_y(y))}" for x, y in mesh.vertices[cell])
        lines.append(f'<polygon points="{points}" fill="{style.fill(max_angle)}"/>\n')

    lines += ["</g>\n", "</svg>\n"]
    logger.debug("Rendered %d triangles at scale %.6g", mesh.cell_count, scale)
    return _write("".join(lines), destination)


# _________________________Histogram_________________________
HISTOGRAM_RC = {"svg.hashsalt": "well-centered", "svg.fonttype": "none"}


def render_histogram(report: QualityReport, destination: Union[str, TextIO, None] = None,
                     style: RenderStyle = None) -> str:
    """
    Bar chart of a QualityReport histogram, annotated with the distribution's minimum and maximum, its mean and
    standard deviation and the percentage of bad cells. Dashed lines mark the minimum and maximum.

    The figure is saved without a date and with a fixed id salt, so identical reports give identical SVG text.
    """
    style = style or RenderStyle()
    unit = "°" if report.quantity == "angle_degrees" else ""
    annotation = (f"min {report.min:.2f}{unit}  max {report.max:.2f}{unit}  "
                  f"μ {report.mean:.2f}  σ {report.std:.2f}  "
                  f"bad {report.bad_count} ({report.bad_percent:.2f}%)")

    lows = report.histogram["bin_low"].to_numpy(dtype=float)
    highs = report.histogram["bin_high"].to_numpy(dtype=float)
    counts = report.histogram["count"].to_numpy(dtype=float)

    with matplotlib.rc_context(HISTOGRAM_RC):
        figure = Figure(figsize=(style.image_size / 100.0, style.histogram_height / 100.0), dpi=100,
                        tight_layout=True)
        ax = figure.add_subplot()
        if len(counts):
            edges = np.append(lows, highs[-1])
            ax.hist(0.5 * (lows + highs), bins=edges, weights=counts, color="gray", edgecolor="black",
                    linewidth=style.stroke_width)

        for extreme in (report.min, report.max):
            if np.isfinite(extreme):
                ax.axvline(extreme, color="black", linestyle="--", linewidth=max(style.stroke_width, 0.5))

        ax.set_xlabel("angle (degrees)" if unit else "h/R", fontsize=8)
        ax.set_ylabel("cells", fontsize=8)
        ax.tick_params(labelsize=7)
        ax.set_title(annotation, fontsize=8)

        buffer = io.StringIO()
        figure.savefig(buffer, format="svg", metadata={"Date": None})

    logger.debug("Rendered a %d-bin %s histogram", len(counts), report.quantity)
    return _write(buffer.getvalue(), destination)
