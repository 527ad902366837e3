import json
import logging

import numpy as np
import pandas as pd

from dataclasses import dataclass
from typing import Optional, TextIO, Union

from PythonScripts.FileManagement import extract_report_defaults
from PythonScripts.GeometryScripts import BatchGeometry as Bg
from PythonScripts.GeometryScripts.SimplexGeometry import DegenerateSimplexError, is_k_well_centered
from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.QualityScripts.EnergyConfig import EnergyConfig
from PythonScripts.QualityScripts.Energies import evaluate_energy


logger = logging.getLogger(__name__)


@dataclass
class QualityReport:
    """
    Distribution of angles (triangle meshes, degrees) or height ratios (tetrahedral meshes) with the count of
    cells that are not well-centered.

    :param quantity: "angle_degrees" or "height_ratio".
    :param histogram: DataFrame with columns bin_low, bin_high, count.
    :param bad_count: Number of cells that are not n-well-centered (nonacute triangles in 2D).
    :param bad_percent: 100·bad_count / cell_count.
    :param mean: Mean of the distribution.
    :param std: Population standard deviation of the distribution.
    :param min: Smallest value.
    :param max: Largest value.
    :param energy: Energy of the mesh under the report's EnergyConfig.
    """
    quantity: str
    dimension: int
    cell_count: int
    histogram: pd.DataFrame
    bad_count: int
    bad_percent: float
    mean: float
    std: float
    min: float
    max: float
    energy: float
    energy_label: str

    # _________________________Serialization_________________________
    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "dimension": self.dimension,
            "cell_count": self.cell_count,
            "histogram": {
                "bin_low": self.histogram["bin_low"].tolist(),
                "bin_high": self.histogram["bin_high"].tolist(),
                "count": [int(count) for count in self.histogram["count"]],
            },
            "bad_count": self.bad_count,
            "bad_percent": self.bad_percent,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "energy": self.energy,
            "energy_label": self.energy_label,
        }

    def to_json(self, destination: Union[str, TextIO, None] = None) -> str:
        """
        Serialize the report; also write it when a path or stream is given.
        """
        text = json.dumps(self.to_dict(), indent=2)
        if destination is None:
            return text

        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w") as json_file:
                json_file.write(text)

        return text

    def histogram_to_csv(self, destination: Union[str, TextIO, None] = None) -> Optional[str]:
        return self.histogram.to_csv(destination, index=False, columns=["bin_low", "bin_high", "count"])


def _bad_cells(mesh: SimplicialMesh) -> int:
    bad_count = 0
    for simplex in mesh.cell_coordinates:
        try:
            well_centered = is_k_well_centered(simplex, mesh.dimension)
        except DegenerateSimplexError:
            well_centered = False

        bad_count += not well_centered

    return bad_count


def quality_report(mesh: SimplicialMesh, config: EnergyConfig = None, bins: int = None) -> QualityReport:
    """
    Build the quality report of a mesh.

    In 2D the distribution is the 3·(cell count) triangle angles in degrees; in 3D it is the 4·(cell count)
    vertex height ratios h/R.

    :param mesh: Mesh to report on.
    :param config: Energy to evaluate alongside the statistics; the configured default when omitted.
    :param bins: Histogram bin count; 90 (angles) or 100 (height ratios) when omitted.
    :raises ValueError: If bins is not positive.
    """
    config = config or EnergyConfig()
    defaults = extract_report_defaults()

    if mesh.dimension == 2:
        values = np.degrees(Bg.triangle_angles(mesh.cell_coordinates)).ravel()
        quantity = "angle_degrees"
        bins = defaults["angle_bins"] if bins is None else bins
        value_range = tuple(defaults["angle_range"])
    else:
        values = Bg.height_ratio_table(mesh.cell_coordinates).ravel()
        quantity = "height_ratio"
        bins = defaults["height_ratio_bins"] if bins is None else bins
        value_range = tuple(defaults["height_ratio_range"])

    if int(bins) != bins or bins < 1:
        raise ValueError(f"Histogram bin count must be a positive integer, got {bins}")

    counts, edges = np.histogram(values, bins=int(bins), range=value_range)
    histogram = pd.DataFrame({"bin_low": edges[:-1], "bin_high": edges[1:], "count": counts})

    bad_count = _bad_cells(mesh)
    cell_count = mesh.cell_count
    has_values = values.size > 0

    report = QualityReport(
        quantity=quantity,
        dimension=mesh.dimension,
        cell_count=cell_count,
        histogram=histogram,
        bad_count=bad_count,
        bad_percent=100.0 * bad_count / cell_count if cell_count else 0.0,
        mean=float(np.mean(values)) if has_values else 0.0,
        std=float(np.std(values)) if has_values else 0.0,
        min=float(np.min(values)) if has_values else 0.0,
        max=float(np.max(values)) if has_values else 0.0,
        energy=evaluate_energy(mesh, config),
        energy_label=config.label,
    )
    logger.debug("Quality report: %d of %d cells not well-centered", bad_count, cell_count)
    return report
