import os
import re
import sys
import json
import logging
import argparse
import itertools

from typing import List, Optional, Sequence, Tuple

from PythonScripts.FileManagement import output_directory_path
from PythonScripts.GeometryScripts.SimplexGeometry import (
    DegenerateSimplexError, equatorial_ball_test, equatorial_margin, is_k_well_centered
)
from PythonScripts.MeshScripts.SimplicialMesh import SimplicialMesh
from PythonScripts.MeshScripts.MeshFiles import MeshFormat, load_mesh, save_mesh
from PythonScripts.QualityScripts.EnergyConfig import EnergyConfig, EnergyFamily
from PythonScripts.QualityScripts.QualityReport import quality_report
from PythonScripts.OptimizationScripts.ConjugateGradient import OptimizationSettings, optimize_schedule
from PythonScripts.OptimizationScripts.LaplacianSmoothing import laplacian_smooth
from PythonScripts.ConnectivityScripts.EdgeFlips import repair_connectivity_2d
from PythonScripts.ConnectivityScripts.LonelyVertices import find_lonely_vertices
from PythonScripts.RenderingScripts.SvgRenderer import RenderStyle, render_histogram, render_mesh
from PythonScripts.VerificationScripts.TheoremSuites import run_all_suites


logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_PROPERTY_FAILS = 1
EXIT_ERROR = 2

# Relative equatorial margin below which the two well-centeredness tests may disagree in floating point.
ORACLE_MARGIN = 1e-8

_STAGE_PATTERN = re.compile(r"(~?)E(\d+|inf):(\d+)")


class ScheduleError(ValueError):
    """Raised for schedule strings that do not follow the E<p>:<iterations> grammar."""


class OracleDisagreement(RuntimeError):
    """Raised when the barycentric and equatorial-ball tests disagree on a clearly decidable simplex."""


# _________________________Parsing_________________________
def parse_schedule(text: str) -> Tuple[Tuple[EnergyConfig, int], ...]:
    """
    Parse a comma separated list of stages such as "E4:500,E6:500,~E10:500".

    A leading tilde selects the barrier energy, "Einf" the maximum deviation energy. An empty string is the
    empty schedule.

    :raises ScheduleError: For malformed stages or invalid powers.
    """
    text = text.strip()
    if not text:
        return ()

    stages = []
    for item in text.split(","):
        match = _STAGE_PATTERN.fullmatch(item.strip())
        if match is None:
            raise ScheduleError(f"Cannot parse schedule stage {item!r}; expected e.g. 'E4:500' or '~E10:500'")

        tilde, power, iterations = match.groups()
        try:
            if power == "inf":
                if tilde:
                    raise ScheduleError("The barrier energy needs a finite power")
                config = EnergyConfig(family=EnergyFamily.Einfty)
            else:
                family = EnergyFamily.EpWithBarrier if tilde else EnergyFamily.Ep
                config = EnergyConfig(family=family, p=int(power))
        except ScheduleError:
            raise
        except ValueError as error:
            raise ScheduleError(f"Invalid schedule stage {item!r}: {error}") from error

        stages.append((config, int(iterations)))

    return tuple(stages)


def parse_dimensions(text: Optional[str], mesh: SimplicialMesh) -> List[int]:
    if text is None:
        return [mesh.dimension]

    dimensions = sorted({int(token) for token in re.split(r"[,\s]+", text.strip()) if token})
    for k in dimensions:
        if not 1 <= k <= mesh.dimension:
            raise ValueError(f"Face dimension {k} is outside [1, {mesh.dimension}]")

    return dimensions


def parse_free_vertices(text: Optional[str]) -> Optional[Tuple[int, ...]]:
    """
    A comma separated list of vertex indices, or the path of a file listing them.
    """
    if text is None:
        return None

    if os.path.isfile(text):
        with open(text, "r") as vertex_file:
            text = vertex_file.read()

    return tuple(int(token) for token in re.split(r"[,\s]+", text.strip()) if token)


# _________________________Helpers_________________________
def _load(arguments) -> SimplicialMesh:
    return load_mesh(arguments.mesh, arguments.format)


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _default_output(mesh_path: str, suffix: str, extension: Optional[str] = None) -> str:
    stem, original_extension = os.path.splitext(os.path.basename(mesh_path))
    os.makedirs(output_directory_path(), exist_ok=True)
    return os.path.join(output_directory_path(), f"{stem}_{suffix}{extension or original_extension}")


def _artifact_base(output_path: str) -> str:
    base, extension = os.path.splitext(output_path)
    return base if extension.lower() in (".off", ".node", ".ele") else output_path


def _passes(simplex, k: int) -> bool:
    """
    A simplex passes dimension k only when both the barycentric and the equatorial-ball tests accept it.
    """
    faces = [simplex[list(face)] for face in itertools.combinations(range(len(simplex)), k + 1)]
    try:
        barycentric = is_k_well_centered(simplex, k)
        equatorial = all(equatorial_ball_test(face) for face in faces)
        if barycentric != equatorial and min(equatorial_margin(face) for face in faces) > ORACLE_MARGIN:
            raise OracleDisagreement(f"Well-centeredness tests disagree on a {k}-face of {simplex.tolist()}")
    except DegenerateSimplexError:
        return False

    return barycentric and equatorial


def check_mesh(mesh: SimplicialMesh, dimensions: Sequence[int]) -> dict:
    failing = []
    for index, cell in enumerate(mesh.cells):
        failed = [k for k in dimensions if not _passes(mesh.vertices[cell], k)]
        if failed:
            failing.append({"cell": index, "dims": failed})

    return {
        "dims": list(dimensions),
        "cell_count": mesh.cell_count,
        "well_centered": not failing,
        "failing_count": len(failing),
        "failing_cells": failing,
    }


# _________________________Subcommands_________________________
def cmd_check(arguments) -> int:
    mesh = _load(arguments)
    result = check_mesh(mesh, parse_dimensions(arguments.dims, mesh))
    _print_json(result)
    if arguments.output:
        with open(arguments.output, "w") as json_file:
            json.dump(result, json_file, indent=2)

    return EXIT_SUCCESS if result["well_centered"] else EXIT_PROPERTY_FAILS


def cmd_optimize(arguments) -> int:
    mesh = _load(arguments)
    output = arguments.output or _default_output(arguments.mesh, "optimized")
    base = _artifact_base(output)
    free_vertices = parse_free_vertices(arguments.free_vertices)
    schedule = parse_schedule(arguments.schedule)

    # Both reports use the last stage's energy
    report_config = schedule[-1][0] if schedule else None
    before = quality_report(mesh, report_config)
    if arguments.smoother == "laplacian":
        optimized, trace = laplacian_smooth(mesh, arguments.iterations, free_vertices), None
    else:
        settings = OptimizationSettings(
            schedule=schedule,
            free_vertices=free_vertices,
            show_progress=arguments.progress,
        )
        optimized, trace = optimize_schedule(mesh, settings)

    # Write the mesh, then the before/after reports and the trace beside it
    after = quality_report(optimized, report_config)
    save_mesh(optimized, output, arguments.format if arguments.format == MeshFormat.OFF.value else None)
    before.to_json(f"{base}_before.json")
    after.to_json(f"{base}_after.json")
    if trace is not None:
        trace.to_csv(f"{base}_trace.csv")
        trace.to_json(f"{base}_trace.json")

    _print_json({
        "output": output,
        "bad_count_before": before.bad_count,
        "bad_count_after": after.bad_count,
        "energy_before": before.energy,
        "energy_after": after.energy,
        "stop_reasons": [] if trace is None else trace.stop_reasons,
    })
    return EXIT_SUCCESS


def cmd_report(arguments) -> int:
    mesh = _load(arguments)
    report = quality_report(mesh, bins=arguments.bins)
    _print_json(report.to_dict())
    if arguments.output:
        base = os.path.splitext(arguments.output)[0]
        report.to_json(arguments.output)
        report.histogram_to_csv(f"{base}.csv")
        render_histogram(report, f"{base}.svg", RenderStyle.named(arguments.style))

    return EXIT_SUCCESS


def cmd_render(arguments) -> int:
    mesh = _load(arguments)
    render_mesh(mesh, arguments.svg, RenderStyle.named(arguments.style))
    return EXIT_SUCCESS


def cmd_preprocess(arguments) -> int:
    mesh = _load(arguments)
    if mesh.dimension == 2:
        result = repair_connectivity_2d(mesh)
        repaired, flips, residual = result.mesh, result.flips, result.residual
    else:
        repaired, flips, residual = mesh, [], find_lonely_vertices(mesh)

    output = arguments.output or _default_output(arguments.mesh, "preprocessed")
    save_mesh(repaired, output, arguments.format if arguments.format == MeshFormat.OFF.value else None)
    _print_json({
        "output": output,
        "flips": [[list(removed), list(added)] for removed, added in flips],
        "residual": residual.to_dict(),
    })
    return EXIT_SUCCESS if residual.count == 0 else EXIT_PROPERTY_FAILS


def cmd_verify(arguments) -> int:
    results = run_all_suites(arguments.samples, arguments.seed, arguments.progress)
    # One status line per suite, followed by its recorded failures
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status}  {result.name}  (samples {result.samples}, excluded {result.excluded})")
        for failure in result.failures:
            print(f"      {failure}")

    if arguments.output:
        with open(arguments.output, "w") as json_file:
            json.dump([result.to_dict() for result in results], json_file, indent=2)

    return EXIT_SUCCESS if all(result.passed for result in results) else EXIT_PROPERTY_FAILS


# _________________________Parser_________________________
def _add_mesh_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("mesh", help="Mesh path (.off file, or .node/.ele pair by file or base name)")
    parser.add_argument("--format", choices=[mesh_format.value for mesh_format in MeshFormat], default=None,
                        help="Mesh format; detected from the path when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wellcentered", description="Well-centered simplicial mesh toolkit.")
    parser.add_argument("--verbose", action="store_true", help="Log debug output to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Test every cell for well-centeredness")
    _add_mesh_arguments(check)
    check.add_argument("--dims", default=None, help="Face dimensions to test, e.g. '2' or '1,2,3' (default: n)")
    check.add_argument("--output", default=None, help="Also write the JSON result to this path")
    check.set_defaults(handler=cmd_check)

    optimize = commands.add_parser("optimize", help="Move interior vertices to improve well-centeredness")
    _add_mesh_arguments(optimize)
    optimize.add_argument("--schedule", default="E4:100", help="Stages such as 'E4:500,E6:500,~E10:500'")
    optimize.add_argument("--output", default=None, help="Optimized mesh path; traces and reports are written next to it")
    optimize.add_argument("--free-vertices", default=None, help="Comma separated indices, or a file listing them")
    optimize.add_argument("--smoother", choices=["cg", "laplacian"], default="cg")
    optimize.add_argument("--iterations", type=int, default=60, help="Sweeps of the Laplacian smoother")
    optimize.add_argument("--progress", action="store_true", help="Show progress bars")
    optimize.set_defaults(handler=cmd_optimize)

    report = commands.add_parser("report", help="Angle (2D) or height-ratio (3D) distribution")
    _add_mesh_arguments(report)
    report.add_argument("--bins", type=int, default=None)
    report.add_argument("--output", default=None, help="JSON path; histogram CSV and SVG are written next to it")
    report.add_argument("--style", choices=["default", "outline", "fill"], default="default")
    report.set_defaults(handler=cmd_report)

    render = commands.add_parser("render", help="Shade each triangle by its largest angle")
    _add_mesh_arguments(render)
    render.add_argument("svg", help="Destination SVG path")
    render.add_argument("--style", choices=["default", "outline", "fill"], default="default")
    render.set_defaults(handler=cmd_render)

    preprocess = commands.add_parser("preprocess", help="Remove lonely vertices by edge flips")
    _add_mesh_arguments(preprocess)
    preprocess.add_argument("--output", default=None)
    preprocess.set_defaults(handler=cmd_preprocess)

    verify = commands.add_parser("verify", help="Run the randomized and exhaustive property suites")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--samples", type=int, default=None)
    verify.add_argument("--output", default=None, help="Also write the results as JSON")
    verify.add_argument("--progress", action="store_true", help="Show progress bars")
    verify.set_defaults(handler=cmd_verify)

    return parser


def main(argv: Sequence[str] = None) -> int:
    """
    :return: 0 on success, 1 when the checked property fails, 2 on any error.
    """
    parser = build_parser()
    try:
        arguments = parser.parse_args(argv)
    except SystemExit as exit_request:
        return EXIT_SUCCESS if exit_request.code == 0 else EXIT_ERROR

    logging.basicConfig(level=logging.DEBUG if arguments.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return arguments.handler(arguments)
    except (ValueError, OSError, KeyError, IndexError, OracleDisagreement) as error:
        print(f"error: {error}", file=sys.stderr)
        logger.debug("Command failed", exc_info=True)
        return EXIT_ERROR
