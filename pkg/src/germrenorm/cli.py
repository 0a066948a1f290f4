"""
germrenorm command line.

Every command reads JSON documents, runs one computation and writes JSON (CSV for `slice`) to
stdout or to `--output`. Failures print a red message on stderr and exit with the error's code:
2 input, 3 precondition, 4 resource cap, 5 numerical.
"""

import json
from functools import wraps
from logging import getLogger
from pathlib import Path
from typing import Annotated, Any, Callable, Dict, List, Optional, TypeVar

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from germrenorm.common import drop_none
from germrenorm.config import ChiMethod
from germrenorm.core.app import AppManager
from germrenorm.core.exceptions import EXIT_NUMERICAL, GermRenormError, InputError
from germrenorm.schemas import load_json

logger = getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

app = typer.Typer(
    name="germrenorm",
    help="Spectrally regularized Feynman amplitudes as meromorphic germs.",
    no_args_is_help=True,
    add_completion=False,
)
err_console = Console(stderr=True)

ConfigOpt = Annotated[Path, typer.Option("--config", "-c", help="Config file (.json/.yaml)")]
DimOpt = Annotated[Optional[int], typer.Option("--dim", min=1, help="Spatial dimension d")]
MassOpt = Annotated[Optional[float], typer.Option("--mass", min=0.0, help="Field mass m")]
OrderOpt = Annotated[
    Optional[int], typer.Option("--order", min=0, max=12, help="σ-jet order D")
]
HeatOrderOpt = Annotated[
    Optional[int], typer.Option("--heat-order", min=0, help="Heat expansion order p")
]
QuadNodesOpt = Annotated[
    Optional[int],
    typer.Option("--quad-nodes", min=2, help="Gauss–Hermite/Legendre nodes per axis"),
]
TLevelOpt = Annotated[
    Optional[int], typer.Option("--t-level", min=1, max=7, help="tanh-sinh level")
]
ChiOpt = Annotated[Optional[ChiMethod], typer.Option("--chi-method", help="χ integration")]
SamplesOpt = Annotated[Optional[int], typer.Option("--mc-samples", min=16, help="MC samples")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", help="Monte Carlo seed")]
JobsOpt = Annotated[Optional[int], typer.Option("--jobs", "-j", min=1, help="Sector workers")]
TolOpt = Annotated[Optional[float], typer.Option("--tolerance", help="Check tolerance")]
OutputOpt = Annotated[
    Optional[Path], typer.Option("--output", "-o", help="Write the result to this file")
]


def _fail(message: str, code: int) -> None:
    err_console.print(f"[bold red]error:[/bold red] {message}")
    raise typer.Exit(code)


def handle_errors(func: F) -> F:
    """Turn package errors into a red message and the matching exit code."""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except GermRenormError as e:
            logger.debug("command failed", exc_info=True)
            _fail(e.message, e.exit_code)

    return wrapper  # type: ignore[return-value]


def _manager(
    config: Path,
    dim: Optional[int] = None,
    mass: Optional[float] = None,
    order: Optional[int] = None,
    quad_nodes: Optional[int] = None,
    t_level: Optional[int] = None,
    chi_method: Optional[ChiMethod] = None,
    mc_samples: Optional[int] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
    tolerance: Optional[float] = None,
    **sections: Any,
) -> AppManager:
    """Build the app manager with the command-line flags layered over the config file."""
    quadrature = {
        "hermite_order": quad_nodes,
        "legendre_order": quad_nodes,
        "t_level": t_level,
        "chi_method": chi_method.value if chi_method else None,
        "mc_samples": mc_samples,
        "seed": seed,
    }
    engine = {"order": order, "jobs": jobs, "tolerance": tolerance}
    overrides = drop_none({"quadrature": quadrature, "engine": engine, **sections})
    try:
        manager = AppManager(str(config), dim=dim, mass=mass, **overrides)
        manager.get_engine()
        return manager
    except ValidationError as e:
        raise InputError(f"invalid configuration: {e.errors()[0]['msg']}") from e
    except ValueError as e:
        if isinstance(e, GermRenormError):
            raise
        raise InputError(str(e)) from e


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        typer.echo(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")
    err_console.print(f"wrote {output}")


def _emit_json(document: Any, output: Optional[Path]) -> None:
    _emit(json.dumps(document, indent=2, ensure_ascii=False), output)


def _floats(raw: str, what: str) -> List[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as e:
        raise InputError(f"{what} must be comma-separated numbers, got {raw!r}") from e


def _geometry(path: Path, dim: Optional[int], mass: Optional[float]) -> Dict[str, Any]:
    raw = load_json(str(path), "geometry")
    if not isinstance(raw, dict):
        raise InputError(f"geometry file {path} must hold a JSON object")
    if dim is not None:
        raw["dim"] = dim
    if mass is not None:
        raw["mass"] = mass
    return raw


@app.command()
@handle_errors
def poles(
    graph: Annotated[Path, typer.Argument(help="Graph JSON")],
    dim: DimOpt = None,
    config: ConfigOpt = Path("config.json"),
    output: OutputOpt = None,
) -> None:
    """Divergent subgraphs and the pole hyperplanes they predict."""
    engine = _manager(config, dim=dim).get_engine()
    _emit_json(engine.poles(load_json(str(graph), "graph"), dim), output)


@app.command()
@handle_errors
def tree(
    graph: Annotated[Path, typer.Argument(help="Graph JSON")],
    lengths: Annotated[
        Optional[str], typer.Option("--lengths", help="Comma-separated edge lengths")
    ] = None,
    config: ConfigOpt = Path("config.json"),
    output: OutputOpt = None,
) -> None:
    """The Kruskal sector tree of a strict metric graph and its fundamental cycles."""
    engine = _manager(config).get_engine()
    values = _floats(lengths, "--lengths") if lengths is not None else None
    _emit_json(engine.tree(load_json(str(graph), "graph"), values), output)


@app.command()
@handle_errors
def sectors(
    graph: Annotated[Path, typer.Argument(help="Graph JSON, optionally with heat labels")],
    permutation: Annotated[
        Optional[str], typer.Option("--permutation", help="Comma-separated edge order")
    ] = None,
    dim: DimOpt = None,
    config: ConfigOpt = Path("config.json"),
    output: OutputOpt = None,
) -> None:
    """Dump sector charts: Kruskal tree, cycles, exponent forms and IBP depths."""
    engine = _manager(config, dim=dim).get_engine()
    order = [int(v) for v in _floats(permutation, "--permutation")] if permutation else None
    _emit_json(engine.sectors(load_json(str(graph), "graph"), dim, order), output)


@app.command()
@handle_errors
def germ(
    graph: Annotated[Path, typer.Argument(help="Graph JSON")],
    testfn: Annotated[Path, typer.Argument(help="Test function JSON")],
    geometry: Annotated[Path, typer.Argument(help="Geometry JSON")],
    labelled: Annotated[
        bool, typer.Option("--labelled", help="Continue the heat amplitude of the labels only")
    ] = False,
    order: OrderOpt = None,
    heat_order: HeatOrderOpt = None,
    dim: DimOpt = None,
    mass: MassOpt = None,
    quad_nodes: QuadNodesOpt = None,
    t_level: TLevelOpt = None,
    chi_method: ChiOpt = None,
    mc_samples: SamplesOpt = None,
    seed: SeedOpt = None,
    jobs: JobsOpt = None,
    config: ConfigOpt = Path("config.json"),
    output: OutputOpt = None,
) -> None:
    """The amplitude germ ⟨t_G(s), φ⟩ at s₀ = (1, …, 1)."""
    geometry_doc = _geometry(geometry, dim, mass)
    engine = _manager(
        config,
        dim=geometry_doc["dim"],
        order=order,
        quad_nodes=quad_nodes,
        t_level=t_level,
        chi_method=chi_method,
        mc_samples=mc_samples,
        seed=seed,
        jobs=jobs,
    ).get_engine()
    document = engine.germ(
        load_json(str(graph), "graph"),
        load_json(str(testfn), "test function"),
        geometry_doc,
        order,
        heat_order,
        labelled,
    )
    _emit_json(document, output)


@app.command()
@handle_errors
def renormalize(
    graph: Annotated[Path, typer.Argument(help="Graph JSON or list of {coefficient, graph}")],
    testfn: Annotated[Path, typer.Argument(help="Test function JSON")],
    geometry: Annotated[Path, typer.Argument(help="Geometry JSON")],
    order: OrderOpt = None,
    heat_order: HeatOrderOpt = None,
    dim: DimOpt = None,
    mass: MassOpt = None,
    quad_nodes: QuadNodesOpt = None,
    t_level: TLevelOpt = None,
    chi_method: ChiOpt = None,
    mc_samples: SamplesOpt = None,
    seed: SeedOpt = None,
    jobs: JobsOpt = None,
    config: ConfigOpt = Path("config.json"),
    output: OutputOpt = None,
) -> None:
    """The renormalized pairing ⟨R(t_G), φ⟩ = ev at s₀ of the holomorphic part."""
    geometry_doc = _geometry(geometry, dim, mass)
    engine = _manager(
        config,
        dim=geometry_doc["dim"],
        order=order,
        quad_nodes=quad_nodes,
        t_level=t_level,
        chi_method=chi_method,
        mc_samples=mc_samples,
        seed=seed,
        jobs=jobs,
    ).get_engine()
    document = engine.renormalize(
        load_json(str(graph), "graph"),
        load_json(str(testfn), "test function"),
        geometry_doc,
        order,
        heat_order,
    )
    _emit_json(document, output)


@app.command()
@handle_errors
def verify(
    corpus: Annotated[Path, typer.Argument(help="Corpus directory or corpus.yaml")] = Path(
        "corpus"
    ),
    only: Annotated[
        Optional[List[str]], typer.Option("--only", help="Restrict to these check kinds")
    ] = None,
    quad_nodes: QuadNodesOpt = None,
    t_level: TLevelOpt = None,
    chi_method: ChiOpt = None,
    mc_samples: SamplesOpt = None,
    seed: SeedOpt = None,
    jobs: JobsOpt = None,
    tolerance: TolOpt = None,
    config: ConfigOpt = Path("config.json"),
    output: OutputOpt = None,
) -> None:
    """Run the functional-equation checks of a corpus and report each one."""
    engine = _manager(
        config,
        quad_nodes=quad_nodes,
        t_level=t_level,
        chi_method=chi_method,
        mc_samples=mc_samples,
        seed=seed,
        jobs=jobs,
        tolerance=tolerance,
    ).get_engine()
    document = engine.verify(corpus, only)
    table = Table(title=f"corpus {corpus}")
    for column in ("check", "discrepancy", "tolerance", "result"):
        table.add_column(column)
    for check in document["checks"]:
        verdict = "[green]pass[/green]" if check["passed"] else "[red]FAIL[/red]"
        table.add_row(
            check["name"], f"{check['discrepancy']:.3e}", f"{check['tolerance']:.1e}", verdict
        )
    err_console.print(table)
    _emit_json(document, output)
    if not document["passed"]:
        raise typer.Exit(EXIT_NUMERICAL)


@app.command(name="slice")
@handle_errors
def slice_command(
    germ_file: Annotated[Path, typer.Argument(help="Germ JSON, as written by `germ`")],
    origin: Annotated[str, typer.Option("--origin", help="Comma-separated σ origin")],
    direction: Annotated[str, typer.Option("--direction", help="Comma-separated direction")],
    start: Annotated[float, typer.Option("--start")] = -1.0,
    stop: Annotated[float, typer.Option("--stop")] = 1.0,
    steps: Annotated[int, typer.Option("--steps", min=2)] = 21,
    output: OutputOpt = None,
) -> None:
    """CSV of germ values along the line σ = origin + t·direction."""
    from germrenorm.core.engine import RenormEngine

    document = load_json(str(germ_file), "germ")
    if not isinstance(document, dict):
        raise InputError(f"germ file {germ_file} must hold a JSON object")
    ts = np.linspace(start, stop, steps).tolist()
    csv_text = RenormEngine.slice(
        document, _floats(origin, "--origin"), _floats(direction, "--direction"), ts
    )
    _emit(csv_text, output)


@app.command()
@handle_errors
def serve(
    host: Annotated[Optional[str], typer.Option("--host")] = None,
    port: Annotated[Optional[int], typer.Option("--port")] = None,
    dim: DimOpt = None,
    mass: MassOpt = None,
    config: ConfigOpt = Path("config.json"),
) -> None:
    """Serve the HTTP API under uvicorn."""
    from germrenorm.core.server import create_app, run

    server = {"host": host, "port": port}
    manager = _manager(config, dim=dim, mass=mass, server=server)
    run(create_app(manager), manager.config)


def main() -> None:
    app(prog_name="germrenorm")


__all__ = ["app", "main"]
