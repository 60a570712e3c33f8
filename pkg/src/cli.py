"""Command-line interface for the monoped co-design toolkit."""

import logging
from contextlib import contextmanager
from pathlib import Path

import click
from pydantic import ValidationError
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from .actuators.mass_models import InfeasibleGearTrainError, make_actuator
from .generators.manifest import write_manifest_schema
from .generators.output_formats import finite_or_none, read_json
from .models.design import CASE_NAMES, CaseSpec, CodesignVariables
from .models.gearing import GearboxKind, GearTrain
from .pipeline import BEST_POINT, MANIFEST, SUMMARY, PipelineOrchestrator
from .utils.config import ConfigError, load_config
from .utils.logging_config import setup_logging

console = Console()

EXIT_CONFIG = 1
EXIT_RUNTIME = 2


@contextmanager
def _runtime_errors(ctx):
    """Map failures inside a command to exit codes."""
    try:
        yield
    except (click.exceptions.Exit, click.ClickException):
        raise
    except (FileNotFoundError, ConfigError) as e:
        console.print(f"[red]Error:[/red] {str(e)}")
        ctx.exit(EXIT_CONFIG)
    except Exception as e:
        logging.getLogger(__name__).exception(f"{ctx.command.name} failed")
        console.print(f"[red]Error:[/red] {str(e)}")
        ctx.exit(EXIT_RUNTIME)


def _parse_floats(text: str, count: int, option: str):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise click.BadParameter(f"expected {count} comma-separated numbers", param_hint=option)
    if len(values) != count:
        raise click.BadParameter(f"expected {count} values, got {len(values)}", param_hint=option)
    return values


def _case_for(config, name):
    if name is None or name == config.case.name:
        return config.case
    return CaseSpec(name=name)


def _generation_progress(config):
    progress = Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
    )
    task = progress.add_task("[cyan]Optimizing...", total=config.cmaes.max_generations)

    def advance(row):
        progress.update(task, completed=row.generation,
                        description=f"[cyan]best cost {row.best_cost:.4f}")

    return progress, advance


def _bin_progress(config):
    progress = Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
    )
    task = progress.add_task("[cyan]Searching gear trains...", total=config.ratio_grid.bin_count)
    return progress, lambda n: progress.advance(task, n)


def _number(value):
    value = finite_or_none(value)
    return "-" if value is None else f"{value:.4f}"


def _evaluation_table(title, rows):
    table = Table(title=title)
    table.add_column("Point", style="cyan")
    table.add_column("h (m)", style="green")
    table.add_column("E (J)", style="green")
    table.add_column("Cost", style="white")
    table.add_column("Outcome", style="yellow")
    for name, evaluation in rows:
        table.add_row(name, _number(evaluation.apex_height), _number(evaluation.energy),
                      f"{evaluation.cost:.4f}", evaluation.reason)
    return table


@click.group()
@click.option('--config', '-c', default=None, type=click.Path(), help='Configuration file (YAML or JSON)')
@click.option('--out', '-o', default=None, type=click.Path(), help='Output directory')
@click.option('--seed', default=None, type=int, help='Random seed')
@click.option('--jobs', '-j', default=None, type=int, help='Worker processes')
@click.option('--log-level', '-l', default=None, help='Logging level')
@click.pass_context
def cli(ctx, config, out, seed, jobs, log_level):
    """Monoped co-design: actuator catalog, CMA-ES co-design and design manifest."""
    ctx.ensure_object(dict)

    try:
        run_config = load_config(config).with_overrides(output_dir=out, seed=seed, jobs=jobs)
    except FileNotFoundError as e:
        console.print(f"[red]Error:[/red] {str(e)}")
        ctx.exit(EXIT_CONFIG)
    except (ConfigError, ValidationError) as e:
        console.print(f"[red]Error loading configuration:[/red] {str(e)}")
        ctx.exit(EXIT_CONFIG)

    setup_logging(
        level=log_level or run_config.logging.level,
        log_file=run_config.logging.file,
        log_format=run_config.logging.format,
    )
    ctx.obj['config'] = run_config
    ctx.obj['logger'] = logging.getLogger(__name__)


@cli.command()
@click.option('--kind', type=click.Choice([k.value for k in GearboxKind] + ['both']), default='both',
              help='Gearbox kinds to search')
@click.pass_context
def stage1(ctx, kind):
    """Build the gear-ratio to lightest-actuator catalog."""
    config = ctx.obj['config']
    console.print("\n[bold cyan]Stage 1: actuator catalog[/bold cyan]\n")

    with _runtime_errors(ctx):
        orchestrator = PipelineOrchestrator(config)
        kinds = None if kind == 'both' else [GearboxKind(kind)]
        progress, advance = _bin_progress(config)
        with progress:
            catalog, cached = orchestrator.stage1(kinds=kinds, progress=advance)

    filled = catalog.non_empty()
    table = Table(title="Catalog Summary")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Kinds", ", ".join(k.value for k in catalog.kinds))
    table.add_row("Bins", str(len(catalog.bins)))
    table.add_row("Feasible bins", str(len(filled)))
    table.add_row("From cache", "yes" if cached else "no")
    if filled:
        table.add_row("Ratio span", f"{filled[0].bin.lo:g} to {filled[-1].bin.hi:g}")
        table.add_row("Mass span", f"{min(e.best.mass for e in filled):.4f} to "
                                   f"{max(e.best.mass for e in filled):.4f} kg")
    console.print(table)
    console.print(f"\n[green]✓[/green] Catalog written to {orchestrator.writer.path('catalog.csv')}")


@cli.command('mass-report')
@click.option('--teeth', default=None, help='Ns,Np,Nr of one gear train')
@click.option('--module', 'module_mm', default=None, type=float, help='Gear module (mm)')
@click.option('--planets', default=None, type=int, help='Number of planets')
@click.pass_context
def mass_report(ctx, teeth, module_mm, planets):
    """Component mass breakdown for one train (both kinds) or every catalog entry."""
    config = ctx.obj['config']
    logger = ctx.obj['logger']

    with _runtime_errors(ctx):
        orchestrator = PipelineOrchestrator(config)
        if teeth is None:
            designs = [entry.best for entry in orchestrator.catalog().non_empty()]
        else:
            if module_mm is None or planets is None:
                raise click.UsageError("--teeth needs --module and --planets")
            ns, np_, nr = (int(v) for v in _parse_floats(teeth, 3, "--teeth"))
            train = GearTrain(sun_teeth=ns, planet_teeth=np_, ring_teeth=nr,
                              module=module_mm, planet_count=planets)
            designs = []
            for kind in GearboxKind:
                try:
                    designs.append(make_actuator(train, kind, config.motor, config.materials,
                                                 config.actuator_geometry, config.gearbox_bounds))
                except InfeasibleGearTrainError as e:
                    logger.warning(str(e))
                    console.print(f"[yellow]{kind.value}:[/yellow] {e}")
        path = orchestrator.writer.write_mass_report(designs)

    table = Table(title="Actuator Masses")
    table.add_column("Kind", style="cyan")
    table.add_column("Train", style="white")
    table.add_column("Ratio", style="green")
    table.add_column("Mass (kg)", style="green")
    for design in designs[:20]:
        table.add_row(design.kind.value, design.gear_train.label(), f"{design.ratio:.4f}",
                      f"{design.mass:.4f}")
    console.print(table)
    if len(designs) > 20:
        console.print(f"  ... {len(designs) - 20} more")
    console.print(f"\n[green]✓[/green] {len(designs)} row(s) written to {path}")


@cli.command()
@click.option('--point', type=click.Path(), default=None, help='Best-point JSON to simulate')
@click.option('--y', 'y_values', default=None, help='l1,l2,g_k,g_h,K,C,T')
@click.pass_context
def simulate(ctx, point, y_values):
    """Simulate one jump and write its trajectory (nominal point by default)."""
    config = ctx.obj['config']
    if point and y_values:
        raise click.UsageError("give --point or --y, not both")

    with _runtime_errors(ctx):
        if point:
            payload = read_json(Path(point))
            y = CodesignVariables.model_validate(payload.get("variables", payload))
        elif y_values:
            y = CodesignVariables.from_array(_parse_floats(y_values, 7, "--y"))
        else:
            y = CodesignVariables.nominal()
        orchestrator = PipelineOrchestrator(config)
        evaluation = orchestrator.simulate(y)

    console.print(_evaluation_table("Jump", [("point", evaluation)]))
    if evaluation.detail:
        console.print(f"  {evaluation.detail}")
    console.print(f"\n[green]✓[/green] Trajectory written to {orchestrator.writer.path('trajectory.csv')}")


@cli.command()
@click.option('--case', 'case_name', type=click.Choice(CASE_NAMES), default=None, help='Co-design case')
@click.pass_context
def codesign(ctx, case_name):
    """Run CMA-ES co-design for one case."""
    config = ctx.obj['config']
    console.print("\n[bold cyan]Stage 2: co-design[/bold cyan]\n")

    with _runtime_errors(ctx):
        orchestrator = PipelineOrchestrator(config)
        catalog = orchestrator.catalog()
        progress, advance = _generation_progress(config)
        with progress:
            result, payload = orchestrator.codesign(_case_for(config, case_name), catalog, advance)

    console.print(_evaluation_table(f"Case {result.case.name}", [("best", result.evaluation)]))
    for name, value in payload["variables"].items():
        console.print(f"  {name} = {value:.6g}")
    if result.audit is not None and not result.audit.ok:
        console.print("[yellow]Penalty audit failed: a feasible cost reached the penalty[/yellow]")
    console.print(f"\n[green]✓[/green] Best point written to {orchestrator.writer.path(BEST_POINT)}")


@cli.command()
@click.option('--point', type=click.Path(), default=None, help='Best-point JSON (default: output dir)')
@click.option('--schema', type=click.Path(), default=None, help='Also write the manifest JSON schema here')
@click.pass_context
def export(ctx, point, schema):
    """Write the parametric design manifest for a co-design best point."""
    config = ctx.obj['config']

    with _runtime_errors(ctx):
        if schema:
            write_manifest_schema(Path(schema))
            console.print(f"[green]✓[/green] Schema written to {schema}")
        orchestrator = PipelineOrchestrator(config)
        default_point = orchestrator.writer.path(BEST_POINT)
        if schema and point is None and not default_point.exists():
            return
        path = orchestrator.export(Path(point) if point else default_point)

    console.print(f"[green]✓[/green] Manifest written to {path}")


@cli.command()
@click.option('--case', 'case_name', type=click.Choice(CASE_NAMES), default=None, help='Co-design case')
@click.pass_context
def pipeline(ctx, case_name):
    """Run stage 1, co-design and export, then write a run summary."""
    config = ctx.obj['config']
    console.print("\n[bold cyan]Monoped co-design pipeline[/bold cyan]\n")

    with _runtime_errors(ctx):
        orchestrator = PipelineOrchestrator(config)
        progress, advance = _generation_progress(config)
        with progress:
            summary = orchestrator.run(_case_for(config, case_name), codesign_progress=advance)

    table = Table(title="Nominal vs Optimized")
    table.add_column("Point", style="cyan")
    table.add_column("h (m)", style="green")
    table.add_column("E (J)", style="green")
    table.add_column("Hip", style="white")
    table.add_column("Knee", style="white")
    for name in ("nominal", "optimized"):
        row = summary[name]
        acts = row["actuators"]
        table.add_row(
            name,
            _number(row["apex_height_m"]),
            _number(row["energy_J"]),
            f"{acts['hip']['kind']} {acts['hip']['gear_ratio']:.3f}" if "hip" in acts else "-",
            f"{acts['knee']['kind']} {acts['knee']['gear_ratio']:.3f}" if "knee" in acts else "-",
        )
    console.print(table)
    if orchestrator.stage1_cached:
        console.print("Stage 1 catalog reused from cache")
    console.print(f"\n[green]✓[/green] Summary written to {orchestrator.writer.path(SUMMARY)}")
    console.print(f"[green]✓[/green] Manifest written to {orchestrator.writer.path(MANIFEST)}")


if __name__ == '__main__':
    cli(obj={})
