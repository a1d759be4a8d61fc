"""
Command Line Interface
======================

Description: click commands over the simplification services
Version: 1.0.0

Every command reads a complex document (JSON, "-" for stdin). Documents
without values get a random dMf drawn with --seed. Exit codes: 0 success,
1 validation failure or rejected request, 2 internal invariant violation.
"""

import logging
import sys
from typing import Optional

import click
from pydantic import ValidationError

from app.config import DEFAULT_SEED, EXPERIMENT_TIME_BUDGET, VERIFY_DEFAULT
from app.exceptions import DocumentError, SimplificationError
from app.logging_config import configure_logging
from app.models.complex import ComplexDocument
from app.models.diagram import RegionEntry
from app.models.reports import EligibilityResponse
from app.models.validators import FORMATS, POLICIES
from app.services.document_service import (
    complex_to_document,
    diagram_from_morse_state,
    diagram_from_state,
    dump_json,
    emit_diagram,
    load_document,
    state_from_document,
    validation_response,
)
from app.services.experiment_service import needs_inspection, run_experiments
from app.services.generator_service import random_dmf, simplex_skeleton
from app.services.morse_state import MorseState
from app.services.pairing_service import build_state
from app.services.region_service import eligible, forbidden_regions
from app.services.simplification_service import cancel_pair, pair_entry, simplify_all

logger = logging.getLogger(__name__)


class SimplifyGroup(click.Group):
    """Maps SimplificationError to its exit code with the message on stderr."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except SimplificationError as e:
            click.echo(f"Error: {e.message}", err=True)
            if e.cells:
                click.echo(f"Cells: {', '.join(e.cells)}", err=True)
            ctx.exit(e.exit_code)


def _read_document(source) -> ComplexDocument:
    text = source.read()
    try:
        return ComplexDocument.model_validate_json(text)
    except ValidationError as e:
        raise DocumentError(f"Invalid complex document {source.name}: {e.errors()[0].get('msg')}") from e


def _state(ctx: click.Context, source) -> MorseState:
    return state_from_document(_read_document(source), ctx.obj["seed"])


def _write(output, text: str) -> None:
    if output is None:
        click.echo(text)
    else:
        output.write(text if text.endswith("\n") else text + "\n")


@click.group(cls=SimplifyGroup)
@click.option("--verify/--no-verify", default=VERIFY_DEFAULT, help="Check every step against the dense oracle.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Seed for random dMfs.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True,
              help="Output format of diagrams.")
@click.option("--log-level", default=None, help="Overrides LOG_LEVEL.")
@click.pass_context
def cli(ctx: click.Context, verify: bool, seed: int, fmt: str, log_level: Optional[str]):
    """Topological simplification of discrete Morse functions."""
    configure_logging(log_level, console_stream=sys.stderr)
    ctx.ensure_object(dict)
    ctx.obj.update(verify=verify, seed=seed, fmt=fmt)


@cli.command()
@click.argument("source", type=click.File("r"))
def validate(source):
    """Validate a complex document (and its values, if any)."""
    response = validation_response(_read_document(source))
    click.echo(dump_json(response))
    if not response.valid:
        sys.exit(1)


@cli.command(name="reduce")
@click.argument("source", type=click.File("r"))
@click.pass_context
def reduce_command(ctx: click.Context, source):
    """Diagram of the full complex: every cell paired, vectors on the diagonal."""
    X, h = load_document(_read_document(source))
    if h is None:
        h = random_dmf(X, ctx.obj["seed"])
    click.echo(emit_diagram(diagram_from_state(build_state(X, h)), ctx.obj["fmt"]))


@cli.command()
@click.argument("source", type=click.File("r"))
@click.option("--regions/--no-regions", default=False, help="Include forbidden regions.")
@click.pass_context
def pairs(ctx: click.Context, source, regions: bool):
    """Diagram of the critical pairs plus one diagonal pair per vector."""
    state = _state(ctx, source)
    click.echo(emit_diagram(diagram_from_morse_state(state, regions=regions), ctx.obj["fmt"]))


@cli.command()
@click.argument("source", type=click.File("r"))
@click.pass_context
def relations(ctx: click.Context, source):
    """Homological and cohomological relations between critical pairs."""
    doc = diagram_from_morse_state(_state(ctx, source))
    if ctx.obj["fmt"] == "csv":
        click.echo("source,target,kind")
        for rel in doc.relations:
            click.echo(f"{rel.source},{rel.target},{rel.kind}")
    else:
        click.echo(dump_json([rel.model_dump() for rel in doc.relations]))


@cli.command()
@click.argument("source", type=click.File("r"))
@click.argument("pair")
@click.pass_context
def regions(ctx: click.Context, source, pair: str):
    """Forbidden regions of PAIR (a cell of the pair, or "birth,death")."""
    state = _state(ctx, source)
    alpha = state.resolve(pair)
    result = forbidden_regions(state, alpha)
    click.echo(dump_json(RegionEntry(
        pair=alpha.birth,
        death_region=result.death_region.as_lists(),
        birth_region=result.birth_region.as_lists(),
    )))


@cli.command(name="eligible")
@click.argument("source", type=click.File("r"))
@click.argument("pair")
@click.pass_context
def eligible_command(ctx: click.Context, source, pair: str):
    """Whether PAIR can be cancelled, with the reasons when it cannot."""
    state = _state(ctx, source)
    result = eligible(state, state.resolve(pair))
    click.echo(dump_json(EligibilityResponse(**result.to_dict())))


@cli.command()
@click.argument("source", type=click.File("r"))
@click.argument("pair")
@click.option("--output", "-o", type=click.File("w"), default=None, help="Write the new complex document here.")
@click.pass_context
def cancel(ctx: click.Context, source, pair: str, output):
    """Cancel PAIR; prints the cancellation report."""
    state = _state(ctx, source)
    alpha = state.resolve(pair)
    entry = pair_entry(state, alpha)
    state, result = cancel_pair(state, alpha, ctx.obj["verify"])
    click.echo(dump_json(result.to_report(entry)))
    if output is not None:
        _write(output, dump_json(complex_to_document(state.complex, state.dmf)))


@cli.command()
@click.argument("source", type=click.File("r"))
@click.option("--policy", type=click.Choice(POLICIES), default=POLICIES[0], show_default=True)
@click.option("--output", "-o", type=click.File("w"), default=None, help="Write the simplified complex document here.")
@click.pass_context
def simplify(ctx: click.Context, source, policy: str, output):
    """Cancel every cancellable pair; prints the classification report."""
    state = _state(ctx, source)
    state, report, _ = simplify_all(state, policy, ctx.obj["verify"])
    click.echo(dump_json(report))
    if output is not None:
        _write(output, dump_json(complex_to_document(state.complex, state.dmf)))


@cli.command(name="random-dmf")
@click.argument("source", type=click.File("r"), required=False)
@click.option("--simplex", "simplex", type=int, default=None, help="Use the full simplex of this dimension.")
@click.option("--banded/--no-banded", default=False, help="Order the values dimension by dimension.")
@click.option("--vector-rate", type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True,
              help="Probability of tying a cell to one of its facets.")
@click.pass_context
def random_dmf_command(ctx: click.Context, source, simplex: Optional[int], banded: bool, vector_rate: float):
    """Complex document with a random dMf, from SOURCE or --simplex."""
    if (source is None) == (simplex is None):
        raise click.UsageError("Give either SOURCE or --simplex")
    if simplex is not None:
        X = simplex_skeleton(simplex)
    else:
        X, _ = load_document(_read_document(source))
    h = random_dmf(X, ctx.obj["seed"], banded=banded, vector_rate=vector_rate)
    click.echo(dump_json(complex_to_document(X, h)))


@cli.command()
@click.option("--d", "d", type=int, default=10, show_default=True, help="Dimension of the simplex.")
@click.option("--seeds", type=int, multiple=True, help="Seeds (repeatable); defaults to --seed.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--scaling/--no-scaling", default=False, help="Also run the scaling sweep.")
@click.option("--time-budget", type=float, default=EXPERIMENT_TIME_BUDGET, show_default=True, help="Seconds per seed.")
@click.pass_context
def experiment(ctx: click.Context, d: int, seeds: tuple, workers: int, scaling: bool, time_budget: float):
    """Simplify a random banded dMf on the full d-simplex."""
    reports = run_experiments(d, list(seeds) or [ctx.obj["seed"]], workers, ctx.obj["verify"], scaling, time_budget)
    click.echo(dump_json([r.model_dump(by_alias=True) for r in reports]))
    if needs_inspection(reports):
        logger.warning("No seed produced a region-cancelled pair: inspect the run")
    if any(r.oracle_diffs for r in reports):
        click.echo("Error: oracle spot checks found differences", err=True)
        sys.exit(2)


def main():
    cli(obj={})


if __name__ == "__main__":
    main()
