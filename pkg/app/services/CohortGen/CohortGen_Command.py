import io
import json
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from app.core.exceptions import SpecError
from app.services.Cli.Cli import CliService, cli_errors
from app.services.CohortGen.CohortGen import CohortGenService
from app.services.CohortGen.CohortGen_Schema import GenSpec
from app.services.Ingest.Ingest import IngestService


@click.command("synth")
@click.option("--spec", "spec_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--seed", type=int, help="Overrides the spec's seed")
@click.option("--population", type=click.IntRange(min=0), help="Overrides the spec's population")
@click.pass_context
@cli_errors
def synth(ctx: click.Context, spec_file: Path, seed: Optional[int], population: Optional[int]):
    """Write a synthetic combined assessment CSV sampled from a JSON cohort spec."""
    try:
        data = json.loads(spec_file.read_text(encoding="utf-8"))
        if seed is not None:
            data["seed"] = seed
        if population is not None:
            data["population"] = population
        spec = GenSpec.model_validate(data)
    except json.JSONDecodeError as e:
        raise SpecError(f"{spec_file} is not valid JSON: {e}") from e
    except ValidationError as e:
        raise SpecError(f"{spec_file}: {IngestService.rejection_reason(e)}") from e

    cohort = CohortGenService.generate(spec)
    buffer = io.StringIO()
    CohortGenService.write_csv(cohort, buffer)
    out = ctx.obj.get("out")
    CliService.emit(buffer.getvalue(), Path(out) if out is not None else None)
