"""Command-line entry point: ``topostab <command> [options]``.

Exit status is 0 on success, 1 on invalid input, 2 when a budget is
exceeded or a bound that must hold fails.
"""

from __future__ import annotations

import functools
import sys

import click

from . import experiments as ex
from . import io
from .errors import BoundViolationError, BudgetError, ValidationError
from .metric import ScalingTransform
from .optimize import STRATEGIES, UNIFORM


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def common_options(f):
    options = [
        click.option("--input", "input_", type=click.Path(dir_okay=False), help="Point cloud file (.csv, .json or .ppm)."),
        click.option("--generate", help="Generator spec, e.g. circle:n=12,radius=1,seed=7."),
        click.option("--epsilon", type=float, default=5.0, show_default=True, help="Topological tolerance."),
        click.option("--dims", default="0,1", show_default=True, help="Homology dimensions, subset of 0,1,2."),
        click.option("--wasserstein-p", type=float, default=None, help="Also report the p-Wasserstein distance."),
        click.option("--trials", type=int, default=100, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--max-dim", type=int, default=2, show_default=True, help="Largest homology dimension allowed."),
        click.option("--max-radius", type=float, default=None, help="Truncate the filtration (default: diameter)."),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default: stdout)."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True),
        click.option("--workers", type=int, default=1, show_default=True, help="Worker processes for trials."),
    ]
    for opt in reversed(options):
        f = opt(f)

    @functools.wraps(f)
    def wrapper(input_, generate, epsilon, dims, wasserstein_p, trials, seed, max_dim, max_radius, out, fmt, workers, **kw):
        cfg = ex.ExperimentConfig(
            input=input_,
            generate=generate,
            epsilon=epsilon,
            dims=_int_list(dims),
            wasserstein_p=wasserstein_p,
            trials=trials,
            seed=seed,
            max_dim=max_dim,
            max_radius=max_radius,
            out=out,
            format=fmt,
            workers=workers,
        )
        result = f(cfg, **kw)
        text = result if isinstance(result, str) else result.render(cfg.format)
        if cfg.out:
            io.write_text(cfg.out, text)
        else:
            click.echo(text, nl=False)

    return wrapper


def _transforms(scale: tuple[str, ...], transform: tuple[str, ...]) -> list[ScalingTransform]:
    ts = [io.parse_factors(s) for s in scale] + [io.read_transform(p) for p in transform]
    if not ts:
        raise ValidationError("give at least one --scale or --transform")
    return ts


scale_option = click.option("--scale", multiple=True, help="Comma-separated factors, e.g. 1,1.02 (repeatable).")
transform_option = click.option(
    "--transform", multiple=True, type=click.Path(dir_okay=False), help='Transform JSON {"factors": [...]} (repeatable).'
)


@click.group()
def cli():
    """Persistent homology stability under per-axis scaling."""


@cli.command()
@common_options
def diagram(cfg):
    """Persistence diagrams of a point cloud."""
    return ex.run_diagram(cfg)


@cli.command()
@click.option("--diagram-a", required=True, type=click.Path(dir_okay=False))
@click.option("--diagram-b", required=True, type=click.Path(dir_okay=False))
@common_options
def distance(cfg, diagram_a, diagram_b):
    """Bottleneck (and optionally Wasserstein) distance between two diagram files."""
    return ex.run_distance(cfg, diagram_a, diagram_b)


@cli.command()
@scale_option
@transform_option
@click.option("--diam", type=float, default=None, help="Use this diameter instead of a point cloud.")
@common_options
def bound(cfg, scale, transform, diam):
    """Variability (s_max - s_min) and corrected bounds; cumulative bounds when several transforms are given."""
    return ex.run_bound(cfg, _transforms(scale, transform), diam)


@cli.command()
@click.option("--n", "n_axes", type=int, default=None, help="Axis count (default: cloud dimension).")
@click.option("--diam", type=float, default=None, help="Diameter (default: from the point cloud).")
@click.option("--strategy", type=click.Choice(STRATEGIES), default=UNIFORM, show_default=True)
@click.option("--k", "k_max", type=int, default=1, show_default=True, help="Axes at s_max for boundary-spread.")
@click.option("--s-min", type=float, default=1.0, show_default=True)
@common_options
def optimize(cfg, n_axes, diam, strategy, k_max, s_min):
    """Scaling factors of minimal variability within the tolerance."""
    return ex.run_optimize(cfg, n_axes, diam, strategy, k_max, s_min)


@cli.command()
@scale_option
@transform_option
@common_options
def verify(cfg, scale, transform):
    """Measure diagram perturbation under a transform and check every bound."""
    ts = _transforms(scale, transform)
    if len(ts) != 1:
        raise ValidationError("verify takes exactly one transform; use iterate for sequences")
    return ex.run_verify(cfg, ts[0])


@cli.command()
@click.option("--mode", type=click.Choice(ex.REGIME_MODES), default="contains-one", show_default=True)
@click.option("--max-points", type=int, default=30, show_default=True)
@click.option("--max-axes", type=int, default=5, show_default=True)
@common_options
def trials(cfg, mode, max_points, max_axes):
    """Randomized bound-verification campaign."""
    return ex.run_trials(cfg, mode, max_points, max_axes)


@cli.command()
@scale_option
@transform_option
@common_options
def iterate(cfg, scale, transform):
    """Apply a transform sequence and check the cumulative bounds."""
    return ex.run_iterate(cfg, _transforms(scale, transform))


@cli.command("case-study-rgb")
@common_options
def case_study_rgb(cfg):
    """RGB channel scaling for image augmentation."""
    return ex.run_case_study_rgb(cfg)


@cli.command("case-study-multimodal")
@click.option("--diam", type=float, default=200.0, show_default=True)
@click.option("--groups", default="300,512", show_default=True, help="Axis count per modality.")
@click.option("--ranges", default="1,100", show_default=True, help="Feature range per modality.")
@click.option("--verify-points", type=int, default=24, show_default=True)
@common_options
def case_study_multimodal(cfg, diam, groups, ranges, verify_points):
    """Per-modality scaling for multimodal feature normalization."""
    return ex.run_case_study_multimodal(cfg, diam, _int_list(groups), _float_list(ranges), verify_points)


@cli.command()
@click.option("--n", "n_axes", type=int, default=3, show_default=True)
@click.option("--distribution", type=click.Choice(["uniform", "truncnorm"]), default="uniform", show_default=True)
@click.option("--params", default="a=1,b=2", show_default=True, help="e.g. a=1,b=2 or mu=1,sigma=0.1,low=0.5,high=1.5")
@click.option("--diam", type=float, default=1.0, show_default=True)
@common_options
def montecarlo(cfg, n_axes, distribution, params, diam):
    """Monte Carlo estimate of the expected variability under random factors."""
    parsed = {}
    for item in filter(None, params.split(",")):
        key, _, value = item.partition("=")
        try:
            parsed[key.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"bad distribution parameter {item!r}") from None
    return ex.run_montecarlo(cfg, n_axes, distribution, parsed, diam)


@cli.command()
@scale_option
@common_options
def cloud(cfg, scale):
    """Emit the input or generated point cloud, optionally scaled."""
    ts = [io.parse_factors(s) for s in scale]
    if len(ts) > 1:
        raise ValidationError("cloud takes at most one --scale")
    return ex.run_cloud(cfg, ts[0] if ts else None)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="topostab", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except (BudgetError, BoundViolationError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
