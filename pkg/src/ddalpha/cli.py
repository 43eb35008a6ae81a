#!/usr/bin/env python3
"""
ddalpha CLI - command line interface of the DD-alpha classifier.

Commands: train, predict, ddplot, simulate, bench and evaluate. Every file
written starts with a ``# ddalpha <version> seed=<seed>`` comment line.
Exit codes: 0 success, 2 input error, 3 training error, 4 experiment failure.
"""

import functools
import logging
import sys
from typing import Any, Dict, Optional

import click

from ddalpha import __version__
from ddalpha.classifier import ClassifierConfig, OutsiderRule, predict_many, train
from ddalpha.config import build_config, find_project_file, load_project_config, resolve_threads
from ddalpha.datasets import read_dataset
from ddalpha.ddplot import build_ddplot, write_svg
from ddalpha.error_classification import classify_error
from ddalpha.errors import ConfigError, DDAlphaError
from ddalpha.evaluation import CSV_FIELDS, compare_outsider_rules, evaluate, parse_scheme
from ddalpha.log_setup import configure_logging, new_run_id
from ddalpha.model_io import load_model, save_model
from ddalpha.reporting import render_table, write_csv
from ddalpha.simulation import (
    AMR_FIELDS,
    SUMMARY_FIELDS,
    TIMING_FIELDS,
    ExperimentPlan,
    parse_grid,
    run_experiment,
    run_timing,
)

logger = logging.getLogger("ddalpha.cli")

DEPTH_CHOICES = ["zonoid", "mahal", "mahal-mcd"]
DEFAULT_GRID = "d=5,10,15,20 n=200,500,1000"


def handle_errors(func):
    """Map ddalpha errors to their classified exit codes."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except Exception as e:
            classification = classify_error(e)
            logger.error("command failed", extra={"classification": classification.to_dict()},
                         exc_info=not isinstance(e, DDAlphaError))
            click.secho(f"❌ {classification.user_message}", fg="red", err=True)
            click.echo(f"   {classification.suggested_action}", err=True)
            sys.exit(classification.exit_code)
    return wrapper


def classifier_options(func):
    """Flags shared by every command that trains a classifier."""
    options = [
        click.option("--depth", type=click.Choice(DEPTH_CHOICES), default=None,
                     help="Depth of the depth transform (default: zonoid)."),
        click.option("--degree", type=click.IntRange(min=1), default=None,
                     help="Maximal degree p of the polynomial extension (default: 2)."),
        click.option("--outsiders", default=None,
                     help="Outsider rule: random, knn, knn-mahal, knn-mahal-mcd, maxdepth, maxdepth-mcd."),
        click.option("--k", "k", type=click.IntRange(min=1), default=None,
                     help="Neighbours for the k-NN outsider rules (default: 1)."),
        click.option("--seed", type=click.IntRange(min=0), default=None, help="Random seed (default: 0)."),
        click.option("--degree-cv/--no-degree-cv", default=None,
                     help="Choose the degree by cross-validation over 1..3."),
        click.option("--knn-cv/--no-knn-cv", default=None,
                     help="Choose k of the k-NN outsider rules by leave-one-out."),
        click.option("--mcd-restarts", type=click.IntRange(min=1), default=None,
                     help="Random restarts of the MCD estimator (default: 500)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def resolve_config(ctx: click.Context, flags: Dict[str, Any]) -> ClassifierConfig:
    """Defaults, then the project file, then command line flags."""
    project = load_project_config(find_project_file(ctx.obj.get("CONFIG_PATH")))
    config = build_config(project)
    settings = {
        "depth": flags.get("depth"),
        "degree": flags.get("degree"),
        "outsiders": flags.get("outsiders"),
        "k": flags.get("k"),
        "seed": flags.get("seed"),
        "degree_cv": flags.get("degree_cv"),
        "knn_cv": flags.get("knn_cv"),
        "mcd_restarts": flags.get("mcd_restarts"),
    }
    if "threads" not in project:
        settings["threads"] = resolve_threads()
    return build_config(settings, base=config)


@click.group()
@click.version_option(version=__version__, prog_name="ddalpha")
@click.option("--debug", is_flag=True, help="Enable debug output for detailed operation logging.")
@click.option("--log-json", is_flag=True, help="Emit log records as JSON objects.")
@click.option("--log-file", type=click.Path(dir_okay=False), default=None,
              help="Also write JSON log records to this rotating file.")
@click.option("--config", "config_path", envvar="DDALPHA_CONFIG", type=click.Path(dir_okay=False),
              default=None, help="Project configuration file (default: ./ddalpha.yml).")
@click.pass_context
def main(ctx, debug, log_json, log_file, config_path):
    """ddalpha - depth-based DD-alpha classification."""
    ctx.ensure_object(dict)
    configure_logging(logging.DEBUG if debug else logging.WARNING, json_output=log_json, log_file=log_file)
    ctx.obj["DEBUG"] = debug
    ctx.obj["CONFIG_PATH"] = config_path
    ctx.obj["RUN_ID"] = new_run_id()


@main.command(name="train")
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False), help="Training CSV.")
@click.option("--label", required=True, help="Name of the label column.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Model file to write.")
@classifier_options
@click.pass_context
@handle_errors
def train_cmd(ctx, data, label, out, **flags):
    """Train a DD-alpha model on a labelled CSV."""
    config = resolve_config(ctx, flags)
    ds = read_dataset(data, label).to_dataset()
    logger.info("training", extra={"run_id": ctx.obj["RUN_ID"], "n": ds.n, "d": ds.d, "q": ds.q})
    model = train(ds, config)
    save_model(model, out)

    rows = []
    for (j, k), separator in sorted(model.separators.items()):
        rows.append([f"{ds.class_names[j]} vs {ds.class_names[k]}", separator.degree,
                     len(separator.steps), separator.training_amr])
    render_table("Pairwise training AMR", ["pair", "degree", "steps", "AMR"], rows)
    click.secho(f"✅ Model written to {out}", fg="green")


@main.command(name="predict")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False), help="Points to classify.")
@click.option("--label", default=None, help="Label column to ignore (and score against) if present.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Predictions CSV.")
@click.pass_context
@handle_errors
def predict_cmd(ctx, model_path, data, label, out):
    """Classify every row of a CSV with a trained model."""
    model = load_model(model_path)
    table = read_dataset(data, label, expected_d=model.d)
    predictions = predict_many(model, table.points, threads=resolve_threads())

    names = list(model.class_names)
    fields = ["row", "label", "votes", "outsider"] + [f"depth_{name}" for name in names]
    rows = []
    for i, p in enumerate(predictions):
        row: Dict[str, Any] = {
            "row": i,
            "label": names[p.label],
            "votes": ";".join(str(int(v)) for v in p.votes),
            "outsider": p.outsider,
        }
        row.update({f"depth_{name}": float(p.depth_vector[j]) for j, name in enumerate(names)})
        rows.append(row)
    write_csv(out, fields, rows, seed=model.seed)

    outsiders = sum(p.outsider for p in predictions)
    click.echo(f"Classified {len(predictions)} point(s), {outsiders} outsider(s)")
    if table.labels is not None:
        wrong = sum(names[p.label] != truth for p, truth in zip(predictions, table.labels))
        click.echo(f"AMR against column '{label}': {wrong / len(predictions):.6f}")
    click.secho(f"✅ Predictions written to {out}", fg="green")


@main.command(name="ddplot")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--label", default=None, help="Label column of the data, if any.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="DD-plot CSV.")
@click.option("--curve-out", type=click.Path(dir_okay=False), default=None,
              help="CSV of the separator curve samples (two classes only).")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), default=None,
              help="SVG scatter plot with the separator curve (two classes only).")
@click.pass_context
@handle_errors
def ddplot_cmd(ctx, model_path, data, label, out, curve_out, svg_path):
    """Write depth coordinates of every point with respect to each class."""
    model = load_model(model_path)
    table = read_dataset(data, label, expected_d=model.d)
    plot = build_ddplot(model, table.points, table.labels, threads=resolve_threads())
    write_csv(out, plot.fieldnames, plot.csv_rows(), seed=model.seed)

    if (curve_out or svg_path) and model.q != 2:
        raise ConfigError(f"separator curves need two classes, model has {model.q}")
    if curve_out:
        write_csv(curve_out, plot.curve_fieldnames, plot.curve_rows(), seed=model.seed)
    if svg_path:
        write_svg(plot, svg_path)
    click.echo(f"{int(plot.outsider.sum())} outsider(s), {int(plot.hull_vertex.sum())} hull vertex point(s)")
    click.secho(f"✅ DD-plot written to {out}", fg="green")


@main.command(name="simulate")
@click.option("--setting", required=True, type=click.IntRange(1, 10), help="Distributional setting 1..10.")
@click.option("--reps", type=click.IntRange(min=1), default=100, show_default=True, help="Replications.")
@click.option("--n-train", type=click.IntRange(min=1), default=200, show_default=True,
              help="Training points per class.")
@click.option("--n-test", type=click.IntRange(min=1), default=500, show_default=True,
              help="Test points per class.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="AMR CSV.")
@click.option("--summary-out", type=click.Path(dir_okay=False), default=None, help="Summary CSV.")
@classifier_options
@click.pass_context
@handle_errors
def simulate_cmd(ctx, setting, reps, n_train, n_test, out, summary_out, **flags):
    """Repeat train-then-test on one distributional setting."""
    config = resolve_config(ctx, flags)
    plan = ExperimentPlan(setting=setting, n_train=n_train, n_test=n_test,
                          replications=reps, seed=config.seed)
    result = run_experiment(plan, config, threads=config.threads)
    write_csv(out, AMR_FIELDS, result.csv_rows(), seed=plan.seed)
    if summary_out:
        write_csv(summary_out, SUMMARY_FIELDS, result.summary_rows(), seed=plan.seed)

    summary = result.summary()
    render_table(f"Setting {setting}: AMR over {reps} replication(s)",
                 ["statistic", "value"], [[k, v] for k, v in summary.items()])
    click.secho(f"✅ AMR sample written to {out}", fg="green")


@main.command(name="bench")
@click.option("--grid", default=DEFAULT_GRID, show_default=True, help='Grid such as "d=5 n=200".')
@click.option("--setting", "kind", type=click.Choice(["location", "location-scale"]),
              default="location", show_default=True)
@click.option("--reps", type=click.IntRange(min=1), default=100, show_default=True,
              help="Repetitions per grid cell.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Timing CSV.")
@classifier_options
@click.pass_context
@handle_errors
def bench_cmd(ctx, grid, kind, reps, out, **flags):
    """Time training plus classification of 2500 points over a (d, n) grid."""
    config = resolve_config(ctx, flags)
    cells = parse_grid(grid)
    rows = run_timing(cells, kind=kind, repetitions=reps, seed=config.seed, config=config)
    write_csv(out, TIMING_FIELDS, [row.csv_row() for row in rows], seed=config.seed)
    render_table(f"Train + classify times ({kind}), seconds", ["d", "n", "mean", "sd"],
                 [[row.d, row.n, row.mean_s, row.sd_s] for row in rows])
    click.secho(f"✅ Timings written to {out}", fg="green")


@main.command(name="evaluate")
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--label", required=True, help="Name of the label column.")
@click.option("--scheme", type=click.Choice(["train-test", "kfold", "loo"]), default="loo", show_default=True)
@click.option("--folds", type=click.IntRange(min=2), default=10, show_default=True, help="k of k-fold.")
@click.option("--train-per-class", type=click.IntRange(min=1), default=None,
              help="Training points per class for train-test.")
@click.option("--train-total", type=click.IntRange(min=1), default=None,
              help="Training points overall for train-test.")
@click.option("--compare", multiple=True,
              help="Outsider rule to compare on identical splits; repeat for several.")
@click.option("--timings", is_flag=True, help="Include timings in the CSV.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="EvalReport CSV.")
@classifier_options
@click.pass_context
@handle_errors
def evaluate_cmd(ctx, data, label, scheme, folds, train_per_class, train_total, compare,
                 timings, out, **flags):
    """Cross-validate the classifier on a labelled CSV."""
    config = resolve_config(ctx, flags)
    ds = read_dataset(data, label).to_dataset()
    split = parse_scheme(scheme, k=folds, train_per_class=train_per_class,
                         train_total=train_total, seed=config.seed)
    if compare:
        rules = [OutsiderRule.parse(text, k=config.outsider_rule.k) for text in compare]
        reports = list(compare_outsider_rules(ds, split, config, rules, threads=config.threads).values())
    else:
        reports = [evaluate(ds, split, config, threads=config.threads)]

    rows = [row for report in reports for row in report.csv_rows(timings=timings)]
    write_csv(out, CSV_FIELDS, rows, seed=config.seed)
    for report in reports:
        click.echo(report.summary_block())
        click.echo("")
    click.secho(f"✅ Evaluation written to {out}", fg="green")


if __name__ == "__main__":
    main()
