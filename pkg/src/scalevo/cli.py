"""Command-line pipelines over scale datasets.

Each command reads delimited inputs, writes delimited outputs plus rendered
figures into ``--out``, and records a ``manifest.txt`` of its parameters.
Rerunning a command from its manifest (``--config out/manifest.txt``)
reproduces the primary outputs byte for byte; explicit flags override
manifest values. Randomized commands require an explicit ``--seed``.

Exit codes: 0 success, 1 usage error, 2 input-data error, 3 numerical
failure.
"""

from __future__ import annotations

import csv
import sys
import warnings
from pathlib import Path

import click
import numpy as np

from . import __version__
from .compare import (
    DEFAULT_BETA_GRID,
    interval_significance,
    melody_null_interval_sets,
    region_weights,
    run_comparison,
)
from .core import (
    DataFormatError,
    Scale,
    ScaleValidationError,
    interval_set,
    read_scales,
    write_scales,
)
from .costs import MODEL_NAMES, make_cost_model
from .extraction import extract_scale, pitch_histogram, read_pitch_track, write_gmm_report
from .generate import (
    GeneratorConfig,
    mcmc_generate,
    melody_population,
    null_range_study,
    population_summary,
)
from .harmonicity import EmptyIntervalSetError, scale_intervals_for_cost, write_score_table
from .melody import (
    StepDistribution,
    UniformStepSource,
    empirical_step_distribution,
    fit_is,
    fit_mc,
    melody_scale_probability,
    melody_step_pmf,
    MelodyParams,
    read_corpus_histogram,
    read_step_distribution,
    write_step_distribution,
)

MANIFEST_NAME = "manifest.txt"
_MANIFEST_SKIP = ("out", "config")


# ---------------------------------------------------------------------------
# Manifest and config handling
# ---------------------------------------------------------------------------


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ";".join(str(v) for v in value)
    return str(value)


def write_manifest(out_dir: Path, command: str, params: dict) -> None:
    lines = [f"command={command}"]
    for key in sorted(params):
        if key in _MANIFEST_SKIP or params[key] is None:
            continue
        lines.append(f"{key}={_format_value(params[key])}")
    (out_dir / MANIFEST_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_kv(path: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _apply_config(ctx: click.Context, params: dict) -> dict:
    """Fill parameters from a key=value config file; explicit flags win."""
    config_path = params.get("config")
    if not config_path:
        return params
    values = _read_kv(config_path)
    values.pop("command", None)
    by_name = {p.name: p for p in ctx.command.params}
    for key, raw in values.items():
        if key not in by_name or key in _MANIFEST_SKIP:
            continue
        source = ctx.get_parameter_source(key)
        if source is not None and source.name != "DEFAULT":
            continue  # explicitly provided flag wins
        param = by_name[key]
        if param.multiple:
            parts = [p for p in raw.split(";") if p]
            params[key] = tuple(param.type.convert(p, param, ctx) for p in parts)
        elif param.is_flag:
            params[key] = raw.lower() in ("true", "1", "yes")
        else:
            params[key] = param.type.convert(raw, param, ctx)
    return params


def _require(params: dict, *names: str) -> None:
    """Enforce required options after the config merge (flags or config)."""
    missing = [n for n in names if params.get(n) in (None, (), "")]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise click.UsageError(f"missing required option(s): {flags}")


def _prepare_out(params: dict) -> Path:
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                repr(float(v)) if isinstance(v, float) else v for v in row
            ])


def _write_kv_file(path: Path, items: dict) -> None:
    lines = [f"{k}={_format_value(v)}" for k, v in items.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_beta_grid(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(",")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise click.UsageError(f"--beta-grid expects LO,HI,N, got {text!r}") from exc
    if lo <= 0 or hi <= lo or n < 2:
        raise click.UsageError("--beta-grid needs 0 < LO < HI and N >= 2")
    return np.logspace(np.log10(lo), np.log10(hi), n)


def _load_or_build_dist(dist_path, scales_path, region_cap, bin_cents,
                        max_step) -> StepDistribution:
    if dist_path:
        return read_step_distribution(dist_path)
    if scales_path:
        scales = read_scales(scales_path)
        weights = region_weights(scales, region_cap)
        return empirical_step_distribution(scales, weights, bin_cents, max_step)
    raise click.UsageError("need --dist or --scales to define the step distribution")


def _cost_model_from_params(params: dict):
    return make_cost_model(
        params["model"],
        w=params.get("w", 20.0),
        n_partials=params.get("n_partials", 10),
        rho=params.get("rho", 1.0),
        canonical_g=params.get("hk_canonical_g", False),
        timbre_partials=params.get("timbre_partials", 10),
        timbre_rolloff=params.get("timbre_rolloff", 1.0),
        root_hz=params.get("root_hz", 261.6),
        complexity_w=params.get("complexity_w", 25.0),
    )


# shared option bundles -------------------------------------------------------


def _out_options(fn):
    fn = click.option("--out", required=True, type=click.Path(), help="output directory")(fn)
    fn = click.option("--config", type=click.Path(exists=True),
                      help="key=value file supplying defaults (e.g. a manifest)")(fn)
    fn = click.option("--no-figures", is_flag=True, default=False,
                      help="skip matplotlib figure rendering")(fn)
    return fn


def _model_options(fn):
    for opt in reversed([
        click.option("--model",
                     type=click.Choice(MODEL_NAMES + ("melody",)), help="cost model"),
        click.option("--w", type=float, default=20.0, show_default=True,
                     help="window width in cents (of/gp models)"),
        click.option("--n-partials", type=int, default=10, show_default=True,
                     help="overtone count (hp model)"),
        click.option("--rho", type=float, default=1.0, show_default=True,
                     help="overtone roll-off (hp model)"),
        click.option("--hk-canonical-g", is_flag=True, default=False,
                     help="bounded bandwidth-distance bump for the hk model"),
        click.option("--timbre-partials", type=int, default=10, show_default=True),
        click.option("--timbre-rolloff", type=float, default=1.0, show_default=True),
        click.option("--root-hz", type=float, default=261.6, show_default=True),
        click.option("--complexity-w", type=float, default=25.0, show_default=True,
                     help="clustering tolerance in cents (complexity model)"),
    ]):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(__version__)
def cli():
    """Model, generate, and comparatively evaluate musical scales."""


# ---------------------------------------------------------------------------
# fit-melody
# ---------------------------------------------------------------------------


@cli.command("fit-melody")
@click.option("--corpus", "corpora", multiple=True,
              type=click.Path(exists=True), help="melodic corpus CSV (repeatable)")
@click.option("--scales", type=click.Path(exists=True),
              help="scale dataset supplying the empirical step distribution")
@click.option("--r0", type=int, default=20, show_default=True,
              help="region weight cap")
@click.option("--bins", type=float, default=20.0, show_default=True,
              help="step histogram bin width in cents")
@click.option("--max-step", type=float, default=1700.0, show_default=True)
@_out_options
@click.pass_context
def cmd_fit_melody(ctx, **params):
    """Fit the motor-constraint decay to corpora, then the spacing parameters."""
    params = _apply_config(ctx, params)
    _require(params, "corpora", "scales")
    out = _prepare_out(params)
    i0_values = []
    for path in params["corpora"]:
        i0_values.append(fit_mc(read_corpus_histogram(path)))
    i0_values = np.array(i0_values)
    i0_mean = float(i0_values.mean())

    scales = read_scales(params["scales"])
    weights = region_weights(scales, params["r0"])
    dist = empirical_step_distribution(scales, weights, params["bins"], params["max_step"])
    is_fit = fit_is(dist, i0=100.0 * i0_mean)

    _write_rows(out / "i0_per_corpus.csv", ["corpus", "i0_semitones"],
                [(str(p), float(v)) for p, v in zip(params["corpora"], i0_values)])
    write_step_distribution(out / "step_distribution.csv", dist)
    fitted = MelodyParams(sigma_is=is_fit.sigma_is, melody_length=is_fit.melody_length,
                          i0=100.0 * i0_mean)
    curve = melody_step_pmf(fitted, dist.bin_edges)
    _write_rows(out / "melody_curve.csv", ["cents", "probability"],
                [(float(m), float(p)) for m, p in zip(dist.midpoints, curve)])
    report = {
        "n_corpora": i0_values.size,
        "i0_mean_semitones": i0_mean,
        "i0_ci_low_semitones": float(np.percentile(i0_values, 2.5)),
        "i0_ci_high_semitones": float(np.percentile(i0_values, 97.5)),
        "sigma_is_cents": is_fit.sigma_is,
        "melody_length": is_fit.melody_length,
        "fit_jsd": is_fit.jsd,
        "degenerate_distribution": is_fit.degenerate,
    }
    _write_kv_file(out / "params.txt", report)
    write_manifest(out, "fit-melody", params)
    if not params["no_figures"]:
        from . import plots

        plots.plot_i0_distribution(i0_values, out / "i0_distribution.png")
        plots.plot_step_distribution(
            dist.bin_edges, dist.probabilities, out / "step_fit.png",
            overlays={"fitted melody curve": (dist.midpoints, curve)})
    click.echo(f"fitted {i0_values.size} corpora; sigma={is_fit.sigma_is:g} cents, "
               f"L={is_fit.melody_length}, i0={i0_mean:.3f} st")


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------


@cli.command("score")
@click.option("--scales", type=click.Path(exists=True))
@click.option("--dist", type=click.Path(exists=True),
              help="step distribution CSV (melody model; default: built from --scales)")
@click.option("--r0", type=int, default=20, show_default=True)
@click.option("--bins", type=float, default=20.0, show_default=True)
@_model_options
@_out_options
@click.pass_context
def cmd_score(ctx, **params):
    """Score every scale in a dataset under one cost model."""
    params = _apply_config(ctx, params)
    _require(params, "scales", "model")
    out = _prepare_out(params)
    scales = read_scales(params["scales"])
    rows = []
    if params["model"] == "melody":
        dist = _load_or_build_dist(params["dist"], params["scales"], params["r0"],
                                   params["bins"], 1700.0)
        for s in scales:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                logp = melody_scale_probability(s, dist)
            if np.isfinite(logp):
                rows.append((s.id, float(-logp), s.n_steps, ""))
            else:
                rows.append((s.id, "", 0, "outside_support"))
    else:
        model = _cost_model_from_params(params)
        for s in scales:
            try:
                cost = model(s)
                used = len(scale_intervals_for_cost(s))
                rows.append((s.id, float(cost), used, ""))
            except EmptyIntervalSetError:
                rows.append((s.id, "", 0, "empty_interval_set"))
    _write_rows(out / "costs.csv", ["id", "cost", "n_intervals_used", "error"], rows)
    write_manifest(out, "score", params)
    click.echo(f"scored {len(rows)} scales with {params['model']}")


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


@cli.command("compare")
@click.option("--scales", type=click.Path(exists=True))
@click.option("--dist", type=click.Path(exists=True),
              help="baseline step distribution (default: built from --scales)")
@click.option("--beta", type=float, default=None,
              help="single bias strength instead of a grid search")
@click.option("--beta-grid", type=str, default=None, help="LO,HI,N logarithmic grid")
@click.option("--r0", type=int, default=20, show_default=True)
@click.option("--bins", type=float, default=20.0, show_default=True)
@click.option("--zsamples", type=int, default=100_000, show_default=True,
              help="baseline samples per normalization constant")
@click.option("--seed", type=int, default=None)
@_model_options
@_out_options
@click.pass_context
def cmd_compare(ctx, **params):
    """Likelihood-ratio comparison of a cost-biased model over the baseline."""
    params = _apply_config(ctx, params)
    _require(params, "scales", "model")
    if params["seed"] is None:
        raise click.UsageError("missing required option(s): --seed")
    if params["model"] == "melody":
        raise click.UsageError("melody is the baseline; choose a cost model to compare")
    out = _prepare_out(params)
    scales = read_scales(params["scales"])
    if not scales:
        raise DataFormatError(f"{params['scales']}: no scales")
    dist = _load_or_build_dist(params["dist"], params["scales"], params["r0"],
                               params["bins"], 1700.0)
    weights = region_weights(scales, params["r0"])
    if params["beta"] is not None:
        betas = np.array([params["beta"]])
    elif params["beta_grid"]:
        betas = _parse_beta_grid(params["beta_grid"])
    else:
        betas = DEFAULT_BETA_GRID
    model = _cost_model_from_params(params)
    result = run_comparison(model, scales, weights, dist, betas=betas,
                            n_samples=params["zsamples"], seed=params["seed"])
    _write_rows(out / "comparison.csv", ["scale_id", "llr", "weight"],
                [(s.id, float(l), float(w))
                 for s, l, w in zip(scales, result.llrs, result.weights)])
    _write_rows(out / "beta_scan.csv", ["beta", "weighted_mean_llr"],
                [(float(b), float(l)) for b, l in zip(result.betas, result.mean_llrs)])
    _write_rows(out / "logz.csv",
                ["model", "beta", "n_steps", "octave", "log_z", "stderr", "n_samples"],
                [(e.model_name, float(e.beta), e.n_steps,
                  "true" if e.octave else "false", float(e.log_z), float(e.stderr),
                  e.n_samples) for e in result.logz_entries])
    _write_kv_file(out / "summary.txt", {
        "model": model.name,
        "beta_star": result.beta_star,
        "weighted_mean_llr": result.best_llr,
        "frac_positive": result.frac_positive,
        "k_raw": result.k_raw,
        "k_kish": result.k_kish,
        "p_value_raw": result.p_value_raw,
        "p_value_kish": result.p_value_kish,
        "significant_raw": result.p_value_raw < 0.05,
        "beta_at_grid_boundary": result.at_boundary,
    })
    write_manifest(out, "compare", params)
    if not params["no_figures"]:
        from . import plots

        plots.plot_beta_scan(result.betas, result.mean_llrs, result.beta_star,
                             out / "beta_scan.png")
    if result.at_boundary and betas.size > 1:
        click.echo("warning: best beta sits on the grid boundary", err=True)
    click.echo(f"beta*={result.beta_star:g} mean LLR={result.best_llr:.4f} "
               f"p={result.p_value_raw:.4g}")


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


@cli.command("generate")
@click.option("--n-steps", type=int, default=None)
@click.option("--beta", type=float, default=0.0, show_default=True)
@click.option("--beta-grid", type=str, default=None,
              help="LO,HI,N grid: emit a divergence-versus-beta table")
@click.option("--octave", is_flag=True, default=False)
@click.option("--population-size", type=int, default=10_000, show_default=True)
@click.option("--n-repeats", type=int, default=10, show_default=True)
@click.option("--step-source", type=click.Choice(["empirical", "uniform"]),
              default="empirical", show_default=True)
@click.option("--dist", type=click.Path(exists=True),
              help="step distribution CSV for the empirical source")
@click.option("--scales", type=click.Path(exists=True),
              help="scale dataset to build the step distribution from")
@click.option("--ref-scales", type=click.Path(exists=True),
              help="reference dataset for the degree-distribution divergence")
@click.option("--uniform-max", type=float, default=600.0, show_default=True)
@click.option("--r0", type=int, default=20, show_default=True)
@click.option("--bins", type=float, default=20.0, show_default=True)
@click.option("--seed", type=int, default=None)
@_model_options
@_out_options
@click.pass_context
def cmd_generate(ctx, **params):
    """Generate a scale population from the baseline or a biased model."""
    params = _apply_config(ctx, params)
    _require(params, "model", "n_steps")
    if params["seed"] is None:
        raise click.UsageError("missing required option(s): --seed")
    out = _prepare_out(params)
    if params["step_source"] == "uniform":
        source = UniformStepSource(params["uniform_max"])
    else:
        source = _load_or_build_dist(params["dist"], params["scales"], params["r0"],
                                     params["bins"], 1700.0)
    reference_degrees = None
    if params["ref_scales"]:
        reference_degrees = _reference_degree_hist(
            params["ref_scales"], params["n_steps"], params["octave"],
            params["r0"], params["bins"])

    def summarize(pop):
        return population_summary(pop, bin_cents=params["bins"],
                                  reference_degrees=reference_degrees)

    if params["beta_grid"]:
        if params["model"] == "melody":
            raise click.UsageError("a beta grid needs a cost model, not the baseline")
        model = _cost_model_from_params(params)
        betas = _parse_beta_grid(params["beta_grid"])
        rows = []
        for i, beta in enumerate(betas):
            config = GeneratorConfig(
                n_steps=params["n_steps"], beta=float(beta), octave=params["octave"],
                population_size=params["population_size"],
                n_repeats=params["n_repeats"], seed=params["seed"])
            summary = summarize(mcmc_generate(model, config, source))
            rows.append((float(beta),
                         float(summary.jsd_degrees) if summary.jsd_degrees is not None
                         else "", float(summary.mean_cost)))
        _write_rows(out / "jsd_beta.csv", ["beta", "jsd_degrees", "mean_cost"], rows)
        write_manifest(out, "generate", params)
        if not params["no_figures"] and reference_degrees is not None:
            from . import plots

            plots.plot_jsd_curve([r[0] for r in rows], [r[1] for r in rows],
                                 out / "jsd_beta.png")
        click.echo(f"scanned {betas.size} bias values")
        return

    if params["model"] == "melody":
        if not isinstance(source, StepDistribution):
            raise click.UsageError("baseline generation needs the empirical source")
        pop = melody_population(params["n_steps"], source, params["octave"],
                                params["population_size"] * params["n_repeats"],
                                params["seed"])
    else:
        model = _cost_model_from_params(params)
        config = GeneratorConfig(
            n_steps=params["n_steps"], beta=params["beta"], octave=params["octave"],
            population_size=params["population_size"], n_repeats=params["n_repeats"],
            seed=params["seed"])
        pop = mcmc_generate(model, config, source)
    summary = summarize(pop)
    write_scales(out / "population.csv", pop.scales, costs=pop.costs)
    _write_rows(out / "step_hist.csv", ["bin_low", "bin_high", "probability"],
                [(float(lo), float(hi), float(p)) for lo, hi, p in
                 zip(summary.step_bin_edges[:-1], summary.step_bin_edges[1:],
                     summary.step_probs)])
    _write_rows(out / "degree_hist.csv", ["bin_low", "bin_high", "probability"],
                [(float(lo), float(hi), float(p)) for lo, hi, p in
                 zip(summary.degree_bin_edges[:-1], summary.degree_bin_edges[1:],
                     summary.degree_probs)])
    report = {"population_size": summary.size}
    if summary.mean_cost is not None:
        report["mean_cost"] = summary.mean_cost
    if summary.jsd_degrees is not None:
        report["jsd_degrees"] = summary.jsd_degrees
    _write_kv_file(out / "summary.txt", report)
    write_manifest(out, "generate", params)
    if not params["no_figures"]:
        from . import plots

        plots.plot_step_distribution(summary.step_bin_edges, summary.step_probs,
                                     out / "step_hist.png")
        plots.plot_degree_distribution(summary.degree_bin_edges, summary.degree_probs,
                                       out / "degree_hist.png",
                                       reference=reference_degrees)
    click.echo(f"generated {summary.size} scales")


def _reference_degree_hist(path, n_steps, octave, region_cap, bin_cents):
    ref = [s for s in read_scales(path)
           if s.n_steps == n_steps and bool(s.octave) == octave]
    if not ref:
        raise DataFormatError(
            f"{path}: no reference scales with {n_steps} steps (octave={octave})")
    weights = region_weights(ref, region_cap)
    edges = np.arange(0.0, 1700.0 + bin_cents, bin_cents)
    degrees = np.concatenate([
        np.asarray(s.degrees[1:-1] if s.octave else s.degrees[1:]) for s in ref
    ])
    degree_weights = np.concatenate([
        np.full(len(s.degrees) - (2 if s.octave else 1), w)
        for s, w in zip(ref, weights)
    ])
    hist, _ = np.histogram(degrees, bins=edges, weights=degree_weights)
    total = hist.sum()
    if total <= 0:
        raise DataFormatError(f"{path}: reference degrees all outside the binning")
    return hist / total


# ---------------------------------------------------------------------------
# significance
# ---------------------------------------------------------------------------


@cli.command("significance")
@click.option("--scales", type=click.Path(exists=True))
@click.option("--dist", type=click.Path(exists=True),
              help="baseline step distribution (default: built from --scales)")
@click.option("--bins", type=float, default=20.0, show_default=True)
@click.option("--n-resamples", type=int, default=1000, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--r0", type=int, default=20, show_default=True)
@click.option("--region-split", is_flag=True, default=False,
              help="also test each region with enough scales")
@click.option("--min-region-count", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=None)
@_out_options
@click.pass_context
def cmd_significance(ctx, **params):
    """Test which interval bins deviate from baseline-sampled scales."""
    params = _apply_config(ctx, params)
    _require(params, "scales")
    if params["seed"] is None:
        raise click.UsageError("missing required option(s): --seed")
    out = _prepare_out(params)
    scales = read_scales(params["scales"])
    if not scales:
        raise DataFormatError(f"{params['scales']}: no scales")
    dist = _load_or_build_dist(params["dist"], params["scales"], params["r0"],
                               params["bins"], 1700.0)

    def run(subset, suffix=""):
        empirical = [interval_set(s) for s in subset]
        nulls = melody_null_interval_sets(subset, dist, params["n_resamples"],
                                          params["seed"])
        rows = interval_significance(empirical, nulls, params["bins"], params["alpha"])
        _write_rows(
            out / f"significance{suffix}.csv",
            ["bin_low", "bin_high", "empirical_freq", "null_freq", "p",
             "significant_after_BH", "direction"],
            [(r.bin_low, r.bin_high, r.empirical_freq, r.null_freq, r.p_value,
              "true" if r.significant_after_bh else "false", r.direction)
             for r in rows])
        if not params["no_figures"]:
            from . import plots

            plots.plot_significance(rows, out / f"significance{suffix}.png")
        return rows

    rows = run(scales)
    notes = {"n_scales": len(scales),
             "n_significant": sum(r.significant_after_bh for r in rows)}
    if params["region_split"]:
        by_region: dict[str, list[Scale]] = {}
        for s in scales:
            by_region.setdefault(s.region, []).append(s)
        for region in sorted(by_region):
            subset = by_region[region]
            if len(subset) < params["min_region_count"]:
                notes[f"region_skipped_{region.replace(' ', '_')}"] = len(subset)
                continue
            sub_rows = run(subset, suffix=f"_{region.replace(' ', '_')}")
            notes[f"region_significant_{region.replace(' ', '_')}"] = sum(
                r.significant_after_bh for r in sub_rows)
    _write_kv_file(out / "summary.txt", notes)
    write_manifest(out, "significance", params)
    click.echo(f"{notes['n_significant']} significant bins "
               f"out of {len(rows)} tested")


# ---------------------------------------------------------------------------
# extract-scale
# ---------------------------------------------------------------------------


@cli.command("extract-scale")
@click.option("--track", type=click.Path(exists=True))
@click.option("--k", type=int, default=None, help="number of scale degrees")
@click.option("--k-range", type=str, default=None,
              help="LO,HI range for automatic selection")
@click.option("--bin", "bin_cents", type=float, default=5.0, show_default=True)
@click.option("--scale-type", type=click.Choice(["Vocal", "Instrumental"]),
              default="Vocal", show_default=True)
@click.option("--seed", type=int, default=None)
@_out_options
@click.pass_context
def cmd_extract_scale(ctx, **params):
    """Infer a scale from a pitch track via mixture fitting."""
    params = _apply_config(ctx, params)
    _require(params, "track")
    if params["seed"] is None:
        raise click.UsageError("missing required option(s): --seed")
    out = _prepare_out(params)
    track = read_pitch_track(params["track"])
    k = params["k"]
    k_range = None
    if params["k_range"]:
        try:
            lo, hi = (int(v) for v in params["k_range"].split(","))
        except ValueError as exc:
            raise click.UsageError("--k-range expects LO,HI integers") from exc
        k_range = range(lo, hi + 1)
    if (k is None) == (k_range is None):
        raise click.UsageError("provide exactly one of --k or --k-range")
    result = extract_scale(track, k=k, k_range=k_range,
                           bin_cents=params["bin_cents"], seed=params["seed"],
                           scale_type=params["scale_type"],
                           scale_id=Path(params["track"]).stem)
    write_gmm_report(out / "components.csv", result.fit)
    write_scales(out / "scale.csv", [result.scale])
    report = {
        "k": result.k,
        "log_likelihood": result.fit.log_likelihood,
        "converged": result.fit.converged,
        "equidistant": result.equidistant,
    }
    if result.bics is not None:
        for kk in sorted(result.bics):
            report[f"bic_{kk}"] = result.bics[kk]
    _write_kv_file(out / "report.txt", report)
    write_manifest(out, "extract-scale", params)
    if not params["no_figures"]:
        from . import plots

        hist = pitch_histogram(track, params["bin_cents"])
        plots.plot_gmm_fit(hist.bin_edges, hist.masses, result.fit.means,
                           result.fit.stds, result.fit.weights, out / "gmm_fit.png")
    click.echo(f"extracted {result.scale.n_steps + 1} degrees "
               f"(equidistant={result.equidistant})")


# ---------------------------------------------------------------------------
# score-table
# ---------------------------------------------------------------------------


@cli.command("score-table")
@_model_options
@_out_options
@click.pass_context
def cmd_score_table(ctx, **params):
    """Export a model's z-normalized interval score curve."""
    params = _apply_config(ctx, params)
    _require(params, "model")
    if params["model"] in ("melody", "complexity"):
        raise click.UsageError("score tables exist for interval-scoring models only")
    out = _prepare_out(params)
    model = _cost_model_from_params(params)
    table = model.table
    write_score_table(out / "score_table.csv", table)
    write_manifest(out, "score-table", params)
    if not params["no_figures"]:
        from . import plots

        plots.plot_score_table(table.grid, table.raw, table.z, table.name,
                               out / "score_table.png")
    click.echo(f"wrote score table for {table.name}")


# ---------------------------------------------------------------------------
# null-range
# ---------------------------------------------------------------------------


@cli.command("null-range")
@click.option("--n-steps-range", type=str, default="2,10", show_default=True)
@click.option("--range-cents", type=float, default=1700.0, show_default=True)
@click.option("--walkers", type=int, default=256, show_default=True)
@click.option("--chain-length", type=int, default=8000, show_default=True)
@click.option("--burn-in", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=None)
@_out_options
@click.pass_context
def cmd_null_range(ctx, **params):
    """Min/max step statistics of equally-likely range-bounded scales."""
    params = _apply_config(ctx, params)
    if params["seed"] is None:
        raise click.UsageError("missing required option(s): --seed")
    out = _prepare_out(params)
    try:
        lo, hi = (int(v) for v in params["n_steps_range"].split(","))
    except ValueError as exc:
        raise click.UsageError("--n-steps-range expects LO,HI integers") from exc
    rows = null_range_study(range(lo, hi + 1), params["range_cents"],
                            seed=params["seed"], n_walkers=params["walkers"],
                            chain_length=params["chain_length"],
                            burn_in=params["burn_in"])
    _write_rows(
        out / "null_range.csv",
        ["n_steps", "mc_mean_min_step", "mc_stderr_min_step",
         "mc_mean_max_step", "mc_stderr_max_step", "formula_min_step"],
        [(r.n_steps, r.mc_mean_min_step, r.mc_stderr_min_step,
          r.mc_mean_max_step, r.mc_stderr_max_step, r.formula_min_step)
         for r in rows])
    write_manifest(out, "null-range", params)
    if not params["no_figures"]:
        from . import plots

        plots.plot_null_range_study(rows, out / "null_range.png")
    click.echo(f"studied scale sizes {lo}..{hi}")


# ---------------------------------------------------------------------------
# entry point with documented exit codes
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except (DataFormatError, ScaleValidationError, FileNotFoundError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except (EmptyIntervalSetError, ValueError, ArithmeticError, RuntimeError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
