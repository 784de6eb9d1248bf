"""Subcommand CLI for the augmentation / normalization / scoring pipeline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Failures print a single machine-parseable line to stderr:

    error kind=<ExceptionName> exit=<code> msg=<message>

Artifacts are written atomically (temp file + rename) and contain no
timestamps, so reruns with identical inputs and seeds are byte-identical.
"""

from __future__ import annotations

import csv
import io
import sys
from pathlib import Path

import click
import numpy as np

from . import corpus, dsp, report, scoring, specaug as specaug_mod, vtln as vtln_mod
from .config import PipelineConfig, load_config, render_config
from .errors import (
    EXIT_NUMERIC,
    EXIT_USAGE,
    AsrBiasError,
    DataError,
    NumericError,
    TableFormatError,
)

WER_TABLE_STYLES = {"read": "Read", "hmi": "HMI"}


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="YAML pipeline config.")
@click.option("--seed", type=int, default=None,
              help="Override the config, SpecAugment, and VTLN seeds.")
@click.option("--jobs", type=int, default=None, help="Worker threads for per-utterance work.")
@click.pass_context
def cli(ctx, config_path, seed, jobs):
    """Speech augmentation, VTLN normalization, scoring, and bias reports."""
    cfg = load_config(config_path) if config_path else PipelineConfig()
    if seed is not None:
        cfg.seed = seed
        cfg.specaug.seed = seed
        cfg.vtln.seed = seed
    if jobs is not None:
        cfg.jobs = jobs
    ctx.obj = cfg


def entry():
    sys.exit(main(sys.argv[1:]))


def main(argv=None) -> int:
    """Run the CLI, mapping exceptions to the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.Abort:
        _print_error("Aborted", EXIT_USAGE, kind="Abort")
        return EXIT_USAGE
    except click.ClickException as exc:
        _print_error(exc.format_message(), EXIT_USAGE, kind=type(exc).__name__)
        return EXIT_USAGE
    except NumericError as exc:
        _print_error(str(exc), EXIT_NUMERIC, kind=type(exc).__name__)
        return EXIT_NUMERIC
    except AsrBiasError as exc:
        _print_error(str(exc), exc.exit_code, kind=type(exc).__name__)
        return exc.exit_code


def _print_error(message: str, code: int, kind: str) -> None:
    one_line = " ".join(str(message).split())
    print(f"error kind={kind} exit={code} msg={one_line}", file=sys.stderr)


def _resolve_audio(rec, audio_root):
    path = Path(rec.audio_path)
    if audio_root and not path.is_absolute():
        path = Path(audio_root) / path
    return path


# --------------------------------------------------------------------------
# corpus
# --------------------------------------------------------------------------


@cli.group("corpus")
def corpus_group():
    """Manifest and audio utilities."""


@corpus_group.command("validate")
@click.argument("manifest", type=click.Path())
@click.option("--audio-root", type=click.Path(), default=None)
@click.option("--check-audio", is_flag=True, help="Also read and validate every WAV file.")
@click.option("--allow-custom-labels", is_flag=True)
def corpus_validate(manifest, audio_root, check_audio, allow_custom_labels):
    """Validate a manifest (and optionally its audio files)."""
    records = corpus.load_manifest(manifest, allow_custom_labels=allow_custom_labels)
    groups = sorted({r.group for r in records})
    styles = sorted({r.style for r in records})
    click.echo(f"records: {len(records)}")
    click.echo(f"groups: {','.join(groups)}")
    click.echo(f"styles: {','.join(styles)}")
    if check_audio:
        rates = set()
        for rec in records:
            wave = corpus.read_wav(_resolve_audio(rec, audio_root))
            rates.add(wave.sample_rate)
        click.echo(f"sample_rates: {','.join(str(r) for r in sorted(rates))}")
        if rates - {16000}:
            click.echo("warning: sample rates other than 16000 Hz present", err=True)


# --------------------------------------------------------------------------
# features
# --------------------------------------------------------------------------


@cli.group()
def features():
    """Feature extraction."""


@features.command("extract")
@click.argument("manifest", type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="Output feature archive.")
@click.option("--kind", type=click.Choice(["logmel", "mfcc", "power"]), default="logmel")
@click.option("--alpha", type=float, default=1.0, help="Warp factor applied to every utterance.")
@click.option("--audio-root", type=click.Path(), default=None)
@click.pass_obj
def features_extract(cfg: PipelineConfig, manifest, output, kind, alpha, audio_root):
    """Extract features for every utterance in a manifest."""
    records = corpus.load_manifest(manifest)

    def one(rec):
        wave = corpus.read_wav(_resolve_audio(rec, audio_root))
        return rec.utt_id, _extract(cfg, wave, kind, alpha)

    entries = vtln_mod.parallel_map(one, records, cfg.jobs)
    corpus.write_feature_archive(entries, output)
    click.echo(f"wrote {len(entries)} entries to {output}")


def _extract(cfg: PipelineConfig, wave, kind, alpha):
    if kind == "power":
        return dsp.power_spectrum(wave, cfg.frame)
    if kind == "logmel":
        return dsp.log_mel(wave, cfg.frame, cfg.logmel, alpha=alpha)
    return dsp.mfcc(
        wave,
        cfg.vtln.frame,
        cfg.vtln.mel,
        n_ceps=cfg.vtln.n_ceps,
        alpha=alpha,
        mean_norm=cfg.vtln.mean_norm,
    )


# --------------------------------------------------------------------------
# augment
# --------------------------------------------------------------------------


@cli.group()
def augment():
    """Data augmentation."""


@augment.command("speed")
@click.argument("manifest", type=click.Path())
@click.option("--out-dir", required=True, type=click.Path(), help="Directory for perturbed WAVs.")
@click.option("--out-manifest", type=click.Path(), default=None,
              help="Output manifest path (default: <out-dir>/manifest.tsv).")
@click.option("--factors", default=None, help="Comma-separated speed factors (default from config).")
@click.option("--audio-root", type=click.Path(), default=None)
@click.pass_obj
def augment_speed(cfg: PipelineConfig, manifest, out_dir, out_manifest, factors, audio_root):
    """Write one speed-perturbed copy of every utterance per factor.

    Output utterance ids get a '#sp<factor>' suffix."""
    records = corpus.load_manifest(manifest)
    if factors is None:
        factor_list = list(cfg.speed_factors)
    else:
        try:
            factor_list = [float(v) for v in factors.split(",") if v.strip()]
        except ValueError as exc:
            raise DataError(f"bad --factors value {factors!r}") from exc
    if not factor_list:
        raise DataError("no speed factors given")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_records = []
    total_clipped = 0
    for rec in records:
        wave = corpus.read_wav(_resolve_audio(rec, audio_root))
        for beta in factor_list:
            tag = f"{beta:g}"
            out_id = f"{rec.utt_id}#sp{tag}"
            wav_path = out_dir / f"{rec.utt_id}_sp{tag}.wav"
            total_clipped += corpus.write_wav(dsp.speed_perturb(wave, beta), wav_path)
            out_records.append(
                corpus.UtteranceRecord(
                    utt_id=out_id,
                    audio_path=str(wav_path),
                    transcript=rec.transcript,
                    speaker_id=rec.speaker_id,
                    group=rec.group,
                    style=rec.style,
                )
            )
    manifest_path = Path(out_manifest) if out_manifest else out_dir / "manifest.tsv"
    corpus.write_manifest(out_records, manifest_path)
    if total_clipped:
        click.echo(f"warning: clipped {total_clipped} samples to full scale", err=True)
    click.echo(f"wrote {len(out_records)} utterances to {manifest_path}")


@augment.command("specaug")
@click.argument("archive", type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path())
@click.pass_obj
def augment_specaug(cfg: PipelineConfig, archive, output):
    """Apply SpecAugment to every log-mel entry of a feature archive."""
    arc = corpus.read_feature_archive(archive)
    policy = cfg.specaug
    entries = []
    for utt_id in arc.ids():
        feat = arc.get(utt_id)
        if feat.kind != "logmel":
            raise DataError(f"SpecAugment needs log-mel features, got {feat.kind!r} for {utt_id!r}")
        rng = specaug_mod.utterance_rng(policy.seed, utt_id)
        entries.append((utt_id, specaug_mod.spec_augment(feat, policy, rng)))
    corpus.write_feature_archive(entries, output)
    click.echo(f"wrote {len(entries)} augmented entries to {output}")


# --------------------------------------------------------------------------
# vtln
# --------------------------------------------------------------------------


@cli.group()
def vtln():
    """VTLN model training, warp estimation, and normalization."""


@vtln.command("train")
@click.argument("manifest", type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="Output model file.")
@click.option("--components", type=int, default=None, help="GMM components (default from config).")
@click.option("--em-iters", type=int, default=None)
@click.option("--outer-iters", type=int, default=None)
@click.option("--audio-root", type=click.Path(), default=None)
@click.pass_obj
def vtln_train(cfg: PipelineConfig, manifest, output, components, em_iters, outer_iters, audio_root):
    """Train a VTLN model on the audio of a manifest."""
    records = corpus.load_manifest(manifest)
    vcfg = cfg.vtln
    if components is not None:
        vcfg.n_components = components
    if em_iters is not None:
        vcfg.em_iters = em_iters
    if outer_iters is not None:
        vcfg.outer_iters = outer_iters
    model = vtln_mod.train_vtln(records, vcfg, audio_root=audio_root, jobs=cfg.jobs)
    model.save(output)
    click.echo(f"wrote VTLN model ({model.gmm.n_components} components, "
               f"{len(model.grid)} grid points) to {output}")


@vtln.command("estimate")
@click.argument("manifest", type=click.Path())
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="Output warp TSV.")
@click.option("--stats", "stats_path", type=click.Path(), default=None,
              help="Also write per-group five-number summaries (TSV).")
@click.option("--boxplot", "boxplot_path", type=click.Path(), default=None,
              help="Also render the per-group warp boxplot (SVG).")
@click.option("--audio-root", type=click.Path(), default=None)
@click.pass_obj
def vtln_estimate(cfg: PipelineConfig, manifest, model_path, output, stats_path, boxplot_path, audio_root):
    """Estimate a warp factor per utterance by likelihood grid search."""
    records = corpus.load_manifest(manifest)
    model = vtln_mod.VtlnModel.load(model_path)
    vcfg = cfg.vtln

    def one(rec):
        wave = corpus.read_wav(_resolve_audio(rec, audio_root))
        feats = dsp.mfcc(
            wave, vcfg.frame, vcfg.mel, n_ceps=vcfg.n_ceps, alpha=1.0, mean_norm=vcfg.mean_norm
        )
        return vtln_mod.estimate_warp(feats, model, utt_id=rec.utt_id)

    assignments = vtln_mod.parallel_map(one, records, cfg.jobs)
    vtln_mod.write_assignments(assignments, output)
    click.echo(f"wrote {len(assignments)} warp assignments to {output}")

    if stats_path or boxplot_path:
        by_group: dict[str, list[float]] = {}
        for rec, a in zip(records, assignments):
            by_group.setdefault(rec.group, []).append(a.alpha)
        stats = vtln_mod.warp_statistics(by_group)
        if stats_path:
            _write_warp_stats(stats, stats_path)
            click.echo(f"wrote group statistics to {stats_path}")
        if boxplot_path:
            corpus.atomic_write_text(boxplot_path, report.plot_warp_boxplot(stats))
            click.echo(f"wrote boxplot to {boxplot_path}")


def _write_warp_stats(stats, path):
    lines = ["#group\tmin\tq1\tmedian\tq3\tmax"]
    for group, s in stats.items():
        lines.append(
            f"{group}\t{s['min']:.6f}\t{s['q1']:.6f}\t{s['median']:.6f}"
            f"\t{s['q3']:.6f}\t{s['max']:.6f}"
        )
    corpus.atomic_write_text(path, "\n".join(lines) + "\n")


@vtln.command("apply")
@click.argument("manifest", type=click.Path())
@click.option("--warps", "warps_path", required=True, type=click.Path(),
              help="Warp TSV from 'vtln estimate'.")
@click.option("-o", "--output", required=True, type=click.Path(), help="Output feature archive.")
@click.option("--kind", type=click.Choice(["logmel", "mfcc"]), default="logmel")
@click.option("--audio-root", type=click.Path(), default=None)
@click.pass_obj
def vtln_apply(cfg: PipelineConfig, manifest, warps_path, output, kind, audio_root):
    """Extract features with each utterance's estimated warp factor."""
    records = corpus.load_manifest(manifest)
    alphas = {a.utt_id: a.alpha for a in vtln_mod.read_assignments(warps_path)}
    missing = [r.utt_id for r in records if r.utt_id not in alphas]
    if missing:
        raise DataError(f"no warp factor for utterances: {', '.join(missing[:5])}")

    def one(rec):
        wave = corpus.read_wav(_resolve_audio(rec, audio_root))
        if kind == "logmel":
            fm = vtln_mod.apply_warp(wave, alphas[rec.utt_id], "logmel", cfg.frame, cfg.logmel)
        else:
            fm = vtln_mod.apply_warp(
                wave, alphas[rec.utt_id], "mfcc", cfg.vtln.frame, cfg.vtln.mel,
                n_ceps=cfg.vtln.n_ceps, mean_norm=cfg.vtln.mean_norm,
            )
        return rec.utt_id, fm

    entries = vtln_mod.parallel_map(one, records, cfg.jobs)
    corpus.write_feature_archive(entries, output)
    click.echo(f"wrote {len(entries)} normalized entries to {output}")


# --------------------------------------------------------------------------
# score
# --------------------------------------------------------------------------


@cli.command("score")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--hyp", "hyp_path", required=True, type=click.Path(), help="Hypothesis TSV.")
@click.option("-o", "--output", required=True, type=click.Path(), help="Output score CSV.")
@click.option("--mode", type=click.Choice(["word", "char"]), default=None)
@click.option("--label", default="model", help="Model label recorded in the CSV.")
@click.option("--align-out", type=click.Path(), default=None,
              help="Also write per-utterance aligned-text tables.")
@click.pass_obj
def score_cmd(cfg: PipelineConfig, manifest, hyp_path, output, mode, label, align_out):
    """Score hypotheses against manifest transcripts, pooled per group/style."""
    records = corpus.load_manifest(manifest)
    hyps = corpus.read_hypotheses(hyp_path)
    missing = [r.utt_id for r in records if r.utt_id not in hyps]
    if missing:
        raise DataError(f"missing hypotheses for: {', '.join(missing[:5])}")
    mode = mode or cfg.scoring.mode
    if align_out:
        blocks = []
        for rec in records:
            ref = scoring.tokenize(
                rec.transcript, mode, cfg.scoring.lowercase, cfg.scoring.strip_punct
            )
            hyp = scoring.tokenize(
                hyps[rec.utt_id], mode, cfg.scoring.lowercase, cfg.scoring.strip_punct
            )
            blocks.append(scoring.format_alignment(rec.utt_id, scoring.align(ref, hyp)))
        corpus.atomic_write_text(align_out, "\n\n".join(blocks) + "\n")
    cells: dict[tuple[str, str], list] = {}
    for rec in records:
        cells.setdefault((rec.group, rec.style), []).append(
            (rec.utt_id, rec.transcript, hyps[rec.utt_id])
        )
    rows = []
    for (group, style), pairs in cells.items():
        gs = scoring.corpus_error_rate(
            pairs,
            mode=mode,
            group=group,
            style=style,
            lowercase=cfg.scoring.lowercase,
            strip_punct=cfg.scoring.strip_punct,
            model=label,
        )
        rows.append(gs)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "group", "style", "mode", "error_rate", "n_errors", "n_ref", "n_utts"])
    for gs in rows:
        writer.writerow(
            [gs.model, gs.group, gs.style, mode, repr(gs.error_rate),
             gs.n_errors, gs.n_ref_total, gs.utterance_count]
        )
    corpus.atomic_write_text(output, buf.getvalue())
    click.echo(f"wrote {len(rows)} group scores to {output}")


# --------------------------------------------------------------------------
# bias-report
# --------------------------------------------------------------------------


def parse_wer_table(path) -> list[dict]:
    """Parse a WER table TSV: header 'model rd cts read:G... hmi:G...'.

    Returns one dict per model row: {"model", "norm": {style: rate},
    "rates": {style: {group: rate}}}.
    """
    path = Path(path)
    if not path.exists():
        raise TableFormatError(f"WER table not found: {path}")
    lines = [
        ln
        for ln in path.read_text(encoding="utf-8").splitlines()
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise TableFormatError(f"{path}: empty WER table")
    header = [h.strip() for h in lines[0].split("\t")]
    if header[:3] != ["model", "rd", "cts"]:
        raise TableFormatError(
            f"{path}: header must start with 'model\\trd\\tcts', got {header[:3]}"
        )
    col_styles = []
    for col in header[3:]:
        if ":" not in col:
            raise TableFormatError(f"{path}: group column {col!r} must look like 'read:DC'")
        style_key, group = col.split(":", 1)
        if style_key not in WER_TABLE_STYLES:
            raise TableFormatError(f"{path}: unknown style {style_key!r} in column {col!r}")
        col_styles.append((WER_TABLE_STYLES[style_key], group))

    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != len(header):
            raise TableFormatError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}"
            )
        try:
            norm = {"Read": float(fields[1]), "HMI": float(fields[2])}
            rates: dict[str, dict[str, float]] = {}
            for (style, group), value in zip(col_styles, fields[3:]):
                rates.setdefault(style, {})[group] = float(value)
        except ValueError as exc:
            raise TableFormatError(f"{path}:{lineno}: non-numeric WER cell ({exc})") from exc
        out.append({"model": fields[0], "norm": norm, "rates": rates})
    return out


@cli.command("bias-report")
@click.option("--wer-table", type=click.Path(), default=None,
              help="WER table TSV (one row per model).")
@click.option("--scores", "score_files", type=click.Path(), multiple=True,
              help="Score CSVs from 'asrbias score' (repeatable).")
@click.option("-o", "--out-dir", required=True, type=click.Path())
def bias_report_cmd(wer_table, score_files, out_dir):
    """Compute bias measures and write CSV, shaded HTML, and SVG figures."""
    if bool(wer_table) == bool(score_files):
        raise click.UsageError("give exactly one of --wer-table or --scores")
    reports = []
    if wer_table:
        for row in parse_wer_table(wer_table):
            reports.append(
                scoring.bias_report_from_rates(row["rates"], row["norm"], model=row["model"])
            )
        diverse_means = {
            row["model"]: float(
                np.mean([r for style in row["rates"].values() for r in style.values()])
            )
            for row in parse_wer_table(wer_table)
        }
    else:
        by_model: dict[str, list[scoring.GroupScore]] = {}
        for f in score_files:
            for gs in _read_score_csv(f):
                by_model.setdefault(gs.model, []).append(gs)
        diverse_means = {}
        for model, cells in by_model.items():
            reports.append(scoring.bias_report(cells, model=model))
            rates = [c.error_rate for c in cells if c.group != corpus.NORM_GROUP]
            diverse_means[model] = float(np.mean(rates))
    if not reports:
        raise DataError("nothing to report")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_bias_outputs(reports, diverse_means, out)
    click.echo(f"wrote bias report for {len(reports)} model(s) to {out}")


def _read_score_csv(path) -> list[scoring.GroupScore]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"score file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        try:
            out.append(
                scoring.GroupScore(
                    group=row["group"],
                    style=row["style"],
                    error_rate=float(row["error_rate"]),
                    n_ref_total=int(row["n_ref"]),
                    utterance_count=int(row["n_utts"]),
                    n_errors=int(row["n_errors"]),
                    model=row["model"],
                )
            )
        except (KeyError, ValueError) as exc:
            raise DataError(f"{path}: bad score row {row!r} ({exc})") from exc
    return out


def _write_bias_outputs(reports, diverse_means, out: Path):
    styles = reports[0].styles
    # Summary CSV + shaded HTML (per-style overall bias, then the average).
    summary_rows = []
    for rep in reports:
        summary_rows.append(
            [rep.per_style_overall[s] for s in styles] + [rep.average_overall]
        )
    col_labels = list(styles) + ["Average"]
    row_labels = [rep.model for rep in reports]
    html, _ = report.render_shaded_table(summary_rows, row_labels, col_labels, corner_label="model")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model"] + [f"overall_bias_{s.lower()}" for s in styles]
                    + ["overall_bias_average", "diverse_mean_wer"])
    for rep, row in zip(reports, summary_rows):
        writer.writerow([rep.model] + [repr(v) for v in row] + [repr(diverse_means[rep.model])])
    corpus.atomic_write_text(out / "bias_summary.csv", buf.getvalue())
    corpus.atomic_write_text(out / "bias_summary.html", html)

    # Per-cell details.
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "style", "group", "norm_rate", "individual_bias", "outperforms_norm"])
    for rep in reports:
        for style in rep.styles:
            for group in rep.groups:
                writer.writerow(
                    [
                        rep.model,
                        style,
                        group,
                        repr(rep.norm_rates[style]),
                        repr(rep.individual[(style, group)]),
                        int((style, group) in rep.assumption_violations),
                    ]
                )
    corpus.atomic_write_text(out / "bias_by_group.csv", buf.getvalue())

    # Cross-style per-group averages (the bar-chart data) + figure.
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "group", "average_bias"])
    bars: dict[str, dict[str, float]] = {}
    for rep in reports:
        bars[rep.model] = dict(rep.per_group_average)
        for group in rep.groups:
            writer.writerow([rep.model, group, repr(rep.per_group_average[group])])
    corpus.atomic_write_text(out / "bias_group_average.csv", buf.getvalue())
    corpus.atomic_write_text(out / "bias_bars.svg", report.plot_bias_bars(bars))


# --------------------------------------------------------------------------
# plot
# --------------------------------------------------------------------------


@cli.group()
def plot():
    """Standalone figure rendering."""


@plot.command("warps")
@click.option("--warps", "warps_path", required=True, type=click.Path())
@click.option("--manifest", required=True, type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="Output SVG.")
def plot_warps(warps_path, manifest, output):
    """Boxplot of estimated warp factors per speaker group."""
    records = corpus.load_manifest(manifest)
    group_of = {r.utt_id: r.group for r in records}
    by_group: dict[str, list[float]] = {}
    for rec in records:
        by_group.setdefault(rec.group, [])
    for a in vtln_mod.read_assignments(warps_path):
        if a.utt_id not in group_of:
            raise DataError(f"warp entry {a.utt_id!r} is not in the manifest")
        by_group[group_of[a.utt_id]].append(a.alpha)
    stats = vtln_mod.warp_statistics(by_group)
    corpus.atomic_write_text(output, report.plot_warp_boxplot(stats))
    click.echo(f"wrote {output}")


@plot.command("bias")
@click.option("--by-group", "by_group_csv", required=True, type=click.Path(),
              help="bias_group_average.csv from 'bias-report'.")
@click.option("-o", "--output", required=True, type=click.Path(), help="Output SVG.")
def plot_bias(by_group_csv, output):
    """Grouped bar chart of per-group bias by model."""
    path = Path(by_group_csv)
    if not path.exists():
        raise DataError(f"bias CSV not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    bars: dict[str, dict[str, float]] = {}
    try:
        for row in rows:
            bars.setdefault(row["model"], {})[row["group"]] = float(row["average_bias"])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad bias row ({exc})") from exc
    if not bars:
        raise DataError(f"{path}: no bias rows")
    corpus.atomic_write_text(output, report.plot_bias_bars(bars))
    click.echo(f"wrote {output}")


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------


@cli.command("config-dump")
@click.pass_obj
def config_dump(cfg: PipelineConfig):
    """Print the effective configuration as YAML."""
    click.echo(render_config(cfg), nl=False)


if __name__ == "__main__":
    entry()
