"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""
from __future__ import annotations

import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import click
import numpy as np
import pandas as pd

from ..action_units import dominant_au_sequence
from ..analytics.explain import ExplainReport, percentile_explain
from ..analytics.fusion import fuse_decisions
from ..analytics.labels import aggregate_video
from ..analytics.metrics import MetricsReport, classification_metrics, regression_metrics
from ..codebook import Codebook, kineme_trajectories, learn_kinemes
from ..exceptions import ConfigError, DataError, KinemeError, NumericalError
from .config import load_config
from .corpus import encode_manifest, load_corpus, load_entry, save_corpus
from .crossval import run_crossval, run_fixed_split
from .manifest import Manifest, VideoManifestEntry, load_manifest, save_manifest
from .models import MODEL_NAMES, ModelSpec
from .openface import write_openface_csv
from .synth import SynthConfig, synth_generate

logger = logging.getLogger("kineme")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class State:
    cfg: object
    seed: int
    out_dir: Path
    jobs: int

    def out(self, name):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML or JSON config file.")
@click.option("--seed", type=int, default=None, help="Seed for every randomized stage.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def cli(ctx, config_path, seed, out_dir, jobs, verbose):
    """Kineme learning, encoding and trait prediction."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = load_config(config_path)
    if seed is None:
        seed = cfg.codebook.seed
    cfg.codebook = replace(cfg.codebook, seed=seed)
    ctx.obj = State(cfg, seed, Path(out_dir), jobs)


@cli.command()
@click.option("--n-videos", type=int, default=30, show_default=True)
@click.option("--duration", type=float, default=20.0, show_default=True, help="Seconds per video.")
@click.option("--noise", type=float, default=0.005, show_default=True, help="Pose noise sigma (rad).")
@click.option("--kinemes", "n_kinemes", type=int, default=4, show_default=True)
@click.option("--persistence", type=float, default=0.8, show_default=True)
@click.pass_obj
def synth(st, n_videos, duration, noise, n_kinemes, persistence):
    """Write a synthetic corpus (CSV files + manifest) with a planted codebook."""
    high = tuple(range(1, n_kinemes // 2 + 1))
    ds = synth_generate(SynthConfig(n_kinemes=n_kinemes, n_videos=n_videos, duration_s=duration, noise=noise,
                                    persistence=persistence, high_symbols=high, fps=st.cfg.codebook.fps,
                                    seed=st.seed))
    vid_dir = st.out("videos")
    vid_dir.mkdir(exist_ok=True)
    rng = np.random.default_rng([st.seed, 3])
    tags = rng.choice(["train", "val", "test"], size=n_videos, p=[0.7, 0.1, 0.2])
    entries = []
    for v, tag in zip(ds.videos, tags):
        write_openface_csv(vid_dir / f"{v.video_id}.csv", v.pose, v.aus)
        entries.append(VideoManifestEntry(v.video_id, f"videos/{v.video_id}.csv", {"trait": v.score}, str(tag),
                                          ds.config.fps))
    save_manifest(Manifest("synthetic", ("trait",), entries), st.out("manifest.json"))
    truth = {
        "planted": ds.planted.tolist(),
        "window_symbols": {v.video_id: v.window_symbols.tolist() for v in ds.videos},
    }
    st.out("planted.json").write_text(json.dumps(truth))
    click.echo(f"wrote {n_videos} videos and manifest.json to {st.out_dir}")


@cli.command()
@click.option("--manifest", "manifests", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--split", default=None, help="Only use entries with this split tag.")
@click.option("--kinemes", "n_kinemes", type=int, default=None)
@click.option("--rank", type=int, default=None)
@click.option("-o", "--output", default="codebook.json", show_default=True)
@click.pass_obj
def learn(st, manifests, split, n_kinemes, rank, output):
    """Learn a kineme codebook from the pose tracks of one or more manifests."""
    cfg = st.cfg.codebook
    if n_kinemes is not None:
        cfg = replace(cfg, n_kinemes=n_kinemes)
    if rank is not None:
        cfg = replace(cfg, rank=rank)
    series = []
    for mpath in manifests:
        m = load_manifest(mpath)
        for e in m.entries:
            if split is None or e.split == split:
                series.append(load_entry(m, e, st.cfg.columns)[0])
    cb = learn_kinemes(series, cfg)
    cb.save(st.out(output))
    click.echo(f"learned K={cb.n_kinemes} kinemes (r={cb.rank}) from {cb.meta['n_segments']} segments")


@cli.command()
@click.option("--manifest", required=True, type=click.Path(dir_okay=False))
@click.option("--codebook", "codebook_path", required=True, type=click.Path(dir_okay=False))
@click.option("--chunk-s", type=float, default=None, help="Thin-slice length; whole videos when omitted.")
@click.option("-o", "--output", default="corpus.json", show_default=True)
@click.pass_obj
def encode(st, manifest, codebook_path, chunk_s, output):
    """Encode videos into kineme and dominant-AU sequences."""
    m = load_manifest(manifest)
    cb = Codebook.load(codebook_path)
    chunk_s = chunk_s if chunk_s is not None else st.cfg.chunk_s
    videos = encode_manifest(m, cb, st.cfg.columns, chunk_s, st.cfg.au_window_s, st.cfg.au_step_s, st.jobs)
    save_corpus(st.out(output), videos, cb.n_kinemes, m.traits, chunk_s)
    rows = [
        {"video_id": v.video_id, "chunk": c.index, "window": i, "kineme": int(k)}
        for v in videos for c in v.chunks for i, k in enumerate(c.kinemes)
    ]
    pd.DataFrame(rows).to_csv(st.out(Path(output).stem + "_kinemes.csv"), index=False)
    click.echo(f"encoded {len(videos)} videos, {sum(len(v.chunks) for v in videos)} chunks")


@cli.command()
@click.option("--manifest", required=True, type=click.Path(dir_okay=False))
@click.option("--window-s", type=float, default=None)
@click.option("--step-s", type=float, default=None)
@click.option("-o", "--output", default="aus.csv", show_default=True)
@click.pass_obj
def aus(st, manifest, window_s, step_s, output):
    """Dominant-AU sequences per video (one row per window)."""
    m = load_manifest(manifest)
    window_s = window_s or st.cfg.au_window_s
    step_s = step_s or st.cfg.au_step_s
    frames = []
    for e in m.entries:
        track = load_entry(m, e, st.cfg.columns)[1].resample(st.cfg.codebook.fps)
        seq = dominant_au_sequence(track, window_s, step_s)
        df = pd.DataFrame(seq.dominance, columns=list(seq.au_names))
        df.insert(0, "start_s", seq.window_starts)
        df.insert(0, "window", np.arange(len(seq)))
        df.insert(0, "video_id", e.video_id)
        frames.append(df)
    pd.concat(frames).to_csv(st.out(output), index=False)
    click.echo(f"wrote AU sequences for {len(frames)} videos")


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--trait", "traits", multiple=True, help="Defaults to every trait in the corpus.")
@click.option("--percentile", type=float, default=10.0, show_default=True)
@click.option("-o", "--output", default="explain", show_default=True, help="Output stem (.csv and .txt).")
@click.pass_obj
def explain(st, corpus_path, traits, percentile, output):
    """Most frequent kinemes and AUs in the top / bottom percentile videos."""
    videos, header = load_corpus(corpus_path)
    traits = traits or header["traits"]
    rows = []
    for t in traits:
        rows.extend(percentile_explain(videos, t, percentile, header["n_kinemes"]).rows)
    report = ExplainReport(rows)
    report.to_csv(st.out(output + ".csv"))
    text = report.format_table()
    st.out(output + ".txt").write_text(text + "\n")
    click.echo(text)


def _spec(st, model, task, n_kinemes):
    params = dict(st.cfg.lstm)
    params.update(st.cfg.hmm)
    params["variance"] = st.cfg.pca_variance
    return ModelSpec(model, task, params, n_kinemes)


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--model", type=click.Choice(MODEL_NAMES), required=True)
@click.option("--trait", required=True)
@click.option("--task", type=click.Choice(["regression", "classification"]), default="regression", show_default=True)
@click.option("-o", "--output", default="model", show_default=True, help="Output stem.")
@click.pass_obj
def train(st, corpus_path, model, trait, task, output):
    """Train on the 'train' split (early stopping on 'val') and score the 'test' split."""
    videos, header = load_corpus(corpus_path)
    spec = _spec(st, model, task, header["n_kinemes"])
    report = run_fixed_split(videos, spec, trait, st.cfg.val_fraction, st.seed)
    d = report.details
    tm, tec, pred, p_high = d["model"], d["chunks"], d["pred"], d["p_high"]
    st.out(output + ".json").write_text(json.dumps(tm.to_dict()))
    pd.DataFrame({
        "video_id": [c.video_id for c in tec],
        "chunk": [c.index for c in tec],
        "prediction": pred,
        "p_high": p_high if p_high is not None else np.full(len(tec), np.nan),
        "target": d["target"],
    }).to_csv(st.out(output + "_predictions.csv"), index=False)
    est = getattr(tm, "model_", None)
    if est is not None and getattr(est, "loss_trace_", None):
        pd.DataFrame(est.loss_trace_).to_csv(st.out(output + "_loss.csv"), index=False)
    click.echo(report.format_table())


@cli.command()
@click.option("--val", "val_path", required=True, type=click.Path(dir_okay=False),
              help="CSV with p_kin, p_au, target columns.")
@click.option("--test", "test_path", type=click.Path(dir_okay=False), help="CSV with p_kin, p_au columns.")
@click.option("--task", type=click.Choice(["regression", "classification"]), default="regression", show_default=True)
@click.option("-o", "--output", default="fused.csv", show_default=True)
@click.pass_obj
def fuse(st, val_path, test_path, task, output):
    """Choose the decision-fusion weight on validation scores and apply it."""
    val = _read_csv(val_path, ("p_kin", "p_au", "target"))
    test = _read_csv(test_path, ("p_kin", "p_au")) if test_path else val
    fr = fuse_decisions(val.p_kin, val.p_au, val.target, task, test.p_kin, test.p_au)
    out = test.copy()
    out["fused"] = fr.scores
    if task == "classification":
        out["label"] = (fr.scores > 0.5).astype(int)
    out.to_csv(st.out(output), index=False)
    click.echo(f"alpha*={fr.alpha:.2f} val_metric={fr.metric:.4f} (kin {fr.metric_kin:.4f}, au {fr.metric_au:.4f})")


@cli.command(name="eval")
@click.option("--predictions", required=True, type=click.Path(dir_okay=False),
              help="CSV with prediction and target columns (optional video_id, p_high).")
@click.option("--task", type=click.Choice(["regression", "classification"]), default="regression", show_default=True)
@click.option("-o", "--output", default="metrics.csv", show_default=True)
@click.pass_obj
def eval_cmd(st, predictions, task, output):
    """Metrics of a prediction file at chunk level and, given video ids, video level."""
    df = _read_csv(predictions, ("prediction", "target"))
    metric = regression_metrics if task == "regression" else classification_metrics
    cast = float if task == "regression" else int
    reports = [MetricsReport(task, [metric(df.prediction.astype(cast).values, df.target.astype(cast).values)])]
    if "video_id" in df:
        vp, vt = [], []
        for _, g in df.groupby("video_id", sort=True):
            ph = g.p_high.values if "p_high" in g and g.p_high.notna().all() else None
            vp.append(aggregate_video(g.prediction.astype(cast).values, task, ph))
            vt.append(g.target.iloc[0])
        reports.append(MetricsReport(task, [metric(np.array(vp, dtype=cast), np.array(vt, dtype=cast))], "video"))
    pd.concat([r.summary_frame() for r in reports]).to_csv(st.out(output), index=False)
    for r in reports:
        click.echo(r.format_table())


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--model", type=click.Choice(MODEL_NAMES), required=True)
@click.option("--trait", required=True)
@click.option("--task", type=click.Choice(["regression", "classification"]), default="regression", show_default=True)
@click.option("--folds", type=int, default=None)
@click.option("--repeats", type=int, default=None)
@click.option("--val-fraction", type=float, default=None)
@click.option("-o", "--output", default="crossval", show_default=True, help="Output stem.")
@click.pass_obj
def crossval(st, corpus_path, model, trait, task, folds, repeats, val_fraction, output):
    """Repeated k-fold video-level cross-validation."""
    videos, header = load_corpus(corpus_path)
    spec = _spec(st, model, task, header["n_kinemes"])
    report = run_crossval(
        videos, spec, trait,
        folds or st.cfg.folds, repeats or st.cfg.repeats,
        st.cfg.val_fraction if val_fraction is None else val_fraction,
        st.seed, st.jobs,
    )
    report.chunk.to_csv(st.out(output + "_chunk.csv"))
    report.video.to_csv(st.out(output + "_video.csv"))
    st.out(output + ".txt").write_text(report.format_table() + "\n")
    meta = {"seed": st.seed, "model": model, "trait": trait, "task": task,
            "splits": [s.__dict__ for s in report.splits]}
    st.out(output + "_splits.json").write_text(json.dumps(meta))
    click.echo(report.format_table())


@cli.command()
@click.option("--codebook", "codebook_path", required=True, type=click.Path(dir_okay=False))
@click.option("--svg/--no-svg", default=True, show_default=True)
@click.option("-o", "--output", default="kinemes", show_default=True, help="Output stem.")
@click.pass_obj
def plot(st, codebook_path, svg, output):
    """Kineme trajectories as CSV (radians) and an SVG grid (degrees)."""
    cb = Codebook.load(codebook_path)
    traj, table = kineme_trajectories(cb)
    table.to_csv(st.out(output + ".csv"), index=False)
    if svg:
        _plot_svg(traj, cb.fps, st.out(output + ".svg"))
    click.echo(f"wrote {traj.shape[0]} kineme trajectories")


def _plot_svg(traj, fps, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    K, _, ell = traj.shape
    cols = int(np.ceil(np.sqrt(K)))
    rows = int(np.ceil(K / cols))
    fig, axes = plt.subplots(rows, cols, figsize=(2.4 * cols, 1.8 * rows), sharex=True, sharey=True, squeeze=False)
    t = np.arange(ell) / fps
    for j, ax in enumerate(axes.flat):
        if j >= K:
            ax.axis("off")
            continue
        for c, name in enumerate(("pitch", "yaw", "roll")):
            ax.plot(t, np.rad2deg(traj[j, c]), label=name, lw=1)
        ax.set_title(f"kineme {j + 1}", fontsize=8)
    axes.flat[0].legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _read_csv(path, required):
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"{path}: {exc}") from None
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    return df


def run(argv=None):
    """Invoke the CLI and return its exit code instead of exiting."""
    try:
        cli.main(args=argv, prog_name="kineme", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, json.JSONDecodeError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERIC
    except KinemeError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
