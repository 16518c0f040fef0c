"""Command-line entry points.

Commands: synth, train, detect, eval, bench, bootstrap, heatmap. Configuration
is layered: values from --config (JSON) are overridden by explicit flags. Every
run writes a resolved-config snapshot next to its outputs and can be re-run
from that snapshot; seeds are always logged.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .classifier.svm import SvmConfig, SvmModel, train_svm
from .core.frames import open_frame_source
from .core.manifest import DatasetManifest, load_events, load_segment_payload, save_events
from .core.types import EventDocument, SbdError, TransitionEvent
from .evalbench.bench import benchmark
from .evalbench.heatmap import filter_heatmap, save_heatmap
from .evalbench.metrics import evaluate_corpus
from .network.model import C3DsbdConfig
from .network.train import Checkpoint, ManifestDataset, TrainSchedule, train
from .pipeline.detect import Detector
from .pipeline.postprocess import PostProcessConfig
from .synthgen.bootstrap import export_bootstrap_candidates, import_bootstrap_package
from .synthgen.dataset import SynthesisSpec, synthesize_dataset

log = logging.getLogger("sbdkit")


def _setup_logging(command: str, seed: int) -> str:
    run_id = f"{command}-{time.strftime('%Y%m%d-%H%M%S')}-s{seed}"
    logging.basicConfig(
        level=logging.INFO,
        format=f"%(asctime)s {run_id} %(levelname)s %(message)s",
        stream=sys.stderr,
        force=True,
    )
    log.info("run_id=%s seed=%d", run_id, seed)
    return run_id


def _resolve(args: argparse.Namespace, keys: list[str]) -> dict:
    """Layer config file under explicit flags; flags win."""
    resolved: dict = {}
    if getattr(args, "config", None):
        resolved.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _write_snapshot(out_dir: Path, command: str, resolved: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    snapshot = dict(resolved, command=command)
    path = out_dir / f"{command}-config.json"
    path.write_text(json.dumps(snapshot, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("resolved config -> %s", path)


def _load_sources(spec_path: str) -> list[tuple]:
    """sources.json: [{"uri": ..., "annotations": path-or-null, "fps": 25.0}, ...]"""
    path = Path(spec_path)
    if not path.exists():
        raise SbdError(f"sources file not found: {spec_path}")
    listing = json.loads(path.read_text(encoding="utf-8"))
    sources = []
    for item in listing:
        uri = item["uri"]
        if not Path(uri).is_absolute():
            uri = str((path.parent / uri).resolve())
        source = open_frame_source(uri, fps=item.get("fps"))
        events = load_events(path.parent / item["annotations"]).events if item.get("annotations") else []
        sources.append((source, events))
    return sources


def cmd_synth(args) -> int:
    resolved = _resolve(args, ["sources", "spec", "out", "seed", "workers", "payload"])
    out_dir = Path(resolved["out"])
    _write_snapshot(out_dir, "synth", resolved)
    spec_path = Path(resolved["spec"])
    if not spec_path.exists():
        raise SbdError(f"synthesis spec not found: {spec_path}")
    spec = SynthesisSpec.from_json(json.loads(spec_path.read_text(encoding="utf-8")))
    if resolved.get("payload"):
        spec.payload_format = resolved["payload"]
    sources = _load_sources(resolved["sources"])
    manifest = synthesize_dataset(
        sources, spec, seed=int(resolved.get("seed", 0)), out_dir=out_dir,
        workers=int(resolved.get("workers", 1)),
    )
    log.info("synthesized %s segments: %s", len(manifest.entries), manifest.counts)
    print(out_dir / "manifest.jsonl")
    return 0


def cmd_train(args) -> int:
    keys = [
        "manifest", "out", "seed", "classes", "filters", "fc_width", "norm",
        "epochs", "batch", "momentum", "base_lr", "dropout", "svm_layer", "svm_c",
        "svm_per_class",
    ]
    resolved = _resolve(args, keys)
    out_dir = Path(resolved["out"])
    _write_snapshot(out_dir, "train", resolved)
    manifest_path = Path(resolved["manifest"])
    if not manifest_path.exists():
        raise SbdError(f"manifest not found: {manifest_path}")
    manifest = DatasetManifest.read(manifest_path)

    config = C3DsbdConfig(
        num_classes=int(resolved.get("classes", 3)),
        conv_filters=tuple(resolved["filters"]) if resolved.get("filters") else C3DsbdConfig().conv_filters,
        fc_width=int(resolved.get("fc_width", C3DsbdConfig().fc_width)),
        dropout=float(resolved.get("dropout", 0.5)),
        normalization=str(resolved.get("norm", "batch_norm")),
    )
    schedule = TrainSchedule(
        base_lr=float(resolved.get("base_lr", 1e-4)),
        epochs=int(resolved.get("epochs", 6)),
        batch_size=int(resolved.get("batch", 20)),
        momentum=float(resolved.get("momentum", 0.9)),
    )
    seed = int(resolved.get("seed", 0))
    checkpoint = train(
        manifest, manifest_path.parent, schedule=schedule, seed=seed, config=config, log_every=20
    )
    ckpt_path = out_dir / "checkpoint.pt"
    checkpoint.save(ckpt_path)
    log.info("checkpoint -> %s (final acc %s)", ckpt_path, checkpoint.log["final_per_class_accuracy"])

    layer = str(resolved.get("svm_layer", "fc8"))
    data = ManifestDataset(manifest, manifest_path.parent, config.class_names)
    per_class = int(resolved.get("svm_per_class", 0))  # 0 = use everything
    labels = data.labels()
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for c in range(config.num_classes):
        idx = np.flatnonzero(labels == c)
        if per_class and len(idx) > per_class:
            idx = rng.permutation(idx)[:per_class]
        chosen.extend(int(i) for i in idx)
    from .network.train import extract_features

    segments = np.stack([data.load(i) for i in chosen])
    feats = extract_features(segments, layer, checkpoint, batch_size=schedule.batch_size)
    names = [config.class_names[labels[i]] for i in chosen]
    svm = train_svm(feats, names, SvmConfig(c=float(resolved.get("svm_c", 1.0)), feature_layer=layer, seed=seed))
    svm_path = out_dir / "svm.json"
    svm.save(svm_path)
    log.info("svm -> %s (train acc %.3f)", svm_path, svm.metadata["training_accuracy"])
    print(ckpt_path)
    return 0


def cmd_detect(args) -> int:
    keys = ["video", "checkpoint", "svm", "out", "seed", "threshold", "batch", "fps", "dump_labelings", "bypass"]
    resolved = _resolve(args, keys)
    out_dir = Path(resolved["out"])
    _write_snapshot(out_dir, "detect", resolved)
    source = open_frame_source(resolved["video"], fps=resolved.get("fps"))
    checkpoint = Checkpoint.load(resolved["checkpoint"])
    svm = None
    if resolved.get("svm") and not resolved.get("bypass"):
        svm = SvmModel.load(resolved["svm"])
    ppconfig = PostProcessConfig(bhattacharyya_threshold=float(resolved.get("threshold", 0.2)))
    detector = Detector(checkpoint, svm=svm, ppconfig=ppconfig, batch_size=int(resolved.get("batch", 20)))
    labelings: list = []
    events = detector.detect(source, collect_labelings=labelings)
    video_id = Path(resolved["video"]).name
    doc = EventDocument(video_id=video_id, events=events)
    out_path = out_dir / "detections.json"
    save_events(doc, out_path)
    if resolved.get("dump_labelings"):
        dump = [
            {"index": l.index, "start_frame": l.start_frame, "label": l.label, "score": l.score}
            for l in labelings
        ]
        (out_dir / "labelings.json").write_text(json.dumps(dump, indent=2) + "\n", encoding="utf-8")
    log.info("%d events -> %s", len(events), out_path)
    print(out_path)
    return 0


def _load_event_docs(path_str: str) -> list[EventDocument]:
    path = Path(path_str)
    if path.is_dir():
        return [load_events(p) for p in sorted(path.glob("*.json"))]
    blob = json.loads(path.read_text(encoding="utf-8"))
    if isinstance(blob, list):
        return [EventDocument.from_json(item) for item in blob]
    return [EventDocument.from_json(blob)]


def cmd_eval(args) -> int:
    keys = ["detections", "annotations", "out", "mode", "averaging", "policy"]
    resolved = _resolve(args, keys)
    out_dir = Path(resolved["out"])
    _write_snapshot(out_dir, "eval", resolved)
    dets = {d.video_id: d for d in _load_event_docs(resolved["detections"])}
    anns = {a.video_id: a for a in _load_event_docs(resolved["annotations"])}
    missing = sorted(set(anns) - set(dets))
    for video_id in missing:  # undetected videos still count their annotations as misses
        dets[video_id] = EventDocument(video_id=video_id, events=[])
    pairs = [(dets[v], anns[v]) for v in sorted(anns)]
    result = evaluate_corpus(
        pairs,
        policy=str(resolved.get("policy", "greedy-max")),
        mode=str(resolved.get("mode", "strict")),
        averaging=str(resolved.get("averaging", "per_transition")),
    )
    (out_dir / "report.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if result["averaging"] == "per_transition":
        from .evalbench.metrics import EvalReport, LabelCounts

        report = EvalReport(policy=result["report"]["policy"], mode=result["report"]["mode"])
        for label, c in result["report"]["per_label"].items():
            report.per_label[label] = LabelCounts(tp=c["tp"], fp=c["fp"], fn=c["fn"])
        report.overall = LabelCounts(**{k: result["report"]["overall"][k] for k in ("tp", "fp", "fn")})
        table = report.format_table()
    else:
        table = (
            f"per-sequence mean over {result['videos']} videos: "
            f"P={result['precision']:.3f} R={result['recall']:.3f} F={result['f_score']:.3f}"
        )
    (out_dir / "report.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    return 0


def cmd_bench(args) -> int:
    keys = ["video", "checkpoint", "svm", "out", "batch_sizes", "reps", "include_decode", "fps", "threshold"]
    resolved = _resolve(args, keys)
    out_dir = Path(resolved["out"])
    _write_snapshot(out_dir, "bench", resolved)
    source = open_frame_source(resolved["video"], fps=resolved.get("fps"))
    checkpoint = Checkpoint.load(resolved["checkpoint"])
    svm = SvmModel.load(resolved["svm"]) if resolved.get("svm") else None
    detector = Detector(
        checkpoint, svm=svm,
        ppconfig=PostProcessConfig(bhattacharyya_threshold=float(resolved.get("threshold", 0.2))),
    )
    batch_sizes = resolved.get("batch_sizes", [1] + list(range(10, 101, 10)))
    if isinstance(batch_sizes, str):
        batch_sizes = [int(b) for b in batch_sizes.split(",") if b]
    report = benchmark(
        detector, source, batch_sizes,
        reps=int(resolved.get("reps", 2)),
        include_decode=bool(resolved.get("include_decode", False)),
    )
    report.save(out_dir / "throughput.json")
    table = report.format_table()
    (out_dir / "throughput.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    return 0


def cmd_bootstrap(args) -> int:
    if args.action == "export":
        keys = ["detections", "video", "out", "fps"]
        resolved = _resolve(args, keys)
        out_dir = Path(resolved["out"])
        _write_snapshot(out_dir, "bootstrap", resolved)
        docs = _load_event_docs(resolved["detections"])
        video_paths = [Path(p) for p in str(resolved["video"]).split(",")]
        sources = {p.name: open_frame_source(str(p), fps=resolved.get("fps")) for p in video_paths}
        detections = {doc.video_id: doc.events for doc in docs if doc.video_id in sources}
        package = export_bootstrap_candidates(detections, sources, out_dir / "package")
        log.info("bootstrap package -> %s", package)
        print(package)
        return 0
    resolved = _resolve(args, ["package", "out"])
    out_dir = Path(resolved.get("out", resolved["package"]))
    _write_snapshot(out_dir, "bootstrap", resolved)
    manifest = import_bootstrap_package(resolved["package"])
    log.info("imported bootstrap manifest: %s", manifest.counts)
    print(Path(resolved["package"]) / "manifest.jsonl")
    return 0


def cmd_heatmap(args) -> int:
    keys = ["video", "segment", "start_frame", "checkpoint", "out", "fps"]
    resolved = _resolve(args, keys)
    out_dir = Path(resolved["out"])
    _write_snapshot(out_dir, "heatmap", resolved)
    checkpoint = Checkpoint.load(resolved["checkpoint"])
    if resolved.get("segment"):
        frames = np.load(resolved["segment"])
    else:
        from .core.frames import _window_frames

        source = open_frame_source(resolved["video"], fps=resolved.get("fps"))
        frames, _ = _window_frames(source, int(resolved.get("start_frame", 0)), 16, "resize")
    image = filter_heatmap(frames, checkpoint)
    out_path = out_dir / "heatmap.png"
    save_heatmap(image, out_path)
    log.info("heatmap -> %s", out_path)
    print(out_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbdkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; explicit flags override it")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("synth", help="synthesize a labeled transition dataset")
    common(p)
    p.add_argument("--sources", help="sources.json listing videos/image dirs + annotations")
    p.add_argument("--spec", help="synthesis spec JSON (counts per label, min_offset, ...)")
    p.add_argument("--payload", choices=["npy", "png"])
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the 3D CNN and the feature SVM")
    common(p)
    p.add_argument("--manifest", help="dataset manifest (JSON lines)")
    p.add_argument("--classes", type=int, choices=[3, 4])
    p.add_argument("--filters", type=int, nargs=5, metavar="F")
    p.add_argument("--fc-width", dest="fc_width", type=int)
    p.add_argument("--norm", choices=["batch_norm", "lrn"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--momentum", type=float)
    p.add_argument("--base-lr", dest="base_lr", type=float)
    p.add_argument("--dropout", type=float)
    p.add_argument("--svm-layer", dest="svm_layer", choices=["fc6", "fc7", "fc8"])
    p.add_argument("--svm-c", dest="svm_c", type=float)
    p.add_argument("--svm-per-class", dest="svm_per_class", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="detect transitions in a video")
    common(p)
    p.add_argument("--video", help="video file or image directory")
    p.add_argument("--checkpoint")
    p.add_argument("--svm")
    p.add_argument("--bypass", action="store_const", const=True, default=None,
                   help="softmax argmax on fc8, no SVM")
    p.add_argument("--threshold", type=float, help="Bhattacharyya drop threshold")
    p.add_argument("--batch", type=int)
    p.add_argument("--fps", type=float)
    p.add_argument("--dump-labelings", dest="dump_labelings", action="store_const", const=True, default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="evaluate detections against annotations")
    common(p)
    p.add_argument("--detections", help="detections JSON file or directory")
    p.add_argument("--annotations", help="annotations JSON file or directory")
    p.add_argument("--mode", choices=["strict", "combined"])
    p.add_argument("--averaging", choices=["per_transition", "per_sequence"])
    p.add_argument("--policy", choices=["greedy-max", "greedy-pure"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="batch-size throughput sweep")
    common(p)
    p.add_argument("--video")
    p.add_argument("--checkpoint")
    p.add_argument("--svm")
    p.add_argument("--batch-sizes", dest="batch_sizes", help="comma-separated, e.g. 1,10,20")
    p.add_argument("--reps", type=int)
    p.add_argument("--include-decode", dest="include_decode", action="store_const", const=True, default=None)
    p.add_argument("--fps", type=float)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bootstrap", help="export review candidates / import labeled package")
    p.add_argument("action", choices=["export", "import"])
    common(p)
    p.add_argument("--detections", help="detections JSON (export)")
    p.add_argument("--video", help="comma-separated video uris (export)")
    p.add_argument("--package", help="review package directory (import)")
    p.add_argument("--fps", type=float)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("heatmap", help="render conv5 filter-response heatmap")
    common(p)
    p.add_argument("--video")
    p.add_argument("--segment", help="segment payload .npy instead of --video")
    p.add_argument("--start-frame", dest="start_frame", type=int)
    p.add_argument("--checkpoint")
    p.add_argument("--fps", type=float)
    p.set_defaults(func=cmd_heatmap)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.command, args.seed if args.seed is not None else 0)
    try:
        return args.func(args)
    except SbdError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
