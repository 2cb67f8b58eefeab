"""Command-line entry points.

Subcommands: train-highlighter, train-user-model, eval, compare-arch, serve.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _size(text: str) -> tuple[int, int]:
    h, w = text.lower().split("x")
    return (int(h), int(w))


def _handseg_config(args):
    from .handseg import HandSegmentorConfig

    return HandSegmentorConfig(
        backend_id=args.handseg_backend, model_path=args.handseg_model_path
    )


def _add_handseg_args(p):
    p.add_argument("--handseg-backend", default="constant",
                   help="hand segmentation backend (constant|oracle|pretrained-parser)")
    p.add_argument("--handseg-model-path", default=None,
                   help="parser checkpoint or oracle fixture directory")


def _load_split(args):
    from .datamgmt import load_hutics, split_by_participant

    result = load_hutics(args.data)
    print(f"loaded {len(result.records)} records from "
          f"{len(result.participant_counts)} participants")
    for issue in result.issues:
        print(f"  skipped: {issue}", file=sys.stderr)
    return split_by_participant(result.records, args.ratio, args.split_seed)


# ---------------------------------------------------------------------------

def cmd_train_highlighter(args) -> int:
    from .evalbench import benchmark_fps
    from .highlighter import HighlighterTrainConfig, train_highlighter
    from .highlighter.pipeline import write_worst_cases

    split = _load_split(args)
    config = HighlighterTrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr_hold_head=args.lr_hold_head,
        lr_hold_tail=args.lr_hold_tail,
        seed=args.seed,
    )
    handseg = _handseg_config(args)
    model, report = train_highlighter(
        split,
        f"{args.backbone}+{args.decoder}",
        config,
        handseg,
        input_size=args.input_size,
        pretrained=args.pretrained,
        device=args.device,
    )
    out = Path(args.out)
    model.save(out)

    from .handseg import HandSegmentor

    segmentor = HandSegmentor(handseg)
    eval_records = split.test if split.test else split.train
    frames = [rec.load_frame() for rec in eval_records]
    if len(frames) >= 2:
        bench = (frames * ((15 // len(frames)) + 1))[:15]
        report.fps = benchmark_fps(model, handseg, bench, warmup=5)

    if split.test:
        cases = []
        for rec, iou_v in zip(split.test, report.per_image_iou):
            frame = rec.load_frame()
            pred = model.predict_one(frame, segmentor.hand_mask(frame))
            cases.append((rec.source_id, frame, pred, rec.load_object_mask(), iou_v))
        write_worst_cases(cases, out / "worst_cases")

    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
    print(f"test mIoU: {report.miou:.4f}  fps: {report.fps and round(report.fps, 1)}")
    print(f"model written to {out}")
    return 0


def cmd_train_user_model(args) -> int:
    import numpy as np

    from .datamgmt import load_session
    from .evalbench import classification_accuracy
    from .teachtrain import UserTrainConfig, train_user_model

    session = load_session(args.session)
    if not session.samples:
        print("session has no samples", file=sys.stderr)
        return 2
    config = UserTrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        pretrained_encoder=args.pretrained,
        seed=args.seed,
    )
    model = train_user_model(
        session.samples,
        config,
        lam=getattr(args, "lambda"),
        encoder=args.encoder,
        class_labels=[c.label for c in session.classes],
        input_size=args.input_size,
        device=args.device,
    )
    preds = [int(p) for p in model.predict([s.frame for s in session.samples])]
    train_acc = classification_accuracy(preds, [s.class_id for s in session.samples])
    metrics = {
        "train_accuracy": train_acc,
        "final_loss": model.loss_history_[-1],
        "samples": len(session.samples),
    }
    out = Path(args.out) if args.out else Path(args.session) / "model"
    model.save(out, metrics=metrics)
    print(f"train accuracy: {train_acc:.3f}")
    print(f"model written to {out}")
    return 0


def cmd_eval(args) -> int:
    from .evalbench import benchmark_fps
    from .evalbench.metrics import EvalReport, iou
    from .core import binarize
    from .handseg import HandSegmentor
    from .highlighter import HighlightSegmenter

    import numpy as np

    split = _load_split(args)
    model = HighlightSegmenter.load(args.model, device=args.device)
    handseg = _handseg_config(args)
    segmentor = HandSegmentor(handseg)

    per_image = []
    frames = []
    for rec in split.test:
        frame = rec.load_frame()
        frames.append(frame)
        pred = model.predict_one(frame, segmentor.hand_mask(frame))
        per_image.append(iou(binarize(pred, 0.5), rec.load_object_mask()))
    report = EvalReport(
        miou=float(np.mean(per_image)),
        per_image_iou=per_image,
        model_desc=str(args.model),
        dataset_desc=f"{args.data} test side (seed {args.split_seed})",
        seed=args.split_seed,
    )
    if len(frames) >= 2:
        bench = (frames * ((15 // len(frames)) + 1))[:15]
        report.fps = benchmark_fps(model, handseg, bench, warmup=5)
    text = json.dumps(report.to_dict(), indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text)
    return 0


def cmd_compare_arch(args) -> int:
    from .evalbench import compare_architectures
    from .highlighter import HighlighterTrainConfig

    split = _load_split(args)
    specs = [
        item if "+" in item else f"{args.backbone}+{item}"
        for item in args.specs.split(",")
    ]
    config = HighlighterTrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr_hold_head=args.lr_hold_head,
        lr_hold_tail=args.lr_hold_tail,
        seed=args.seed,
    )
    table = compare_architectures(
        split, specs, config, _handseg_config(args),
        input_size=args.input_size, device=args.device,
    )
    print(table.to_text())
    if args.out:
        Path(args.out).write_text(table.to_json())
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServeConfig, create_app

    config = ServeConfig.from_file(args.config) if args.config else ServeConfig()
    if args.highlighter:
        config.highlighter_model = args.highlighter
    if args.ui:
        config.ui_static_dir = args.ui
    if args.sessions_root:
        config.sessions_root = args.sessions_root
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gestureteach")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-highlighter", help="train the gesture-guided segmentor")
    p.add_argument("--data", required=True, help="dataset root (canonical layout)")
    p.add_argument("--backbone", default="efficientnet-b0")
    p.add_argument("--decoder", default="unet")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr-hold-head", type=int, default=25)
    p.add_argument("--lr-hold-tail", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--input-size", type=_size, default=None, metavar="HxW")
    p.add_argument("--pretrained", action="store_true")
    p.add_argument("--device", default="cpu")
    p.add_argument("--out", required=True)
    _add_handseg_args(p)
    p.set_defaults(func=cmd_train_highlighter)

    p = sub.add_parser("train-user-model", help="train the taught classifier+segmentor")
    p.add_argument("--session", required=True, help="session directory")
    p.add_argument("--lambda", type=float, default=1.0, help="segmentation loss weight")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--encoder", default="efficientnet-b0")
    p.add_argument("--pretrained", action="store_true")
    p.add_argument("--input-size", type=_size, default=None, metavar="HxW")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--device", default="cpu")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_train_user_model)

    p = sub.add_parser("eval", help="evaluate a trained highlighter")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--device", default="cpu")
    p.add_argument("--out", default=None)
    _add_handseg_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare-arch", help="train and compare decoder architectures")
    p.add_argument("--specs", required=True,
                   help="comma list: decoder names or backbone+decoder specs")
    p.add_argument("--backbone", default="efficientnet-b0")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr-hold-head", type=int, default=25)
    p.add_argument("--lr-hold-tail", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--input-size", type=_size, default=None, metavar="HxW")
    p.add_argument("--device", default="cpu")
    p.add_argument("--out", default=None)
    _add_handseg_args(p)
    p.set_defaults(func=cmd_compare_arch)

    p = sub.add_parser("serve", help="run the teaching service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--highlighter", default=None, help="trained highlighter dir")
    p.add_argument("--config", default=None, help="JSON or YAML config file")
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    p.add_argument("--sessions-root", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
