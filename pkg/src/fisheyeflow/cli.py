"""Command-line entry point wiring the modules into reproducible pipelines.

Subcommands: synth, rectify, flow, train, eval.  Exit codes: 0 success,
1 runtime failure, 2 usage error.  Values resolve as flags > config file
(key=value lines) > built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import camera, flowfield, metrics, network, synth


class _Tracking(argparse.Action):
    """Store the value and remember that the flag was given explicitly."""

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        if not hasattr(namespace, "_explicit"):
            namespace._explicit = set()
        namespace._explicit.add(self.dest)


def _add(parser, flag, **kwargs):
    if kwargs.get("action") is None and "type" in kwargs:
        kwargs["action"] = _Tracking
    parser.add_argument(flag, **kwargs)


def _apply_config_file(args) -> None:
    """Overlay key=value config entries onto non-explicit arguments."""
    if not getattr(args, "config", None):
        return
    text = Path(args.config).read_text(encoding="utf-8")
    entries = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {line!r}")
        key, value = line.split("=", 1)
        entries[key.strip().replace("-", "_")] = value.strip()
    for key, raw in entries.items():
        if not hasattr(args, key) or key in args._explicit:
            continue
        current = getattr(args, key)
        caster = type(current) if current is not None else str
        if caster is bool:
            setattr(args, key, raw.lower() in ("1", "true", "yes", "on"))
        else:
            setattr(args, key, caster(raw))


def _parse_levels(spec: str) -> list[int]:
    return [int(tok) for tok in spec.split(",") if tok.strip()]


def cmd_synth(args) -> int:
    manifest = synth.make_dataset(
        args.src, args.out, args.count, args.seed,
        size=args.size, circular_mask=args.circular_mask,
    )
    print(manifest)
    return 0


def cmd_rectify(args) -> int:
    img = synth.load_image(args.input)
    if args.model:
        model = camera.load_model(args.model)
        out = synth.rectify_image(img, model)
    else:
        flow = flowfield.read_flow(args.flow)
        from .warp import warp_bilinear
        out = warp_bilinear(img, flow)
    synth.save_image(args.output, out)
    print(args.output)
    return 0


def cmd_flow(args) -> int:
    model = camera.load_model(args.model)
    pyramid = flowfield.build_pyramid(model, args.size, args.levels)
    for i, flow in enumerate(pyramid):
        path = f"{args.out}_L{i}_{flow.shape[1]}.pcnf"
        flowfield.write_flow(path, flow)
        mag = np.hypot(flow[..., 0], flow[..., 1])
        peak = mag.max()
        synth.save_image(f"{args.out}_L{i}_{flow.shape[1]}.png",
                         mag / peak if peak > 0 else mag)
        print(path)
    return 0


def cmd_train(args) -> int:
    mask = None
    if args.no_correct_layers:
        levels_off = _parse_levels(args.no_correct_layers)
        mask = tuple(
            (lvl + 1) not in levels_off for lvl in range(args.pyramid_levels)
        )
    net_cfg = network.NetConfig(
        input_side=args.side,
        enc_channels=tuple(int(c) for c in args.channels.split(",")),
        pyramid_levels=args.pyramid_levels,
        corrected_layers=mask,
        seed=args.seed,
    )
    train_cfg = network.TrainConfig(
        iters=args.iters, batch=args.batch, lr=args.lr, seed=args.seed,
        ckpt_path=args.ckpt, flow_weight=args.flow_weight,
    )
    net, curve = network.train(args.data, net_cfg, train_cfg)
    csv_path = args.csv or (args.ckpt + ".losses.csv" if args.ckpt else "losses.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "total", "reconstruction", "multi_scale"])
        for i, rep in enumerate(curve):
            writer.writerow([i, f"{rep.total:.12g}", f"{rep.reconstruction:.12g}",
                             f"{rep.multi_scale:.12g}"])
    print(csv_path)
    if args.ckpt:
        print(args.ckpt)
    return 0


def cmd_eval(args) -> int:
    pred_dir, gt_dir = Path(args.pred), Path(args.gt)
    names = sorted(
        p.name for p in pred_dir.iterdir()
        if p.suffix.lower() in synth.IMAGE_EXTENSIONS and (gt_dir / p.name).exists()
    )
    if not names:
        print("no matching image pairs", file=sys.stderr)
        return 1
    records = []
    for name in names:
        pred = synth.load_image(pred_dir / name)
        gt = synth.load_image(gt_dir / name)
        epe = None
        flow_name = Path(name).stem + ".pcnf"
        if (pred_dir / flow_name).exists() and (gt_dir / flow_name).exists():
            epe = metrics.flow_epe(
                flowfield.read_flow(pred_dir / flow_name),
                flowfield.read_flow(gt_dir / flow_name),
            )
        records.append(
            metrics.image_record(Path(name).stem, pred, gt,
                                 count_corners_on=args.corners_on, epe=epe)
        )
    report = metrics.evaluation_report(records)
    Path(args.report).write_text(json.dumps(report, indent=2), encoding="utf-8")
    print(args.report)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fisheyeflow",
        description="Fisheye synthesis, flow generation, rectification, "
                    "training, and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a fisheye dataset")
    _add(p, "--src", type=str, required=True, help="directory of source images")
    _add(p, "--out", type=str, required=True, help="output dataset directory")
    _add(p, "--count", type=int, default=16)
    _add(p, "--seed", type=int, default=0)
    _add(p, "--size", type=int, default=256)
    p.add_argument("--circular-mask", action="store_true", dest="circular_mask")
    _add(p, "--config", type=str, default=None, help="key=value defaults file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("rectify", help="rectify an image with a model or flow file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", type=str)
    group.add_argument("--flow", type=str)
    _add(p, "--in", dest="input", type=str, required=True)
    _add(p, "--out", dest="output", type=str, required=True)
    _add(p, "--config", type=str, default=None)
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("flow", help="write a flow pyramid for a model file")
    _add(p, "--model", type=str, required=True)
    _add(p, "--size", type=int, default=256)
    _add(p, "--levels", type=int, default=5)
    _add(p, "--out", type=str, required=True, help="output path prefix")
    _add(p, "--config", type=str, default=None)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("train", help="train the correction network")
    _add(p, "--data", type=str, required=True)
    _add(p, "--iters", type=int, default=300)
    _add(p, "--batch", type=int, default=4)
    _add(p, "--lr", type=float, default=1e-4)
    _add(p, "--seed", type=int, default=0)
    _add(p, "--side", type=int, default=64)
    _add(p, "--channels", type=str, default="8,16,32,32")
    _add(p, "--pyramid-levels", dest="pyramid_levels", type=int, default=3)
    _add(p, "--no-correct-layers", dest="no_correct_layers", type=str, default=None,
         help="comma list of 1-based skip levels to leave uncorrected")
    _add(p, "--flow-weight", dest="flow_weight", type=float, default=0.0)
    _add(p, "--ckpt", type=str, default=None)
    _add(p, "--csv", type=str, default=None)
    _add(p, "--config", type=str, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate prediction/ground-truth image pairs")
    _add(p, "--pred", type=str, required=True)
    _add(p, "--gt", type=str, required=True)
    _add(p, "--report", type=str, required=True)
    _add(p, "--corners-on", dest="corners_on", type=str, default="gt",
         choices=("gt", "pred"))
    _add(p, "--config", type=str, default=None)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "_explicit"):
        args._explicit = set()
    try:
        _apply_config_file(args)
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
