"""Miniature flow-guided correction network with hand-rolled backprop.

Two parallel encoder-decoders share an input fisheye image: the flow branch
emits a 2-channel displacement field at every decoder level, and the image
branch warps its same-resolution encoder skip features by those fields
before concatenating them into the decoder.  Each image-decoder level also
feeds a 3x3 conv head producing an RGB output for multi-scale supervision.

Everything runs on float64 numpy arrays in (N, H, W, C) layout; gradients
are computed layer by layer (no autodiff) so they can be audited against
finite differences.  The flow branch receives gradients only through the
warp layers unless direct flow supervision is switched on.
"""

from __future__ import annotations

import json
import struct
import sys
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .losses import (
    LossWeights,
    content_loss,
    content_loss_grad,
    l1_loss,
    l1_loss_grad,
    multi_scale_l1,
    multi_scale_l1_grads,
    style_loss,
    style_loss_grad,
)
from .synth import load_image
from .warp import warp_backward, warp_bilinear

CHECKPOINT_MAGIC = b"PCNW"
CHECKPOINT_VERSION = 1
LEAKY_SLOPE = 0.2


@dataclass(frozen=True)
class NetConfig:
    """Architecture of the two-branch network.

    ``enc_channels`` lists the encoder stage widths (one per downsampling
    stage, the last being the bottleneck); there is one flow level / skip
    connection per entry except the last, so
    len(enc_channels) == pyramid_levels + 1.
    """

    input_side: int = 64
    enc_channels: tuple[int, ...] = (8, 16, 32, 32)
    pyramid_levels: int = 3
    corrected_layers: tuple[bool, ...] | None = None
    seed: int = 0
    in_channels: int = 3

    def __post_init__(self):
        if len(self.enc_channels) != self.pyramid_levels + 1:
            raise ValueError("len(enc_channels) must equal pyramid_levels + 1")
        if self.input_side % (1 << len(self.enc_channels)):
            raise ValueError(
                f"input_side {self.input_side} not divisible by "
                f"2**{len(self.enc_channels)}"
            )
        mask = self.corrected_layers
        if mask is None:
            mask = (True,) * self.pyramid_levels
        mask = tuple(bool(m) for m in mask)
        if len(mask) != self.pyramid_levels:
            raise ValueError("corrected_layers mask must have one entry per skip level")
        object.__setattr__(self, "corrected_layers", mask)
        object.__setattr__(self, "enc_channels", tuple(int(c) for c in self.enc_channels))


@dataclass
class ForwardTrace:
    """Everything produced by one forward pass, plus cached activations."""

    inputs: np.ndarray
    flows: list[np.ndarray]          # finest first, (N, side/2**l, side/2**l, 2)
    scale_outputs: list[np.ndarray]  # finest first, RGB per level
    final: np.ndarray                # (N, side, side, 3)
    cache: dict
    flows_overridden: bool = False


@dataclass
class StepReport:
    """Scalar losses of one training step (unweighted components)."""

    total: float
    reconstruction: float
    multi_scale: float
    enhanced: float = 0.0
    flow_sup: float = 0.0


@dataclass
class AdamState:
    """Bias-corrected Adam with per-parameter moment buffers."""

    beta1: float = 0.5
    beta2: float = 0.999
    lr: float = 1e-4
    eps: float = 1e-8
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, p in params.items():
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(p))
            v = self.v.setdefault(name, np.zeros_like(p))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


# -- primitive layers ---------------------------------------------------------

def _im2col(x: np.ndarray) -> np.ndarray:
    n, h, wd, cin = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (3, 3), axis=(1, 2))
    return np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3)).reshape(
        n * h * wd, 9 * cin
    )


def _conv_forward(w: np.ndarray, b: np.ndarray, x: np.ndarray):
    n, h, wd, cin = x.shape
    cout = w.shape[-1]
    patches = _im2col(x)
    out = patches @ w.reshape(9 * cin, cout) + b
    return out.reshape(n, h, wd, cout), patches


def _conv_backward(w: np.ndarray, patches: np.ndarray, x_shape, grad_out: np.ndarray):
    n, h, wd, cin = x_shape
    cout = w.shape[-1]
    go = grad_out.reshape(n * h * wd, cout)
    grad_w = (patches.T @ go).reshape(3, 3, cin, cout)
    grad_b = go.sum(axis=0)
    gxp = np.zeros((n, h + 2, wd + 2, cin))
    for ky in range(3):
        for kx in range(3):
            gxp[:, ky:ky + h, kx:kx + wd, :] += grad_out @ w[ky, kx].T
    return gxp[:, 1:1 + h, 1:1 + wd, :], grad_w, grad_b


def _leaky(x):
    return np.where(x > 0.0, x, LEAKY_SLOPE * x)


def _leaky_backward(pre, g):
    return np.where(pre > 0.0, g, LEAKY_SLOPE * g)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _sigmoid_backward(s, g):
    return g * s * (1.0 - s)


def _pool(x):
    n, h, w, c = x.shape
    return x.reshape(n, h // 2, 2, w // 2, 2, c).mean(axis=(2, 4))


def _pool_backward(g):
    return np.repeat(np.repeat(g, 2, axis=1), 2, axis=2) / 4.0


def _upsample(x):
    return np.repeat(np.repeat(x, 2, axis=1), 2, axis=2)


def _upsample_backward(g):
    n, h, w, c = g.shape
    return g.reshape(n, h // 2, 2, w // 2, 2, c).sum(axis=(2, 4))


def _warp_batch(feat, flow):
    return np.stack([warp_bilinear(feat[i], flow[i]) for i in range(feat.shape[0])])


def _warp_batch_backward(feat, flow, g):
    gf = np.empty_like(feat)
    gfl = np.empty_like(flow)
    for i in range(feat.shape[0]):
        gf[i], gfl[i] = warp_backward(feat[i], flow[i], g[i])
    return gf, gfl


# -- network ------------------------------------------------------------------

class Network:
    """Parameter container plus forward/backward over the fixed topology."""

    def __init__(self, config: NetConfig):
        self.config = config
        self.params: dict[str, np.ndarray] = {}
        rng = np.random.default_rng(config.seed)
        ch = config.enc_channels
        levels = config.pyramid_levels

        def add_conv(name, cin, cout):
            bound = (1.0 / (9 * cin)) ** 0.5
            self.params[f"{name}.w"] = rng.uniform(-bound, bound, size=(3, 3, cin, cout))
            self.params[f"{name}.b"] = np.zeros(cout)

        for branch in ("flow", "img"):
            for i, cout in enumerate(ch):
                cin = config.in_channels if i == 0 else ch[i - 1]
                add_conv(f"{branch}_enc{i}", cin, cout)

        for lvl in range(levels, 0, -1):
            cin = ch[levels] if lvl == levels else ch[lvl]
            add_conv(f"flow_dec{lvl}", cin, ch[lvl - 1])
            add_conv(f"flow_head{lvl}", ch[lvl - 1], 2)

        for lvl in range(levels, 0, -1):
            cin = ch[levels] if lvl == levels else 2 * ch[lvl]
            add_conv(f"img_dec{lvl}", cin, ch[lvl - 1])
            add_conv(f"img_head{lvl}", 2 * ch[lvl - 1], 3)
        add_conv("img_dec0", 2 * ch[0], ch[0])
        add_conv("img_head0", ch[0], 3)

    # -- parameter plumbing --

    def parameter_count(self) -> int:
        return sum(p.size for p in self.params.values())

    def parameter_vector(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params.values()])

    def set_parameter_vector(self, vec: np.ndarray) -> None:
        vec = np.asarray(vec, dtype=float)
        if vec.size != self.parameter_count():
            raise ValueError(
                f"expected {self.parameter_count()} parameters, got {vec.size}"
            )
        offset = 0
        for p in self.params.values():
            p[...] = vec[offset:offset + p.size].reshape(p.shape)
            offset += p.size

    # -- forward --

    def _conv(self, name, x, cache):
        out, patches = _conv_forward(self.params[f"{name}.w"], self.params[f"{name}.b"], x)
        cache[f"{name}.patches"] = patches
        cache[f"{name}.xshape"] = x.shape
        return out

    def _conv_act(self, name, x, cache):
        pre = self._conv(name, x, cache)
        cache[f"{name}.pre"] = pre
        return _leaky(pre)

    def _encode(self, branch, x, cache):
        outs = []
        h = x
        for i in range(len(self.config.enc_channels)):
            act = self._conv_act(f"{branch}_enc{i}", h, cache)
            h = _pool(act)
            outs.append(h)
        return outs

    def forward(self, images: np.ndarray, flows_override: list[np.ndarray] | None = None) -> ForwardTrace:
        """Run both branches; caches every intermediate needed for backward.

        ``flows_override`` (finest first) substitutes externally supplied
        flows in the correction layers (teacher forcing); the flow branch
        still runs so its predictions stay observable.
        """
        x = np.asarray(images, dtype=float)
        if x.ndim == 3:
            x = x[None]
        cfg = self.config
        if x.shape[1] != cfg.input_side or x.shape[2] != cfg.input_side:
            raise ValueError(f"expected {cfg.input_side}px square input, got {x.shape}")
        if x.shape[3] != cfg.in_channels:
            raise ValueError(f"expected {cfg.in_channels} channels, got {x.shape[3]}")
        levels = cfg.pyramid_levels
        cache: dict = {}

        flow_stages = self._encode("flow", x, cache)
        h = flow_stages[-1]
        flows: dict[int, np.ndarray] = {}
        for lvl in range(levels, 0, -1):
            h = self._conv_act(f"flow_dec{lvl}", _upsample(h), cache)
            cache[f"flow_g{lvl}"] = h
            flows[lvl] = self._conv(f"flow_head{lvl}", h, cache)

        img_stages = self._encode("img", x, cache)
        h = img_stages[-1]
        outs: dict[int, np.ndarray] = {}
        for lvl in range(levels, 0, -1):
            u = self._conv_act(f"img_dec{lvl}", _upsample(h), cache)
            skip = img_stages[lvl - 1]
            used_flow = flows_override[lvl - 1] if flows_override is not None else flows[lvl]
            if cfg.corrected_layers[lvl - 1]:
                corrected = _warp_batch(skip, used_flow)
                cache[f"warp{lvl}.feat"] = skip
                cache[f"warp{lvl}.flow"] = used_flow
            else:
                corrected = skip
            cache[f"skip{lvl}.corrected"] = corrected
            h = np.concatenate([u, corrected], axis=-1)
            s = _sigmoid(self._conv(f"img_head{lvl}", h, cache))
            cache[f"img_head{lvl}.s"] = s
            outs[lvl] = s

        f = self._conv_act("img_dec0", _upsample(h), cache)
        final = _sigmoid(self._conv("img_head0", f, cache))
        cache["img_head0.s"] = final

        return ForwardTrace(
            inputs=x,
            flows=[flows[lvl] for lvl in range(1, levels + 1)],
            scale_outputs=[outs[lvl] for lvl in range(1, levels + 1)],
            final=final,
            cache=cache,
            flows_overridden=flows_override is not None,
        )

    # -- backward --

    def _conv_back(self, name, grad_out, grads, cache):
        gx, gw, gb = _conv_backward(
            self.params[f"{name}.w"], cache[f"{name}.patches"],
            cache[f"{name}.xshape"], grad_out,
        )
        grads[f"{name}.w"] += gw
        grads[f"{name}.b"] += gb
        return gx

    def _conv_act_back(self, name, grad_out, grads, cache):
        return self._conv_back(name, _leaky_backward(cache[f"{name}.pre"], grad_out), grads, cache)

    def _encode_back(self, branch, skip_grads, grad_bottom, grads, cache):
        g = grad_bottom
        for i in reversed(range(len(self.config.enc_channels))):
            if skip_grads is not None and i < len(skip_grads) and skip_grads[i] is not None:
                g = g + skip_grads[i]
            g = _pool_backward(g)
            g = self._conv_act_back(f"{branch}_enc{i}", g, grads, cache)
        return g

    def backward(
        self,
        trace: ForwardTrace,
        grad_final: np.ndarray,
        grad_outputs: list[np.ndarray],
        grad_flows: list[np.ndarray] | None = None,
    ) -> dict[str, np.ndarray]:
        """Backpropagate output gradients to every parameter.

        ``grad_outputs`` is finest first, one per multi-scale head;
        ``grad_flows`` optionally injects direct gradients on the predicted
        flows (used by flow supervision).
        """
        cfg = self.config
        levels = cfg.pyramid_levels
        cache = trace.cache
        grads = {name: np.zeros_like(p) for name, p in self.params.items()}

        flow_grads = [np.zeros_like(f) for f in trace.flows]
        if grad_flows is not None:
            for i, g in enumerate(grad_flows):
                if g is not None:
                    flow_grads[i] = flow_grads[i] + g
        skip_grads: list[np.ndarray | None] = [None] * levels

        # final head and full-resolution stage
        g = _sigmoid_backward(cache["img_head0.s"], grad_final)
        g = self._conv_back("img_head0", g, grads, cache)
        g = self._conv_act_back("img_dec0", g, grads, cache)
        carry = _upsample_backward(g)  # gradient w.r.t. cat at level 1

        for lvl in range(1, levels + 1):
            g_cat = carry
            gh = _sigmoid_backward(cache[f"img_head{lvl}.s"], grad_outputs[lvl - 1])
            g_cat = g_cat + self._conv_back(f"img_head{lvl}", gh, grads, cache)

            c_dec = cfg.enc_channels[lvl - 1]
            g_u = g_cat[..., :c_dec]
            g_skip = g_cat[..., c_dec:]
            if cfg.corrected_layers[lvl - 1]:
                feat = cache[f"warp{lvl}.feat"]
                flow = cache[f"warp{lvl}.flow"]
                g_feat, g_flow = _warp_batch_backward(feat, flow, g_skip)
                skip_grads[lvl - 1] = g_feat
                if not trace.flows_overridden:
                    flow_grads[lvl - 1] = flow_grads[lvl - 1] + g_flow
            else:
                skip_grads[lvl - 1] = g_skip

            g = self._conv_act_back(f"img_dec{lvl}", g_u, grads, cache)
            carry = _upsample_backward(g)  # next cat (or image bottleneck)

        self._encode_back("img", skip_grads, carry, grads, cache)

        # flow branch: decoder levels consume gradients finest to coarsest
        carry = None
        for lvl in range(1, levels + 1):
            g_g = self._conv_back(f"flow_head{lvl}", flow_grads[lvl - 1], grads, cache)
            if carry is not None:
                g_g = g_g + carry
            g = self._conv_act_back(f"flow_dec{lvl}", g_g, grads, cache)
            carry = _upsample_backward(g)
        self._encode_back("flow", None, carry, grads, cache)
        return grads


def build(config: NetConfig | None = None) -> Network:
    """Construct a network with deterministic seeded initialization."""
    return Network(config if config is not None else NetConfig())


def forward(net: Network, images: np.ndarray, flows_override=None) -> ForwardTrace:
    return net.forward(images, flows_override=flows_override)


def predict_flow_pyramid(net: Network, image: np.ndarray) -> list[np.ndarray]:
    """Predicted flows of one image as a pyramid, finest first."""
    trace = net.forward(image)
    return [f[0] for f in trace.flows]


def compute_gradients(
    net: Network,
    trace: ForwardTrace,
    gt: np.ndarray,
    weights: LossWeights = LossWeights(),
    gt_flows: list[np.ndarray] | None = None,
    flow_weight: float = 0.0,
):
    """Loss values and parameter gradients for one batch.

    The default objective is lambda_r * L_rec + lambda_m * L_multi; the
    enhanced term (identity features, i.e. raw RGB) joins when its toggle is
    on, and ``flow_weight`` > 0 adds squared end-point supervision of the
    predicted flows against ``gt_flows``.
    """
    gt = np.asarray(gt, dtype=float)
    if gt.ndim == 3:
        gt = gt[None]
    if gt.shape != trace.final.shape:
        raise ValueError(f"gt shape {gt.shape} != output shape {trace.final.shape}")

    l_rec = l1_loss(trace.final, gt)
    grad_final = weights.lambda_r * l1_loss_grad(trace.final, gt)
    l_multi = multi_scale_l1(trace.scale_outputs, gt)
    grad_outputs = [weights.lambda_m * g for g in multi_scale_l1_grads(trace.scale_outputs, gt)]
    total = weights.lambda_r * l_rec + weights.lambda_m * l_multi

    l_enh = 0.0
    if weights.include_enhanced:
        n = gt.shape[0]
        for i in range(n):
            l_enh += content_loss(trace.final[i], gt[i])
            l_enh += weights.lambda_s * style_loss(trace.final[i], gt[i])
            ge = content_loss_grad(trace.final[i], gt[i])
            ge = ge + weights.lambda_s * style_loss_grad(trace.final[i], gt[i])
            grad_final[i] += ge / n
        l_enh /= n
        total += l_enh

    grad_flows = None
    l_flow = 0.0
    if flow_weight > 0.0:
        if gt_flows is None:
            raise ValueError("flow supervision requires gt_flows")
        grad_flows = []
        for pred, ref in zip(trace.flows, gt_flows):
            diff = pred - ref
            l_flow += float(np.mean(diff * diff))
            grad_flows.append(flow_weight * 2.0 * diff / diff.size)
        total += flow_weight * l_flow

    grads = net.backward(trace, grad_final, grad_outputs, grad_flows=grad_flows)
    report = StepReport(
        total=float(total),
        reconstruction=float(l_rec),
        multi_scale=float(l_multi),
        enhanced=float(l_enh),
        flow_sup=float(l_flow),
    )
    return report, grads


def backward_and_step(
    net: Network,
    trace: ForwardTrace,
    gt: np.ndarray,
    weights: LossWeights = LossWeights(),
    adam: AdamState | None = None,
    gt_flows: list[np.ndarray] | None = None,
    flow_weight: float = 0.0,
) -> StepReport:
    """Compute the training loss, backpropagate, and apply one Adam update."""
    if adam is None:
        adam = AdamState()
    report, grads = compute_gradients(
        net, trace, gt, weights, gt_flows=gt_flows, flow_weight=flow_weight
    )
    adam.step(net.params, grads)
    return report


# -- training loop ------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    iters: int = 300
    batch: int = 4
    lr: float = 1e-4
    seed: int = 0
    weights: LossWeights = LossWeights()
    ckpt_path: str | None = None
    ckpt_every: int = 100
    flow_weight: float = 0.0  # > 0 switches on direct flow supervision


def load_samples(dataset_dir, side: int | None = None):
    """Load (fisheye, gt) pairs from a synthesized dataset directory.

    Corrupt or mismatched sample files are skipped with a warning.
    """
    dataset_dir = Path(dataset_dir)
    pairs = []
    for fish_path in sorted(dataset_dir.glob("*_fish.png")):
        gt_path = Path(str(fish_path).replace("_fish.png", "_gt.png"))
        try:
            fish = load_image(fish_path)
            gt = load_image(gt_path)
        except Exception as exc:
            print(f"warning: skipping {fish_path.stem}: {exc}", file=sys.stderr)
            continue
        if fish.shape != gt.shape or (side is not None and fish.shape[0] != side):
            print(f"warning: skipping {fish_path.stem}: wrong shape {fish.shape}",
                  file=sys.stderr)
            continue
        pairs.append((fish, gt, fish_path.stem.replace("_fish", "")))
    return pairs


def _load_gt_pyramids(dataset_dir, stems, side, levels):
    from . import camera
    from .flowfield import gt_flow

    pyramids = []
    for stem in stems:
        model = camera.load_model(Path(dataset_dir) / f"{stem}_model.txt")
        pyramids.append([gt_flow(model, side >> l, side >> l) for l in range(1, levels + 1)])
    return pyramids


def train(dataset_dir, net_config: NetConfig | None = None,
          train_config: TrainConfig | None = None):
    """Train on a synthesized dataset; returns (net, per-iteration reports)."""
    cfg = net_config if net_config is not None else NetConfig()
    tc = train_config if train_config is not None else TrainConfig()
    samples = load_samples(dataset_dir, side=cfg.input_side)
    if not samples:
        raise ValueError(f"no usable samples in {dataset_dir}")

    gt_pyramids = None
    if tc.flow_weight > 0.0:
        gt_pyramids = _load_gt_pyramids(
            dataset_dir, [s[2] for s in samples], cfg.input_side, cfg.pyramid_levels
        )

    net = build(cfg)
    adam = AdamState(lr=tc.lr)
    rng = np.random.default_rng(tc.seed)
    order: list[int] = []
    curve: list[StepReport] = []
    for it in range(tc.iters):
        while len(order) < tc.batch:
            order.extend(rng.permutation(len(samples)).tolist())
        idx = [order.pop(0) for _ in range(tc.batch)]
        x = np.stack([samples[i][0] for i in idx])
        y = np.stack([samples[i][1] for i in idx])
        trace = net.forward(x)
        gt_flows = None
        if gt_pyramids is not None:
            gt_flows = [
                np.stack([gt_pyramids[i][lvl] for i in idx])
                for lvl in range(cfg.pyramid_levels)
            ]
        report = backward_and_step(
            net, trace, y, tc.weights, adam,
            gt_flows=gt_flows, flow_weight=tc.flow_weight,
        )
        curve.append(report)
        if tc.ckpt_path and tc.ckpt_every > 0 and (it + 1) % tc.ckpt_every == 0:
            save_checkpoint(tc.ckpt_path, net)
    if tc.ckpt_path:
        save_checkpoint(tc.ckpt_path, net)
    return net, curve


def evaluate_losses(net: Network, samples, weights: LossWeights = LossWeights(),
                    batch: int = 8) -> StepReport:
    """Mean reconstruction / multi-scale losses over a sample list (no updates)."""
    if not samples:
        raise ValueError("no samples to evaluate")
    tot_r = tot_m = 0.0
    count = 0
    for start in range(0, len(samples), batch):
        chunk = samples[start:start + batch]
        x = np.stack([s[0] for s in chunk])
        y = np.stack([s[1] for s in chunk])
        trace = net.forward(x)
        tot_r += l1_loss(trace.final, y) * len(chunk)
        tot_m += multi_scale_l1(trace.scale_outputs, y) * len(chunk)
        count += len(chunk)
    l_rec = tot_r / count
    l_multi = tot_m / count
    total = weights.lambda_r * l_rec + weights.lambda_m * l_multi
    return StepReport(total=total, reconstruction=l_rec, multi_scale=l_multi)


# -- checkpoints --------------------------------------------------------------

def save_checkpoint(path, net: Network) -> None:
    """Binary checkpoint: magic, version, count, f64 params, JSON config."""
    vec = net.parameter_vector()
    cfg = asdict(net.config)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, vec.size))
        fh.write(vec.astype("<f8").tobytes())
        fh.write(json.dumps(cfg, sort_keys=True).encode("utf-8"))


def load_checkpoint(path) -> Network:
    """Rebuild a network from a checkpoint written by :func:`save_checkpoint`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: bad magic {blob[:4]!r}")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    end = 12 + 8 * count
    vec = np.frombuffer(blob[12:end], dtype="<f8")
    cfg_dict = json.loads(blob[end:].decode("utf-8"))
    cfg_dict["enc_channels"] = tuple(cfg_dict["enc_channels"])
    if cfg_dict.get("corrected_layers") is not None:
        cfg_dict["corrected_layers"] = tuple(cfg_dict["corrected_layers"])
    net = Network(NetConfig(**cfg_dict))
    net.set_parameter_vector(np.array(vec, dtype=float))
    return net
