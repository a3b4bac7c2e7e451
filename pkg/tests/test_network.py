"""Network: construction, forward contracts, backprop audit, training, files."""

import numpy as np
import pytest
from scipy import ndimage

import fisheyeflow.network as nw
from fisheyeflow import camera
from fisheyeflow.flowfield import gt_flow, max_displacement
from fisheyeflow.losses import LossWeights
from fisheyeflow.metrics import flow_epe
from fisheyeflow.network import (
    AdamState,
    NetConfig,
    Network,
    TrainConfig,
    backward_and_step,
    build,
    compute_gradients,
    load_checkpoint,
    predict_flow_pyramid,
    save_checkpoint,
    train,
)
from fisheyeflow.synth import distort_image

from _audit import audit_gradients
from _scenes import checkerboard, natural_scene

MICRO = NetConfig(input_side=16, enc_channels=(2, 2, 2), pyramid_levels=2, seed=3)


def micro_batch(seed=7, n=2):
    rng = np.random.default_rng(seed)
    return rng.random((n, 16, 16, 3)), rng.random((n, 16, 16, 3))


class TestBuild:
    def test_parameter_count_reproducible(self):
        a = build(NetConfig(seed=5))
        b = build(NetConfig(seed=5))
        assert a.parameter_count() == b.parameter_count()
        np.testing.assert_array_equal(a.parameter_vector(), b.parameter_vector())

    def test_different_seeds_differ(self):
        a = build(NetConfig(seed=0))
        b = build(NetConfig(seed=1))
        assert not np.array_equal(a.parameter_vector(), b.parameter_vector())

    def test_bias_zero_weight_bound(self):
        net = build(NetConfig(seed=2))
        for name, p in net.params.items():
            if name.endswith(".b"):
                assert np.all(p == 0.0)
            else:
                fan_in = 9 * p.shape[2]
                assert np.max(np.abs(p)) <= (1.0 / fan_in) ** 0.5

    def test_config_validation(self):
        with pytest.raises(ValueError):
            NetConfig(input_side=60)  # not divisible by 2**4
        with pytest.raises(ValueError):
            NetConfig(enc_channels=(8, 16), pyramid_levels=3)
        with pytest.raises(ValueError):
            NetConfig(corrected_layers=(True,))  # wrong mask length


class TestForward:
    def test_shapes_default_config(self):
        net = build(NetConfig(seed=0))
        trace = net.forward(np.zeros((64, 64, 3)))
        assert [f.shape[1] for f in trace.flows] == [32, 16, 8]
        assert [o.shape[1] for o in trace.scale_outputs] == [32, 16, 8]
        assert trace.final.shape == (1, 64, 64, 3)

    def test_deterministic(self):
        net = build(NetConfig(seed=1))
        x = np.random.default_rng(0).random((2, 64, 64, 3))
        a = net.forward(x)
        b = net.forward(x)
        np.testing.assert_array_equal(a.final, b.final)
        for fa, fb in zip(a.flows, b.flows):
            np.testing.assert_array_equal(fa, fb)

    def test_zero_flow_heads_keep_features_raw(self):
        net = build(NetConfig(seed=2))
        for name in net.params:
            if name.startswith("flow_head"):
                net.params[name][...] = 0.0
        trace = net.forward(np.random.default_rng(1).random((64, 64, 3)))
        for f in trace.flows:
            assert np.all(f == 0.0)
        for lvl in (1, 2, 3):
            raw = trace.cache[f"warp{lvl}.feat"]
            corrected = trace.cache[f"skip{lvl}.corrected"]
            np.testing.assert_array_equal(corrected, raw)

    def test_uncorrected_config_runs_no_warp(self):
        net = build(NetConfig(corrected_layers=(False, False, False), seed=0))
        trace = net.forward(np.zeros((64, 64, 3)))
        assert not any(k.startswith("warp") for k in trace.cache)
        assert trace.final.shape == (1, 64, 64, 3)

    def test_outputs_in_unit_interval(self):
        net = build(NetConfig(seed=3))
        trace = net.forward(np.random.default_rng(2).random((64, 64, 3)))
        assert np.all(trace.final > 0.0) and np.all(trace.final < 1.0)
        for o in trace.scale_outputs:
            assert np.all(o > 0.0) and np.all(o < 1.0)

    def test_wrong_input_side(self):
        net = build(NetConfig(seed=0))
        with pytest.raises(ValueError):
            net.forward(np.zeros((32, 32, 3)))


class TestGradients:
    def test_micro_audit_subset(self):
        """Spot-check a stratified subset; the full audit runs in acceptance."""
        net = build(MICRO)
        x, gt = micro_batch()
        checked, failures = audit_gradients(net, x, gt, subset_per_param=4)
        assert checked > 0
        assert not failures, failures[:5]

    def test_reconstruction_zero_when_gt_matches_output(self):
        net = build(MICRO)
        x, _ = micro_batch()
        trace = net.forward(x)
        report, grads = compute_gradients(net, trace, np.array(trace.final))
        assert report.reconstruction == 0.0

    def test_two_identical_steps_identical_updates(self):
        x, gt = micro_batch()
        results = []
        for _ in range(2):
            net = build(MICRO)
            adam = AdamState(lr=1e-3)
            for _ in range(2):
                trace = net.forward(x)
                backward_and_step(net, trace, gt, adam=adam)
            results.append(net.parameter_vector())
        np.testing.assert_array_equal(results[0], results[1])

    def test_enhanced_term_reported_and_backpropagated(self):
        net = build(MICRO)
        x, gt = micro_batch()
        w = LossWeights(include_enhanced=True)
        trace = net.forward(x)
        report, grads = compute_gradients(net, trace, gt, w)
        assert report.enhanced > 0.0
        base_report, base_grads = compute_gradients(net, net.forward(x), gt)
        assert report.total > base_report.total
        diff = sum(np.abs(grads[n] - base_grads[n]).max() for n in grads)
        assert diff > 0.0

    def test_flow_supervision_path(self):
        net = build(MICRO)
        x, gt = micro_batch()
        trace = net.forward(x)
        gt_flows = [np.zeros_like(f) for f in trace.flows]
        report, grads = compute_gradients(net, trace, gt, gt_flows=gt_flows,
                                          flow_weight=1.0)
        assert report.flow_sup > 0.0


class TestTeacherForcing:
    def test_corrected_features_align_better(self):
        board = ndimage.gaussian_filter(checkerboard(64, 4), sigma=(2, 2, 0))
        model = camera.sample_model(21, size=64)
        distorted, _ = distort_image(board, model)
        net = build(NetConfig(seed=0))
        flows = [gt_flow(model, 64 >> l, 64 >> l)[None] for l in (1, 2, 3)]
        forced = net.forward(distorted, flows_override=flows)
        clean = net.forward(board)
        for lvl in (1, 2, 3):
            raw = forced.cache[f"warp{lvl}.feat"]
            corrected = forced.cache[f"skip{lvl}.corrected"]
            ref = clean.cache[f"warp{lvl}.feat"]
            err_raw = np.sqrt(np.mean((raw - ref) ** 2))
            err_corrected = np.sqrt(np.mean((corrected - ref) ** 2))
            assert err_corrected < err_raw

    def test_override_blocks_flow_gradients(self):
        net = build(MICRO)
        x, gt = micro_batch()
        flows = [np.zeros((2, 8, 8, 2)), np.zeros((2, 4, 4, 2))]
        trace = net.forward(x, flows_override=flows)
        _, grads = compute_gradients(net, trace, gt)
        for name, g in grads.items():
            if name.startswith("flow_"):
                assert np.all(g == 0.0), name


class TestTraining:
    def test_smoke_and_determinism(self, toy_dataset):
        cfg = NetConfig(seed=0)
        tc = TrainConfig(iters=6, batch=2, lr=1e-3, seed=1)
        net_a, curve_a = train(toy_dataset, cfg, tc)
        net_b, curve_b = train(toy_dataset, cfg, tc)
        assert len(curve_a) == 6
        assert [r.total for r in curve_a] == [r.total for r in curve_b]
        np.testing.assert_array_equal(net_a.parameter_vector(), net_b.parameter_vector())

    def test_checkpoint_written(self, toy_dataset, tmp_path):
        ckpt = tmp_path / "net.pcnw"
        tc = TrainConfig(iters=3, batch=2, seed=0, ckpt_path=str(ckpt), ckpt_every=2)
        net, _ = train(toy_dataset, NetConfig(seed=0), tc)
        loaded = load_checkpoint(ckpt)
        np.testing.assert_array_equal(loaded.parameter_vector(), net.parameter_vector())

    def test_empty_dataset(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        with pytest.raises(ValueError):
            train(empty, NetConfig(seed=0), TrainConfig(iters=1))

    def test_trained_epe_improves_on_probe(self, trained_run, toy_dataset):
        net, _, cfg, _ = trained_run
        probe = natural_scene(64, seed=77)
        model = camera.sample_model(99, size=64)
        distorted, _ = distort_image(probe, model)
        reference = gt_flow(model, 32, 32)
        pred_trained = predict_flow_pyramid(net, distorted)[0]
        pred_fresh = predict_flow_pyramid(build(cfg), distorted)[0]
        assert flow_epe(pred_trained, reference) < flow_epe(pred_fresh, reference)


class TestPredictFlowPyramid:
    def test_shapes(self):
        net = build(NetConfig(seed=0))
        pyr = predict_flow_pyramid(net, np.zeros((64, 64, 3)))
        assert [f.shape[0] for f in pyr] == [32, 16, 8]
        assert all(f.shape[-1] == 2 for f in pyr)

    def test_zero_heads_zero_displacement(self):
        net = build(NetConfig(seed=0))
        for name in net.params:
            if name.startswith("flow_head"):
                net.params[name][...] = 0.0
        pyr = predict_flow_pyramid(net, np.random.default_rng(0).random((64, 64, 3)))
        assert all(max_displacement(f) == 0.0 for f in pyr)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        net = build(MICRO)
        path = tmp_path / "m.pcnw"
        save_checkpoint(path, net)
        loaded = load_checkpoint(path)
        assert loaded.config == net.config
        np.testing.assert_array_equal(loaded.parameter_vector(), net.parameter_vector())
        # write again: byte-identical file
        path2 = tmp_path / "m2.pcnw"
        save_checkpoint(path2, loaded)
        assert path.read_bytes() == path2.read_bytes()

    def test_header(self, tmp_path):
        net = build(MICRO)
        path = tmp_path / "m.pcnw"
        save_checkpoint(path, net)
        blob = path.read_bytes()
        assert blob[:4] == b"PCNW"
        assert int.from_bytes(blob[4:8], "little") == 1
        assert int.from_bytes(blob[8:12], "little") == net.parameter_count()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pcnw"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValueError):
            load_checkpoint(path)
