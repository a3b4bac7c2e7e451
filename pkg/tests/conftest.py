"""Shared fixtures: procedural scenes, a toy dataset, and one trained run."""

import numpy as np
import pytest

from fisheyeflow import synth
import fisheyeflow.network as nw

from _scenes import natural_scene

TOY_SIZE = 64
TOY_COUNT = 64
TOY_SEED = 7


@pytest.fixture(scope="session")
def scene_dir(tmp_path_factory):
    """Directory of deterministic photo-like source images."""
    path = tmp_path_factory.mktemp("scenes")
    for i in range(16):
        synth.save_image(path / f"scene{i:02d}.png", natural_scene(96, seed=100 + i))
    return path


@pytest.fixture(scope="session")
def toy_dataset(scene_dir, tmp_path_factory):
    """64-sample synthetic dataset at 64x64 (the training acceptance setup)."""
    out = tmp_path_factory.mktemp("toy_data")
    synth.make_dataset(scene_dir, out, count=TOY_COUNT, seed=TOY_SEED, size=TOY_SIZE)
    return out


@pytest.fixture(scope="session")
def toy_samples(toy_dataset):
    return nw.load_samples(toy_dataset, side=TOY_SIZE)


@pytest.fixture(scope="session")
def trained_run(toy_dataset):
    """One full 300-iteration training run with pinned seeds."""
    cfg = nw.NetConfig(seed=0)
    tc = nw.TrainConfig(iters=300, batch=4, lr=1e-4, seed=0)
    net, curve = nw.train(toy_dataset, cfg, tc)
    return net, curve, cfg, tc
