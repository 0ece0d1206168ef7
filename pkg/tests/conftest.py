import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from ddtloc import synth


@pytest.fixture(scope="session")
def planted_set(tmp_path_factory):
    """Standard seeded 20-image planted set: (spec, manifest)."""
    out = tmp_path_factory.mktemp("planted")
    spec = synth.random_spec(seed=7, n_images=20, h=16, w=16, d=64,
                             signal_strength=8.0, noise_sigma=1.0, n_noisy=2)
    manifest = synth.generate(spec, out)
    return spec, manifest


@pytest.fixture(scope="session")
def two_layer_set(tmp_path_factory):
    out = tmp_path_factory.mktemp("planted2")
    spec = synth.random_spec(seed=11, n_images=12, h=12, w=12, d=48,
                             signal_strength=8.0, noise_sigma=1.0, n_noisy=1,
                             two_layer=True)
    manifest = synth.generate(spec, out)
    return spec, manifest
