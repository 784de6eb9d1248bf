import numpy as np
import pytest

from asrbias import corpus, synthdata, vtln


def sine_wave(freq=440.0, duration=1.0, rate=16000, amplitude=0.5):
    t = np.arange(int(duration * rate)) / rate
    from asrbias.dsp import Waveform

    return Waveform((amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32), rate)


@pytest.fixture(scope="session")
def tone440():
    return sine_wave()


@pytest.fixture(scope="session")
def small_warp_setup(tmp_path_factory):
    """Fast trained VTLN model on a 0.9/1.0/1.1 corpus, for unit tests."""
    root = tmp_path_factory.mktemp("warp-small")
    train_man = synthdata.make_warp_corpus(
        root / "train",
        scales=(0.9, 1.0, 1.1),
        n_per_scale={0.9: 5, 1.0: 8, 1.1: 5},
        duration_s=1.0,
        seed=5,
        name="train",
    )
    test_man = synthdata.make_warp_corpus(
        root / "test",
        scales=(0.9, 1.0, 1.1),
        n_per_scale=3,
        duration_s=1.0,
        seed=6,
        name="test",
    )
    cfg = vtln.VtlnConfig(n_components=1, em_iters=6, outer_iters=4, seed=0)
    model = vtln.train_vtln(corpus.load_manifest(train_man), cfg)
    return {"train": train_man, "test": test_man, "cfg": cfg, "model": model}


@pytest.fixture(scope="session")
def recovery_corpus(tmp_path_factory):
    """The full 30 + 30 utterance formant corpus used by the acceptance suite."""
    root = tmp_path_factory.mktemp("warp-full")
    train_man = synthdata.make_warp_corpus(
        root / "train",
        n_per_scale={0.85: 8, 1.0: 14, 1.15: 8},
        seed=0,
        name="train",
    )
    test_man = synthdata.make_warp_corpus(root / "test", n_per_scale=10, seed=1, name="test")
    return {"train": train_man, "test": test_man}
