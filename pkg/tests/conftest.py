import pytest


@pytest.fixture(autouse=True)
def _no_seed_override(monkeypatch):
    # a stray SEMSTEG_SEED in the environment would change config seeds
    monkeypatch.delenv("SEMSTEG_SEED", raising=False)


@pytest.fixture(scope="session")
def trained_codec():
    """Default codec trained on 200 synthetic images for 30 epochs (seed 42)."""
    from semsteg.codec import CodecConfig, train_codec
    from semsteg.harness.data import synth_dataset
    from semsteg.numerics import Rng

    model, history = train_codec(synth_dataset(42, 200), CodecConfig(), Rng(42))
    return model, history


@pytest.fixture(scope="session")
def tiny_codec():
    """Briefly trained codec for plumbing tests."""
    from semsteg.codec import CodecConfig, CodecTrainConfig, train_codec
    from semsteg.harness.data import synth_dataset
    from semsteg.numerics import Rng

    model, _ = train_codec(synth_dataset(3, 32), CodecConfig(), Rng(3), CodecTrainConfig(epochs=2))
    return model


# Filled by tests/test_acceptance.py: criterion number -> (passed, detail).
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
