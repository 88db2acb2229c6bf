import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_synth():
    from kineme.pipeline.synth import SynthConfig, synth_generate

    return synth_generate(SynthConfig(n_kinemes=4, n_videos=40, duration_s=20, seed=3))


@pytest.fixture(scope="session")
def small_codebook(small_synth):
    from kineme.codebook import learn_kinemes

    return learn_kinemes([v.pose for v in small_synth.videos], n_kinemes=4, seed=0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
