import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from hypothesis import settings  # noqa: E402

settings.register_profile("orthopersist", max_examples=50, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "orthopersist"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo or large-n runs (deselect with -m 'not slow')")
