"""Shared test configuration.

Hypothesis: dense eigensolves make per-example timing noisy, so the
deadline is disabled globally and example counts are kept modest.
Individual tests that need more examples override locally.
"""

from hypothesis import settings

settings.register_profile("qsklab", deadline=None, max_examples=50)
settings.load_profile("qsklab")
