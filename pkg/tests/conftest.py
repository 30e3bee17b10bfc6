import numpy as np
import pytest

from avgsmooth import FiniteMetricSpace, LabeledSample, WeightedSample, build_space


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


def line_space(n: int, lo: float = 0.0, hi: float = 1.0) -> FiniteMetricSpace:
    return build_space(coords=np.linspace(lo, hi, n)[:, None])


def random_labeled(rng, n: int, d: int = 1, kind: str = "real01") -> LabeledSample:
    # jittered grid keeps points distinct without a rejection loop
    base = np.linspace(0.0, 1.0, n)
    coords = np.stack(
        [base + rng.uniform(-0.2, 0.2, size=n) / max(n, 2)] +
        [rng.uniform(0.0, 1.0, size=n) for _ in range(d - 1)],
        axis=1,
    )
    space = build_space(coords=coords)
    w = rng.uniform(0.2, 1.0, size=n)
    w /= w.sum()
    if kind == "binary":
        y = (rng.uniform(size=n) < 0.5).astype(np.float64)
    else:
        y = rng.uniform(0.0, 1.0, size=n)
    return LabeledSample(WeightedSample(space, w), y, kind=kind)
