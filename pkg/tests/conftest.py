import numpy as np
import pytest

from pmtreg.spectra import SymmetricMatrix


def random_spd(rng: np.random.Generator, d: int, max_cond: float = 1e6) -> SymmetricMatrix:
    """Random SPD matrix with condition number at most max_cond."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    log_cond = rng.uniform(0.0, np.log(max_cond))
    lam = np.exp(np.linspace(0.0, log_cond, d))
    lam *= np.exp(rng.uniform(-1.0, 1.0))
    return SymmetricMatrix((q * lam) @ q.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
