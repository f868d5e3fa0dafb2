import numpy as np
import pytest

from robust_oco.losses import RIDGE, RoundLoss, SideInfo


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_instance(rng, family, lam=None, max_dim=6):
    """A random (loss, side-info) pair with moderate feature norms."""
    d = int(rng.integers(1, max_dim + 1))
    x = rng.standard_normal(d)
    x *= rng.uniform(0.3, 3.0) / np.linalg.norm(x)
    if family == RIDGE:
        y = float(rng.normal(0.0, 2.0))
    else:
        y = float(rng.choice([-1.0, 1.0]))
    lam = float(rng.uniform(1e-4, 2.0)) if lam is None else lam
    return RoundLoss(family=family, lam=lam), SideInfo(x=x, y=y)


def golden_minimize(fun, lo, hi, tol=1e-12, iters=200):
    """Plain golden-section minimizer over [lo, hi]; independent of any closed form."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)
