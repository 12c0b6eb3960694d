"""Shared fixtures and random-parameter factories."""
import math

import numpy as np
import pytest

from quadmech import LinearizedParams, SystemParams, validate_params


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_system(**kw) -> SystemParams:
    base = dict(delta_c=5.0, omega1=5.0, omega2=5.0, g1=0.05, g2=-0.0004,
                omega_ex=1.0, theta=math.pi, eta=95.0, kappa=1.0)
    base.update(kw)
    return validate_params(SystemParams(**base))


def make_linearized(**kw) -> LinearizedParams:
    base = dict(delta_eff=1.0, omega1=1.0, omega2_tilde=1.0, g1_eff=0.1,
                g2_eff=-0.01, g22=-0.01, omega_ex=0.1, theta=math.pi,
                kappa=0.1, gamma1=2e-6, gamma2=2e-6, nbar1=300.0, nbar2=300.0,
                origin="direct")
    base.update(kw)
    return LinearizedParams(**base)


def random_system(rng, g2_zero=False, decoupled=False) -> SystemParams:
    """Parameter draw spanning the reference operating ranges (kappa units)."""
    g1 = 0.0 if decoupled else 10**rng.uniform(-2.3, -1.0)
    g2 = 0.0 if (g2_zero or decoupled) else -(10**rng.uniform(-5.0, -3.0))
    return make_system(
        delta_c=rng.uniform(0.0, 10.0),
        omega1=rng.uniform(3.0, 7.0),
        omega2=rng.uniform(3.0, 7.0),
        g1=g1, g2=g2,
        omega_ex=10**rng.uniform(-2.5, 0.3),
        theta=rng.uniform(0.0, 2.0 * math.pi),
        eta=10**rng.uniform(1.0, 2.0),
    )


def random_linearized(rng, couplings_zero=False) -> LinearizedParams:
    g1 = 0.0 if couplings_zero else rng.uniform(0.01, 0.2)
    g2 = 0.0 if couplings_zero else -rng.uniform(0.01, 0.2)
    om = 0.0 if couplings_zero else rng.uniform(0.0, 0.2)
    g22 = 0.0 if couplings_zero else -rng.uniform(0.0, 0.2)
    return make_linearized(
        delta_eff=rng.uniform(0.5, 1.5),
        omega2_tilde=rng.uniform(0.8, 1.2),
        g1_eff=g1, g2_eff=g2, g22=g22, omega_ex=om,
        theta=rng.uniform(0.0, 2.0 * math.pi),
        kappa=rng.uniform(0.05, 0.5),
        gamma1=10**rng.uniform(-6.0, -4.0),
        gamma2=10**rng.uniform(-6.0, -4.0),
        nbar1=rng.uniform(0.0, 300.0),
        nbar2=rng.uniform(0.0, 300.0),
    )
