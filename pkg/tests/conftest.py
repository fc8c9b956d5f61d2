import pytest

from twoechelon.core import Policy, SystemParams


def make_params(N=2, Q=2, lam=1.0, L=1.0, L0=1.0, h=1.0, h0=1.0, beta=5.0) -> SystemParams:
    return SystemParams(N=N, lam=lam, L=L, L0=L0, h=h, h0=h0, beta=beta, Q=Q)


@pytest.fixture
def base_params() -> SystemParams:
    return make_params()


@pytest.fixture
def base_policy() -> Policy:
    return Policy(m=1, R=1, s=1)
