import pytest

from spectrum_auction import MarketConfig, TypeDistribution


@pytest.fixture(scope="session")
def trunc_normal():
    return TypeDistribution.truncated_normal(125, 50, 50, 200)


@pytest.fixture(scope="session")
def uniform_dist():
    return TypeDistribution.uniform(50, 200)


@pytest.fixture(scope="session")
def market_k4(trunc_normal):
    """Four-seller worked-example market: small buyer throughput."""
    return MarketConfig(k=4, dist=trunc_normal, eta_apo=0.3, delta_lte=0.4, r_lte=95.0)


@pytest.fixture(scope="session")
def market_uniform_k2(uniform_dist):
    return MarketConfig(k=2, dist=uniform_dist, eta_apo=0.3, delta_lte=0.4, r_lte=300.0)
