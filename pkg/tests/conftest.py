import pytest

from bepower import DesignSpec


@pytest.fixture(scope="session")
def motivating():
    """Two-group design used throughout: unequal variances, shifted mean."""
    return DesignSpec(
        mu_diff=-4.0,
        sigma1=18.0,
        sigma2=15.0,
        delta_L=-19.2,
        delta_U=19.2,
        alpha=0.05,
        q=1.0,
    )
