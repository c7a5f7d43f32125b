import catforge as cf
import pytest


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Touch both hot kernels once so JIT compilation stays out of timed tests."""
    config = cf.ChannelConfig(
        channels=(
            cf.Channel(mode=0, qubit="H", chi=1.0, gamma=1.0, duration=0.01),
            cf.Channel(mode=1, qubit="V", chi=1.0, gamma=1.0, duration=0.01),
        )
    )
    cf.evolve_sliced(cf.xpm_input_state(0.5), config, 2)
    cf.integrate(cf.xpm_input_density(0.5, (8, 8)), config, 0.01)
