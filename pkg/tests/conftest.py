import numpy as np
import pytest

from ris_secrecy.scenario import default_scenario


@pytest.fixture
def default():
    return default_scenario()


@pytest.fixture
def desk():
    """N=M=4 with two users and two eavesdroppers."""
    return default_scenario(N=4, M=4).subset(2, 2)


@pytest.fixture
def tiny():
    return default_scenario(N=2, M=2).subset(2, 1)


def random_phases(M, seed=5):
    return np.random.default_rng(seed).uniform(0.0, 2 * np.pi, M)


def unit_scenario(**over):
    """One user, one eavesdropper, N=M=1, every path gain 1 and sigma^2 = 1 W."""
    from ris_secrecy.scenario import scenario_from_dict

    data = {
        "K": 1, "J": 1, "N": 1, "M": 1, "user_powers": 1.0, "ris_power": 8.0, "bs_power": 1.0,
        "noise_dbm": 30.0, "kappa": 2.0,
        "rician": {"rho_b": 0.5, "rho_k": 0.5, "rho_ej_r": 0.5},
        "layout": {"bs_pos": [0, 0], "ris_pos": [1, 0], "user_pos": [[1, 1]], "eave_pos": [[2, 0]]},
        "pathloss": {"alpha_r": 2.0, "alpha_b": 2.0, "alpha_e": 2.0},
        "angle_seed": 0, "trial_seed": 0,
    }
    data.update(over)
    return scenario_from_dict(data)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(n, ok, detail):
        _ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_ACCEPTANCE[n])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
