import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lindrecon.core import PAULI_BASIS, _lindblad_action, bloch_to_density, density_to_bloch

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_report():
    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")


def rk_bloch(H, jumps, r0, times, rtol=1e-12, atol=1e-13):
    """Bloch vectors from adaptive Runge-Kutta integration of the master equation."""
    rho0 = bloch_to_density(r0)

    def rhs(t, y):
        return _lindblad_action(H, jumps, y.reshape(2, 2)).ravel()

    sol = solve_ivp(rhs, (0.0, max(times)), rho0.ravel().astype(complex),
                    method="DOP853", t_eval=times, rtol=rtol, atol=atol)
    assert sol.success
    return np.array([density_to_bloch(sol.y[:, n].reshape(2, 2)) for n in range(len(times))])


def rk_transfer_matrix(H, jumps, t, rtol=1e-12, atol=1e-13):
    """Pauli transfer matrix of the channel at time ``t`` by integrating each basis element."""
    P = np.empty((4, 4))
    for nu, s_nu in enumerate(PAULI_BASIS):
        sol = solve_ivp(lambda _, y: _lindblad_action(H, jumps, y.reshape(2, 2)).ravel(),
                        (0.0, t), s_nu.ravel().astype(complex), method="DOP853", rtol=rtol, atol=atol)
        image = sol.y[:, -1].reshape(2, 2)
        for mu, s_mu in enumerate(PAULI_BASIS):
            P[mu, nu] = 0.5 * np.trace(s_mu @ image).real
    return P
