"""Independent brute-force references used by the tests.

Everything here deliberately avoids the package's block decomposition: the
master equation is integrated as one dense matrix ODE and initial states are
rebuilt from explicit eigenvector rotations, so agreement with the package is
a real cross-check rather than the same code run twice.
"""

import numpy as np
from scipy.integrate import solve_ivp


def two_level_block(params, n):
    """Bare-basis Hamiltonian of the n-excitation sector, {|g,n>, |e,n-1>}."""
    coupling = params.rabi * np.sqrt(n)
    return np.array([
        [n * params.omega_sm, coupling],
        [coupling, (n - 1) * params.omega_sm + params.omega_tls],
    ])


def dense_operators(gen):
    """Hamiltonian and jump operators of the generator as dense matrices."""
    basis = gen.basis
    levels = basis.levels()
    idx = {lvl: i for i, lvl in enumerate(levels)}
    dim = len(levels)
    ham = np.diag([basis.frequency(lvl) for lvl in levels])
    root_g0 = np.sqrt(basis.params.gamma0)
    jumps = []
    for tr in gen.transitions:
        op = np.zeros((dim, dim))
        op[idx[tr.to_level], idx[tr.from_level]] = tr.amplitude
        jumps.append(root_g0 * op)
    return levels, idx, ham, jumps


def dense_from_state(state, idx, dim):
    """Dense matrix <a|rho|b> from a block state.

    The block code stores the coefficient of |a><b|, which sits at the
    transposed matrix position.
    """
    mat = np.zeros((dim, dim), dtype=complex)
    for lvl, val in state.pops.items():
        mat[idx[lvl], idx[lvl]] = val
    for (a, b), val in state.offdiag.items():
        mat[idx[b], idx[a]] = val
    return mat


def dense_master_solution(gen, rho0_mat, t_grid, rtol=1e-11, atol=1e-13):
    """Integrate d rho/dt = -i[H, rho] + sum_L (L rho L+ - {L+L, rho}/2)."""
    _, _, ham, jumps = dense_operators(gen)
    dim = ham.shape[0]

    def rhs(_t, y):
        rho = y.reshape(dim, dim)
        out = -1j * (ham @ rho - rho @ ham)
        for op in jumps:
            op_dag = op.conj().T
            out += op @ rho @ op_dag - 0.5 * (op_dag @ op @ rho + rho @ op_dag @ op)
        return out.ravel()

    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), rho0_mat.ravel().astype(complex),
                    method="DOP853", t_eval=t_grid, rtol=rtol, atol=atol)
    assert sol.success, sol.message
    return [sol.y[:, i].reshape(dim, dim) for i in range(len(t_grid))]


def supnorm_vs_dense(state, mat, idx):
    """Largest gap between a block state and a dense matrix over tracked elements."""
    worst = 0.0
    for lvl, val in state.pops.items():
        worst = max(worst, abs(mat[idx[lvl], idx[lvl]].real - val))
    for (a, b), val in state.offdiag.items():
        worst = max(worst, abs(mat[idx[b], idx[a]] - val))
    return worst
