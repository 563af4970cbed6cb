"""Reference implementations built on scipy and cvxpy, independent of condent."""

import warnings

import numpy as np
import scipy.linalg as sla


def umegaki(rho, sigma):
    return float(np.real(np.trace(rho @ (sla.logm(rho) - sla.logm(sigma)))) / np.log(2))


def petz(rho, sigma, a):
    q = np.trace(sla.fractional_matrix_power(rho, a) @ sla.fractional_matrix_power(sigma, 1 - a)).real
    return float(np.log2(q) / (a - 1))


def sandwiched(rho, sigma, a):
    h = sla.fractional_matrix_power(sigma, (1 - a) / (2 * a))
    inner = h @ rho @ h
    q = np.trace(sla.fractional_matrix_power((inner + inner.conj().T) / 2, a)).real
    return float(np.log2(q) / (a - 1))


def max_relative(rho, sigma):
    s = sla.inv(sla.sqrtm(sigma))
    return float(np.log2(np.max(np.linalg.eigvals(s @ rho @ s).real)))


def reference(rho, da, db):
    rb = np.einsum("abac->bc", rho.reshape(da, db, da, db))
    return np.kron(np.eye(da) / da, rb)


def hmin_up_cvxpy(rho, da, db):
    """-log2 min Tr X s.t. I (x) X >= rho, via cvxpy."""
    import cvxpy as cp

    x = cp.Variable((db, db), hermitian=True)
    cons = [cp.kron(np.eye(da), x) - rho >> 0]
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(x))), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(-np.log2(prob.value))


def cond_majorizes_cvxpy(rho, da, db, target, bp, mode="locally_balanced"):
    """Smallest L-infinity residual of the channel search, solved with cvxpy."""
    import cvxpy as cp

    n = da * db * da * bp
    j = cp.Variable((n, n), hermitian=True)
    t = cp.Variable(nonneg=True)

    def ptrace(expr, dims, axis):
        return cp.partial_trace(expr, dims, axis)

    dims = [da, db, da, bp]
    cons = [j >> 0]
    tr_out = ptrace(ptrace(j, dims, 3), [da, db, da], 2)
    eqs = [tr_out - np.eye(da * db)]
    j_batb = ptrace(j, dims, 0)
    j_bb = ptrace(j_batb, [db, da, bp], 1)
    u = np.eye(da) / da
    # J_{B A~ B'} = J_{B B'} (x) u_{A~}, with the A~ factor moved to the middle
    eqs.append(j_batb - _middle(j_bb, u, db, da, bp))
    if mode == "locally_balanced":
        j_abb = ptrace(j, dims, 2)
        eqs.append(j_abb - cp.kron(u, j_bb))
    big = cp.kron(rho.T, np.eye(da * bp))
    out = ptrace(ptrace(big @ j, dims, 0), [db, da, bp], 0)
    eqs.append(out - target)
    for e in eqs:
        cons += [cp.real(e) <= t, cp.real(e) >= -t, cp.imag(e) <= t, cp.imag(e) >= -t]
    prob = cp.Problem(cp.Minimize(t), cons)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # clarabel flags near-zero optima as inaccurate
        prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def _middle(j_bb, u, db, da, bp):
    import cvxpy as cp

    # permutation matrix taking (B, B', A~) to (B, A~, B')
    n = db * da * bp
    p = np.zeros((n, n))
    for b in range(db):
        for t in range(da):
            for q in range(bp):
                p[(b * da + t) * bp + q, (b * bp + q) * da + t] = 1
    return p @ cp.kron(j_bb, u) @ p.T
