"""Exact sampled-data LQ reference for the damped oscillator test.

q' = A q + B u, cost int q'Qq + u'Ru over [0, 3], q(0) = (1, 0), q(3) = 0,
control held on 6 intervals of 0.5. Discretised exactly with matrix
exponentials (Van Loan for the cost), then solved as an equality-constrained
QP (no bound is active at the optimum).
"""
import numpy as np
from scipy.linalg import expm

A = np.array([[0.0, 1.0], [-1.0, -0.3]])
B = np.array([[0.0], [1.0]])
Q = np.diag([1.0, 0.5])
R = np.array([[1.0]])
T, K = 0.5, 6
n, m = 2, 1

# Van Loan: exp of [[-A', Q, 0], [0, 0, 0]] style block for the joint (q, u) system.
F = np.zeros((n + m, n + m))
F[:n, :n] = A
F[:n, n:] = B
W = np.zeros((n + m, n + m))
W[:n, :n] = Q
W[n:, n:] = R
big = np.zeros((2 * (n + m), 2 * (n + m)))
big[: n + m, : n + m] = -F.T
big[: n + m, n + m :] = W
big[n + m :, n + m :] = F
E = expm(big * T)
Phi = E[n + m :, n + m :]
Ad, Bd = Phi[:n, :n], Phi[:n, n:]
Wd = Phi.T @ E[: n + m, n + m :]
Wd = 0.5 * (Wd + Wd.T)

# Decision vector z = (u_0..u_{K-1}); states are affine in z.
q0 = np.array([1.0, 0.0])
Sx = [np.zeros((n, K))]
cx = [q0]
for k in range(K):
    S = Ad @ Sx[-1]
    S[:, k] += Bd[:, 0]
    Sx.append(S)
    cx.append(Ad @ cx[-1])
H = np.zeros((K, K))
g = np.zeros(K)
c0 = 0.0
for k in range(K):
    M = np.zeros((n + m, K))
    M[:n] = Sx[k]
    M[n, k] = 1.0
    off = np.concatenate([cx[k], [0.0]])
    H += M.T @ Wd @ M
    g += M.T @ Wd @ off
kkt = np.block([[2 * H, Sx[K].T], [Sx[K], np.zeros((n, n))]])
rhs = np.concatenate([-2 * g, -cx[K]])
u = np.linalg.solve(kkt, rhs)[:K]
assert np.all(np.abs(u) < 1.0)
for v in u:
    print(f"{v:.12e}")
