"""Shared test utilities: inverse-construction SDP instances."""

import numpy as np

from momentfit.sdp import SdpBlock, SdpProblem


def _sym(a):
    return 0.5 * (a + a.T)


def random_consistent_sdp(seed):
    """Random SDP with a known optimal primal-dual pair.

    Construction: draw block structures, a strictly complementary pair
    (S*, Y*) per block sharing an eigenbasis with disjoint supports, and a
    target x*; then set F_0 = sum x*_k F_k - S* and c = A*(Y*), which makes
    (x*, Y*) satisfy the KKT conditions exactly.  Kernel dimensions are drawn
    large enough that x* is the unique optimum.
    """
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 6))
    blocks_spec = []
    total_kernel = 0
    while total_kernel < m + 1:
        n = int(rng.integers(2, 5))
        r = int(rng.integers(1, n))
        blocks_spec.append((n, r))
        k = n - r
        total_kernel += k * (k + 1) // 2
    xstar = rng.normal(size=m)
    c = np.zeros(m)
    blocks = []
    for n, r in blocks_spec:
        F = np.array([_sym(rng.normal(size=(n, n))) for _ in range(m)])
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        eig_s = np.concatenate([rng.uniform(0.5, 2.0, size=r), np.zeros(n - r)])
        eig_y = np.concatenate([np.zeros(r), rng.uniform(0.5, 2.0, size=n - r)])
        S = Q @ np.diag(eig_s) @ Q.T
        Y = _sym(Q @ np.diag(eig_y) @ Q.T)
        F0 = _sym(np.einsum("k,kij->ij", xstar, F) - S)
        c += F.reshape(m, -1) @ Y.ravel()
        blocks.append(
            SdpBlock(order=n, f0=F0, coeffs={k: F[k] for k in range(m)})
        )
    return SdpProblem(objective=c, blocks=blocks), xstar
