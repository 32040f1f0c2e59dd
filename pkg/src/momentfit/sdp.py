"""Self-contained primal-dual interior-point solver for block-diagonal SDPs.

Standard form (linear matrix inequality):

    minimize    c'x
    subject to  S_b(x) := sum_k x_k F_k^b - F_0^b  >=  0   for every block b,

with symmetric F matrices and PSD-cone blocks (order-1 blocks double as
nonnegative scalars, so LPs are a special case).  The Lagrangian dual is
max sum_b <F_0^b, Y_b> over Y_b >= 0 with sum_b <F_k^b, Y_b> = c_k.

Algorithm: path following on the perturbed complementarity S_b Y_b = mu I
with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.  In the
NT-scaled coordinates both S and Y map to the same diagonal matrix D, which
keeps every formula short: the scaling is G_b with S = G D G', Y = G^{-T} D
G^{-1}, obtained from Cholesky factors of S and Y and one SVD per block.

A strictly feasible slack start always exists because solve() internally
appends a heavily penalized variable tau with identity coefficient in every
block (big-M); tau is driven to zero on feasible problems and a persistently
positive tau at convergence reports infeasibility.  The solver is fully
deterministic: no randomness anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CholeskyFailure, InputError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max_iterations"
NUMERICAL_TROUBLE = "numerical_trouble"

_FRACTION_TO_BOUNDARY = 0.98


@dataclass
class SdpBlock:
    """One PSD cone block: S = sum_k x_k coeffs[k] - f0 must be PSD."""

    order: int
    f0: np.ndarray
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 1:
            raise InputError("block order must be positive")
        self.f0 = _symmetrize_check(np.asarray(self.f0, dtype=float), self.order, "F0")
        self.coeffs = {
            int(k): _symmetrize_check(np.asarray(v, dtype=float), self.order, f"F_{k}")
            for k, v in self.coeffs.items()
        }


def _symmetrize_check(arr, order, name):
    if arr.shape != (order, order):
        raise InputError(f"{name} has shape {arr.shape}, expected ({order},{order})")
    if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(arr).max())):
        raise InputError(f"{name} is not symmetric")
    return 0.5 * (arr + arr.T)


@dataclass
class SdpProblem:
    """Block-structured linear SDP in LMI standard form."""

    objective: np.ndarray
    blocks: list

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        m = self.objective.shape[0]
        for blk in self.blocks:
            for k in blk.coeffs:
                if not 0 <= k < m:
                    raise InputError(f"block references unknown variable {k}")

    @property
    def num_variables(self):
        return int(self.objective.shape[0])

    @property
    def block_orders(self):
        return [blk.order for blk in self.blocks]

    def to_sdpa_sparse(self):
        """Serialize in SDPA sparse format (.dat-s), upper-triangle entries."""
        lines = [
            f"{self.num_variables}",
            f"{len(self.blocks)}",
            " ".join(str(blk.order) for blk in self.blocks),
            " ".join(repr(float(c)) for c in self.objective),
        ]
        def emit(k, b, mat):
            out = []
            for i in range(mat.shape[0]):
                for j in range(i, mat.shape[1]):
                    if mat[i, j] != 0.0:
                        out.append(
                            f"{k} {b + 1} {i + 1} {j + 1} {repr(float(mat[i, j]))}"
                        )
            return out
        for b, blk in enumerate(self.blocks):
            lines.extend(emit(0, b, blk.f0))
        for k in range(self.num_variables):
            for b, blk in enumerate(self.blocks):
                if k in blk.coeffs:
                    lines.extend(emit(k + 1, b, blk.coeffs[k]))
        return "\n".join(lines) + "\n"


@dataclass
class SdpSolution:
    """Primal-dual solution with status and per-iteration trace."""

    x: np.ndarray
    duals: list
    primal_objective: float
    dual_objective: float
    status: str
    iterations: int
    info: dict = field(default_factory=dict)

    @property
    def gap(self):
        return abs(self.primal_objective - self.dual_objective)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def _dense_tensors(problem, with_bigm):
    """Per-block (m_aug, n, n) coefficient tensors; last variable is tau."""
    m = problem.num_variables
    m_aug = m + 1 if with_bigm else m
    tensors, f0s = [], []
    for blk in problem.blocks:
        F = np.zeros((m_aug, blk.order, blk.order))
        for k, mat in blk.coeffs.items():
            F[k] = mat
        if with_bigm:
            F[m] = np.eye(blk.order)
        tensors.append(F)
        f0s.append(blk.f0.copy())
    if with_bigm:
        # extra order-1 block enforcing tau >= 0
        F = np.zeros((m_aug, 1, 1))
        F[m, 0, 0] = 1.0
        tensors.append(F)
        f0s.append(np.zeros((1, 1)))
    return tensors, f0s


def _step_limit(dvals, delta):
    # largest alpha with D + alpha*delta PD, D = diag(dvals) > 0.
    scal = 1.0 / np.sqrt(dvals)
    W = delta * np.outer(scal, scal)
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _phi(mat, dvals):
    # inverse of the Lyapunov-type map M -> (D M + M D)/2 for diagonal D.
    return 2.0 * mat / np.add.outer(dvals, dvals)


def _initial_dual(tensors, c_aug, orders):
    """Attempt an exactly dual-feasible PD start Y = rho*I + sum w_k F_k."""
    m_aug = c_aug.shape[0]
    t = np.zeros(m_aug)
    B = np.zeros((m_aug, m_aug))
    for F in tensors:
        flat = F.reshape(m_aug, -1)
        B += flat @ flat.T
        t += np.trace(F, axis1=1, axis2=2)
    for rho_scale in (1.0, 10.0, 100.0, 1000.0):
        rho = rho_scale * (1.0 + np.abs(c_aug).max())
        try:
            w = np.linalg.solve(B, c_aug - rho * t)
        except np.linalg.LinAlgError:
            break
        ys = []
        ok = True
        for F, n in zip(tensors, orders):
            Y = rho * np.eye(n) + np.einsum("k,kij->ij", w, F)
            Y = 0.5 * (Y + Y.T)
            try:
                np.linalg.cholesky(Y)
            except np.linalg.LinAlgError:
                ok = False
                break
            ys.append(Y)
        if ok:
            return ys, True
    rho = 1.0 + np.abs(c_aug).max()
    return [rho * np.eye(n) for n in orders], False


def solve(problem, tol=1e-8, max_iter=100):
    """Solve an SdpProblem; never raises on solvable-but-degenerate inputs.

    Returns an SdpSolution whose status is one of optimal / infeasible /
    max_iterations / numerical_trouble.  On optimal the duality gap satisfies
    |primal - dual| <= tol*(1+|primal|) and every slack block is PSD up to
    -tol.
    """
    m = problem.num_variables
    c = problem.objective
    big_m = 1e5 * (1.0 + (np.abs(c).max() if m else 0.0))
    prev_tau = None
    sol = None
    for attempt in range(3):
        sol = _solve_once(problem, tol, max_iter, big_m)
        if sol.status != INFEASIBLE:
            return sol
        tau = sol.info["tau"]
        # tau stable under a growing penalty means genuine infeasibility;
        # a shrinking tau means the big-M bound was simply too small.
        if prev_tau is not None and tau > 0.1 * prev_tau:
            return sol
        prev_tau = tau
        big_m *= 100.0
    return sol


def _solve_once(problem, tol, max_iter, big_m):
    m = problem.num_variables
    c = problem.objective
    tensors, f0s = _dense_tensors(problem, with_bigm=True)
    orders = [F.shape[1] for F in tensors]
    n_user = len(problem.blocks)
    N = sum(orders)
    m_aug = m + 1
    c_aug = np.concatenate([c, [big_m]])

    # strictly feasible slack start: x = 0, tau just above max eigenvalue of F0
    tau0 = 1.0
    for f0 in f0s:
        if f0.shape[0]:
            tau0 = max(tau0, float(np.linalg.eigvalsh(f0)[-1]) + 1.0)
    x = np.zeros(m_aug)
    x[m] = tau0
    ys, dual_feasible_start = _initial_dual(tensors, c_aug, orders)

    trace = []
    status = MAX_ITERATIONS
    iterations = 0
    # residual scale from the original objective; big-M must not loosen it
    c_scale = 1.0 + (np.abs(c).max() if m else 0.0)
    stall = 0

    for it in range(1, max_iter + 1):
        iterations = it
        slacks = []
        for F, f0 in zip(tensors, f0s):
            S = np.einsum("k,kij->ij", x, F) - f0
            slacks.append(0.5 * (S + S.T))

        atY = np.zeros(m_aug)
        for F, Y in zip(tensors, ys):
            atY += F.reshape(m_aug, -1) @ Y.ravel()
        r_d = c_aug - atY
        r_d_inf = float(np.abs(r_d).max())

        gap = sum(float(np.tensordot(S, Y)) for S, Y in zip(slacks, ys))
        mu = gap / N
        primal = float(c_aug @ x)
        dual = sum(float(np.tensordot(f0, Y)) for f0, Y in zip(f0s, ys))
        tau = x[m]
        trace.append(
            {
                "mu": mu,
                "primal": float(c @ x[:m]),
                "dual": dual,
                "gap": gap,
                "r_d_inf": r_d_inf,
                "tau": float(tau),
            }
        )

        converged = (
            abs(primal - dual) <= tol * (1.0 + abs(primal))
            and gap <= 10.0 * tol * (1.0 + abs(primal))
            and r_d_inf <= tol * c_scale
        )
        if converged:
            if tau > 1e3 * tol * tau0:
                status = INFEASIBLE
            else:
                status = OPTIMAL
            break

        try:
            Ginvs, ds = [], []
            for S, Y in zip(slacks, ys):
                L = np.linalg.cholesky(S)
                Ly = np.linalg.cholesky(Y)
                U, dvals, Vt = np.linalg.svd(Ly.T @ L)
                if dvals[-1] <= 0:
                    raise np.linalg.LinAlgError("scaling breakdown")
                V = Vt.T
                Ginv = (np.sqrt(dvals)[:, None] * V.T) @ np.linalg.inv(L)
                Ginvs.append(Ginv)
                ds.append(dvals)
        except np.linalg.LinAlgError:
            status = NUMERICAL_TROUBLE
            break

        # NT-scaled coefficient tensors and Schur complement
        fts = []
        M = np.zeros((m_aug, m_aug))
        for F, Ginv in zip(tensors, Ginvs):
            ft = Ginv @ (F @ Ginv.T)
            ft = 0.5 * (ft + ft.transpose(0, 2, 1))
            fts.append(ft)
            flat = ft.reshape(m_aug, -1)
            M += flat @ flat.T
        M = 0.5 * (M + M.T)
        LM = None
        jitter = 0.0
        for bump in (0.0, 1e-14, 1e-11, 1e-8):
            jitter = bump * np.trace(M) / m_aug
            try:
                LM = np.linalg.cholesky(M + jitter * np.eye(m_aug))
                break
            except np.linalg.LinAlgError:
                continue
        if LM is None:
            status = NUMERICAL_TROUBLE
            break

        def schur_solve(rhs):
            return np.linalg.solve(LM.T, np.linalg.solve(LM, rhs))

        # predictor (affine direction): dual residual cancels exactly
        dx_aff = schur_solve(-c_aug)
        dS_aff = [np.einsum("k,kij->ij", dx_aff, ft) for ft in fts]
        dY_aff = [-np.diag(d) - dS for d, dS in zip(ds, dS_aff)]
        ap = min((_step_limit(d, dS) for d, dS in zip(ds, dS_aff)), default=np.inf)
        ad = min((_step_limit(d, dY) for d, dY in zip(ds, dY_aff)), default=np.inf)
        ap = min(1.0, 0.9995 * ap)
        ad = min(1.0, 0.9995 * ad)
        mu_aff = sum(
            float(np.tensordot(np.diag(d) + ap * dS, np.diag(d) + ad * dY))
            for d, dS, dY in zip(ds, dS_aff, dY_aff)
        ) / N
        sigma = min(1.0, max(1e-12, (max(mu_aff, 0.0) / mu) ** 3))

        # corrector: rhs_k = sum_b <ft_k, phi_b> - r_d_k
        rhs = -r_d.copy()
        phis = []
        for d, dS, dY, ft in zip(ds, dS_aff, dY_aff, fts):
            corr = 0.5 * (dS @ dY + dY @ dS)
            R = sigma * mu * np.eye(len(d)) - corr
            np.fill_diagonal(R, R.diagonal() - d * d)
            ph = _phi(R, d)
            phis.append(ph)
            rhs += ft.reshape(m_aug, -1) @ ph.ravel()
        dx = schur_solve(rhs)
        dS_hat = [np.einsum("k,kij->ij", dx, ft) for ft in fts]
        dY_hat = [ph - dS for ph, dS in zip(phis, dS_hat)]
        ap = min((_step_limit(d, dS) for d, dS in zip(ds, dS_hat)), default=np.inf)
        ad = min((_step_limit(d, dY) for d, dY in zip(ds, dY_hat)), default=np.inf)
        ap = min(1.0, _FRACTION_TO_BOUNDARY * ap)
        ad = min(1.0, _FRACTION_TO_BOUNDARY * ad)
        trace[-1]["sigma"] = float(sigma)
        trace[-1]["alpha_p"] = float(ap)
        trace[-1]["alpha_d"] = float(ad)
        if min(ap, ad) < 1e-10:
            stall += 1
            if stall >= 3:
                status = NUMERICAL_TROUBLE
                break
        else:
            stall = 0

        x = x + ap * dx
        new_ys = []
        for Y, Ginv, dY in zip(ys, Ginvs, dY_hat):
            dYfull = Ginv.T @ dY @ Ginv
            Ynew = Y + ad * (0.5 * (dYfull + dYfull.T))
            new_ys.append(0.5 * (Ynew + Ynew.T))
        ys = new_ys

    slack_eigs = []
    for F, f0 in zip(tensors[:n_user], f0s[:n_user]):
        S = np.einsum("k,kij->ij", x, F) - f0
        slack_eigs.append(float(np.linalg.eigvalsh(0.5 * (S + S.T))[0]))
    primal_obj = float(c @ x[:m])
    dual_obj = sum(
        float(np.tensordot(f0, Y)) for f0, Y in zip(f0s[:n_user], ys[:n_user])
    )
    info = {
        "trace": trace,
        "tau": float(x[m]),
        "big_m": big_m,
        "big_m_active": bool(x[m] > 1e3 * tol * tau0),
        "r_d_inf": trace[-1]["r_d_inf"] if trace else np.inf,
        "slack_min_eig": slack_eigs,
        "dual_feasible_start": dual_feasible_start,
    }
    return SdpSolution(
        x=x[:m].copy(),
        duals=[Y.copy() for Y in ys[:n_user]],
        primal_objective=primal_obj,
        dual_objective=dual_obj,
        status=status,
        iterations=iterations,
        info=info,
    )


# ---------------------------------------------------------------------------
# quadratic objective reduction
# ---------------------------------------------------------------------------

def epigraph_block(n_vars, rows, offset, lin, const, t_index=0, u_start=1):
    """Schur-complement epigraph block for t >= ||R u + r0||^2 + 2 lin'u + const.

    Variables are indexed in the host problem; u_k is variable u_start+k.
    The block is [[t - const - 2 lin'u, (Ru + r0)'], [Ru + r0, I]].
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    r, s = rows.shape
    offset = np.zeros(r) if offset is None else np.asarray(offset, dtype=float)
    lin = np.zeros(s) if lin is None else np.asarray(lin, dtype=float)
    order = r + 1
    f0 = np.zeros((order, order))
    f0[0, 0] = const
    f0[1:, 1:] = -np.eye(r)
    f0[0, 1:] = -offset
    f0[1:, 0] = -offset
    coeffs = {}
    Ft = np.zeros((order, order))
    Ft[0, 0] = 1.0
    coeffs[t_index] = Ft
    for k in range(s):
        col = rows[:, k]
        if not np.any(col) and lin[k] == 0.0:
            continue
        Fk = np.zeros((order, order))
        Fk[0, 0] = -2.0 * lin[k]
        Fk[0, 1:] = col
        Fk[1:, 0] = col
        coeffs[u_start + k] = Fk
    return SdpBlock(order=order, f0=f0, coeffs=coeffs)


def quadratic_to_sdp(M, y, extra_blocks=(), shift=0.0):
    """Epigraph SDP for min u'Mu - 2u'y subject to caller LMI blocks in u.

    M must be PSD with a Cholesky factorization M = R'R; the epigraph block
    is [[t + 2u'y + shift, (Ru)'], [Ru, I]].  Variable 0 of the returned
    problem is t, variables 1..s are the entries of u; extra blocks must key
    their coefficients by u-index (0-based) and are re-keyed here.
    """
    M = np.asarray(M, dtype=float)
    y = np.asarray(y, dtype=float)
    s = M.shape[0]
    if M.shape != (s, s) or y.shape != (s,):
        raise InputError("quadratic_to_sdp: M must be square and match y")
    try:
        R = np.linalg.cholesky(M).T
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(
            "quadratic cost matrix is not PSD; regularize before reduction"
        ) from exc
    blocks = [
        epigraph_block(1 + s, R, None, -y, -shift, t_index=0, u_start=1)
    ]
    for blk in extra_blocks:
        blocks.append(
            SdpBlock(
                order=blk.order,
                f0=blk.f0,
                coeffs={k + 1: mat for k, mat in blk.coeffs.items()},
            )
        )
    c = np.zeros(1 + s)
    c[0] = 1.0
    return SdpProblem(objective=c, blocks=blocks)
