"""Real-valued conic programs and a second-order cone interior-point solver.

Standard form:

    minimize    c' x
    subject to  A x + s = b,   s in K,

where K is an ordered product of zero cones (equalities), nonnegative
orthants and second-order cones partitioning the slack vector s.

The solver runs a Mehrotra predictor-corrector primal-dual method with
Nesterov-Todd scaling on the homogeneous self-dual embedding, so primal or
dual infeasibility is detected through certificates instead of diverging.
Zero cones are eliminated into an equality block internally; each Newton
step reduces to a quasi-definite system solved through a Schur complement
with a dense Cholesky factorization (LU fallback).
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

__all__ = [
    "ConeProgram",
    "ConeSolution",
    "SolverSettings",
    "ConeProgramBuilder",
    "solve",
    "complex_affine_to_real",
    "lift_complex_vector",
    "merge_real_vector",
    "quadratic_epigraph_cone",
    "dump_program",
]

_KINDS = ("zero", "nonneg", "soc")


@dataclass(frozen=True)
class ConeProgram:
    """Conic program data: minimize c'x subject to Ax + s = b, s in K."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    cones: tuple  # ordered (kind, dim) blocks partitioning s

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=float)
        A = np.ascontiguousarray(self.A, dtype=float)
        b = np.ascontiguousarray(self.b, dtype=float)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "cones", tuple((str(k), int(d)) for k, d in self.cones))
        if A.ndim != 2 or A.shape != (b.size, c.size):
            raise ValueError("A must be (len(b), len(c))")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("non-finite program data")
        total = 0
        for kind, dim in self.cones:
            if kind not in _KINDS:
                raise ValueError(f"unknown cone kind {kind!r}")
            if dim < 1:
                raise ValueError("cone dims must be >= 1")
            total += dim
        if total != b.size:
            raise ValueError("cone dims must sum to len(b)")

    @property
    def n(self):
        return self.c.size

    @property
    def m(self):
        return self.b.size


@dataclass
class ConeSolution:
    x: np.ndarray
    status: str  # optimal | infeasible | unbounded | max_iters
    primal_res: float
    dual_res: float
    gap: float
    iterations: int
    z: np.ndarray | None = None   # duals in original row order (certificate when infeasible)
    objective: float = np.nan


@dataclass(frozen=True)
class SolverSettings:
    max_iters: int = 200
    feas_tol: float = 1e-7
    gap_tol: float = 1e-8
    infeas_tol: float = 1e-7
    step_scale: float = 0.99


class ConeProgramBuilder:
    """Incremental assembly of a ConeProgram, one cone block at a time."""

    def __init__(self, n):
        self.n = int(n)
        self._rows = []
        self._rhs = []
        self._cones = []
        self._c = np.zeros(self.n)

    def set_objective(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.n,):
            raise ValueError("objective length mismatch")
        self._c = c
        return self

    def add_block(self, kind, A_block, b_block):
        A_block = np.atleast_2d(np.asarray(A_block, dtype=float))
        b_block = np.atleast_1d(np.asarray(b_block, dtype=float))
        if A_block.shape != (b_block.size, self.n):
            raise ValueError("block shape mismatch")
        self._rows.append(A_block)
        self._rhs.append(b_block)
        self._cones.append((kind, b_block.size))
        return self

    def add_zero(self, A_block, b_block):
        return self.add_block("zero", A_block, b_block)

    def add_nonneg(self, A_block, b_block):
        return self.add_block("nonneg", A_block, b_block)

    def add_soc(self, A_block, b_block):
        return self.add_block("soc", A_block, b_block)

    def build(self):
        if not self._rows:
            raise ValueError("program has no constraints")
        return ConeProgram(
            c=self._c,
            A=np.vstack(self._rows),
            b=np.concatenate(self._rhs),
            cones=tuple(self._cones),
        )


# ---------------------------------------------------------------------------
# internal cone machinery (nonneg + second-order blocks, zero rows split out)


class _ConeOps:
    """Vector operations over a product of orthant entries and SOC blocks."""

    def __init__(self, cones):
        nn_idx = []
        soc = []
        off = 0
        for kind, dim in cones:
            if kind == "nonneg":
                nn_idx.extend(range(off, off + dim))
            elif kind == "soc":
                soc.append(slice(off, off + dim))
            else:
                raise ValueError("zero cones are handled separately")
            off += dim
        self.m = off
        self.nn = np.asarray(nn_idx, dtype=int)
        self.soc = soc
        self.degree = len(nn_idx) + len(soc)

    def identity(self):
        e = np.zeros(self.m)
        e[self.nn] = 1.0
        for sl in self.soc:
            e[sl.start] = 1.0
        return e

    def min_eig(self, v):
        vals = []
        if self.nn.size:
            vals.append(np.min(v[self.nn]))
        for sl in self.soc:
            blk = v[sl]
            vals.append(blk[0] - np.linalg.norm(blk[1:]))
        return min(vals) if vals else np.inf

    def inside(self, v, margin=0.0):
        return self.min_eig(v) > margin

    def jordan_prod(self, u, v):
        out = np.empty(self.m)
        out[self.nn] = u[self.nn] * v[self.nn]
        for sl in self.soc:
            ub, vb = u[sl], v[sl]
            out[sl.start] = ub @ vb
            out[sl.start + 1:sl.stop] = ub[0] * vb[1:] + vb[0] * ub[1:]
        return out

    def jordan_solve(self, lam, d):
        """Solve lam o x = d for x."""
        out = np.empty(self.m)
        out[self.nn] = d[self.nn] / lam[self.nn]
        for sl in self.soc:
            lb, db = lam[sl], d[sl]
            det = lb[0] ** 2 - lb[1:] @ lb[1:]
            x0 = (lb[0] * db[0] - lb[1:] @ db[1:]) / det
            out[sl.start] = x0
            out[sl.start + 1:sl.stop] = (db[1:] - x0 * lb[1:]) / lb[0]
        return out

    def max_step(self, v, dv):
        """Largest alpha >= 0 with v + alpha*dv still in the cone."""
        alpha = np.inf
        if self.nn.size:
            neg = dv[self.nn] < 0
            if np.any(neg):
                alpha = min(alpha, np.min(-v[self.nn][neg] / dv[self.nn][neg]))
        for sl in self.soc:
            vb, db = v[sl], dv[sl]
            a = db[0] ** 2 - db[1:] @ db[1:]
            bq = vb[0] * db[0] - vb[1:] @ db[1:]
            c0 = vb[0] ** 2 - vb[1:] @ vb[1:]
            if a < 0:
                root = (-bq - np.sqrt(bq * bq - a * c0)) / a
                alpha = min(alpha, root)
            elif a == 0.0:
                if bq < 0:
                    alpha = min(alpha, -c0 / (2.0 * bq))
            else:
                disc = bq * bq - a * c0
                if bq < 0 and disc >= 0:
                    alpha = min(alpha, (-bq - np.sqrt(disc)) / a)
        return max(alpha, 0.0)


class _BoundaryCollapse(ArithmeticError):
    """An iterate lost strict cone interiority beyond what scaling tolerates."""


class _Scaling:
    """Nesterov-Todd scaling between a primal-dual interior pair (s, z)."""

    def __init__(self, ops, s, z):
        self.ops = ops
        if ops.nn.size:
            if np.any(s[ops.nn] <= 0.0) or np.any(z[ops.nn] <= 0.0):
                raise _BoundaryCollapse
            self.w_nn = np.sqrt(s[ops.nn] / z[ops.nn])
        else:
            self.w_nn = np.empty(0)
        self.soc = []
        for sl in ops.soc:
            sb, zb = s[sl], z[sl]
            # factored form (t - ||v||)(t + ||v||) avoids squaring cancellation
            res_s = (sb[0] - np.linalg.norm(sb[1:])) * (sb[0] + np.linalg.norm(sb[1:]))
            res_z = (zb[0] - np.linalg.norm(zb[1:])) * (zb[0] + np.linalg.norm(zb[1:]))
            if res_s <= 0.0 or res_z <= 0.0:
                raise _BoundaryCollapse
            rho_s, rho_z = np.sqrt(res_s), np.sqrt(res_z)
            sbar, zbar = sb / rho_s, zb / rho_z
            gamma = np.sqrt((1.0 + sbar @ zbar) / 2.0)
            wbar = sbar.copy()
            wbar[0] += zbar[0]
            wbar[1:] -= zbar[1:]
            wbar /= 2.0 * gamma
            eta = np.sqrt(rho_s / rho_z)
            self.soc.append((eta, wbar))
        self.lam = self.apply(z)

    def _soc_apply(self, eta, wbar, V, inv):
        """Apply eta^{+-1} * Wbar^{+-1} to the rows of a block (d, k)."""
        w0, w1 = wbar[0], wbar[1:]
        q = w1 @ V[1:]
        if inv:
            top = w0 * V[0] - q
            rest = V[1:] + np.outer(w1, q / (1.0 + w0) - V[0])
            return np.vstack([top, rest]) / eta
        top = w0 * V[0] + q
        rest = V[1:] + np.outer(w1, q / (1.0 + w0) + V[0])
        return np.vstack([top, rest]) * eta

    def _apply_vec(self, v, inv):
        out = np.array(v, dtype=float, copy=True)
        if self.ops.nn.size:
            out[self.ops.nn] *= (1.0 / self.w_nn) if inv else self.w_nn
        for (eta, wbar), sl in zip(self.soc, self.ops.soc):
            w0, w1 = wbar[0], wbar[1:]
            blk = out[sl]
            q = w1 @ blk[1:]
            v0 = blk[0]
            if inv:
                blk[1:] += w1 * (q / (1.0 + w0) - v0)
                blk[0] = w0 * v0 - q
                blk /= eta
            else:
                blk[1:] += w1 * (q / (1.0 + w0) + v0)
                blk[0] = w0 * v0 + q
                blk *= eta
        return out

    def _apply_mat(self, M, inv):
        if np.ndim(M) == 1:
            return self._apply_vec(M, inv)
        out = np.array(M, dtype=float, copy=True)
        if self.ops.nn.size:
            scale = 1.0 / self.w_nn if inv else self.w_nn
            out[self.ops.nn] *= scale[:, None]
        for (eta, wbar), sl in zip(self.soc, self.ops.soc):
            out[sl] = self._soc_apply(eta, wbar, out[sl], inv)
        return out

    def apply(self, v):
        """W v (symmetric, so this is also W' v)."""
        return self._apply_mat(v, inv=False)

    def apply_inv(self, v):
        """W^{-1} v."""
        return self._apply_mat(v, inv=True)


class _KKT:
    """Factorization of [[G'W^-2 G, A'], [A, 0]] for one scaling point.

    A small static regularization keeps the factorization stable when the
    scaled Gram matrix degenerates near convergence; iterative refinement
    against the true unregularized system recovers the accuracy.

    The Gram matrix is assembled block by block.  Wide second-order blocks
    use the rank-one structure of the inverse scaling, G' W^-2 G =
    eta^-2 (2 q q' - G' J G) with q = G'(J wbar), whose constant part
    G' J G is precomputed sparsely once; narrow blocks are cheaper through
    a direct scaled product.
    """

    _WIDE = 24  # blocks at least this tall use the precomputed-Gram path

    def __init__(self, A_eq, G, ops=None, reg=1e-11, refine=2):
        import scipy.sparse as sp

        self.A_eq = A_eq
        self.G = G
        self.n = G.shape[1]
        self.p = A_eq.shape[0]
        self.reg = reg
        self.refine = refine
        self.G_sp = sp.csr_matrix(G)
        self.Gt_sp = self.G_sp.T.tocsr()
        self.A_sp = sp.csr_matrix(A_eq)
        self.At_sp = self.A_sp.T.tocsr()
        self.ops = ops
        self._wide = []
        if ops is not None:

            flat_r, flat_c, flat_v, blk_of = [], [], [], []
            for i, sl in enumerate(ops.soc):
                if sl.stop - sl.start < self._WIDE:
                    continue
                top = sp.csr_matrix(G[sl.start:sl.start + 1])
                rest = sp.csr_matrix(G[sl.start + 1:sl.stop])
                P = (top.T @ top - rest.T @ rest).tocoo()
                flat_r.append(P.row.astype(np.int64))
                flat_c.append(P.col.astype(np.int64))
                flat_v.append(P.data)
                blk_of.append(np.full(P.nnz, len(self._wide)))
                self._wide.append(i)
            if self._wide:
                self._P_idx = (np.concatenate(flat_r) * self.n
                               + np.concatenate(flat_c))
                self._P_val = np.concatenate(flat_v)
                self._P_blk = np.concatenate(blk_of)
            self._wide_set = set(self._wide)

    def _assemble_gram(self, scaling):
        n = self.n
        ops = self.ops
        narrow_rows = []
        if ops.nn.size:
            narrow_rows.append(self.G[ops.nn] / scaling.w_nn[:, None])
        qs = []
        weights = np.zeros(len(self._wide)) if self._wide else None
        k = 0
        for i, sl in enumerate(ops.soc):
            eta, wbar = scaling.soc[i]
            blk = self.G[sl]
            if self._wide and i in self._wide_set:
                jw = wbar.copy()
                jw[1:] = -jw[1:]
                qs.append((blk.T @ jw) * (np.sqrt(2.0) / eta))
                weights[k] = eta ** -2
                k += 1
            else:
                narrow_rows.append(scaling._soc_apply(eta, wbar, blk, inv=True))
        stack = np.vstack(narrow_rows + [np.array(qs)]) if qs else np.vstack(narrow_rows)
        S = stack.T @ stack
        if self._wide:
            S.reshape(-1)[:] -= np.bincount(
                self._P_idx, weights=self._P_val * weights[self._P_blk],
                minlength=n * n)
        return S

    def factor(self, scaling):
        self.scaling = scaling
        self.Gt = None
        if self.ops is not None:
            S = self._assemble_gram(scaling)
        else:
            self.Gt = scaling.apply_inv(self.G)
            S = self.Gt.T @ self.Gt
        n, p = self.n, self.p
        delta = self.reg * (1.0 + np.trace(S) / n)
        S[np.arange(n), np.arange(n)] += delta
        self._chol = None
        self._lu = None
        try:
            cho = scipy.linalg.cho_factor(S, lower=True, check_finite=False)
            if p:
                E = scipy.linalg.cho_solve(cho, self.A_eq.T, check_finite=False)
                schur = self.A_eq @ E
                schur[np.arange(p), np.arange(p)] += delta
                schur_lu = scipy.linalg.lu_factor(schur, check_finite=False)
                self._chol = (cho, E, schur_lu)
            else:
                self._chol = (cho, None, None)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
            pass
        if self._chol is None:
            M = np.zeros((n + p, n + p))
            M[:n, :n] = S
            if p:
                M[:n, n:] = self.A_eq.T
                M[n:, :n] = self.A_eq
                M[np.arange(n, n + p), np.arange(n, n + p)] -= delta
            self._lu = scipy.linalg.lu_factor(M, check_finite=False)

    def _solve_xy(self, rx, ry):
        n, p = self.n, self.p
        if self._chol is not None:
            cho, E, schur_lu = self._chol
            x0 = scipy.linalg.cho_solve(cho, rx, check_finite=False)
            if p:
                uy = scipy.linalg.lu_solve(schur_lu, self.A_eq @ x0 - ry,
                                           check_finite=False)
                return x0 - E @ uy, uy
            return x0, np.empty(0)
        rhs = np.concatenate([rx, ry])
        sol = scipy.linalg.lu_solve(self._lu, rhs, check_finite=False)
        return sol[:n], sol[n:]

    def solve(self, bx, by, bz):
        """Solve the 3x3 scaled KKT system; returns (ux, uy, uz).

        Refinement measures the residual of the full 3x3 system (including
        the scaled cone row) so elimination and regularization errors are
        corrected together.
        """
        sc = self.scaling

        def winv2(v):
            return sc.apply_inv(sc.apply_inv(v))

        ux, uy = self._solve_xy(bx + self.Gt_sp @ winv2(bz), by)
        uz = winv2(self.G_sp @ ux - bz)
        for _ in range(self.refine):
            r1 = bx - (self.Gt_sp @ uz) - (self.At_sp @ uy if self.p else 0.0)
            r2 = by - self.A_sp @ ux if self.p else np.empty(0)
            r3 = bz - self.G_sp @ ux + sc.apply(sc.apply(uz))
            dx, dy = self._solve_xy(r1 + self.Gt_sp @ winv2(r3), r2)
            dz = winv2(self.G_sp @ dx - r3)
            ux = ux + dx
            uy = uy + dy
            uz = uz + dz
        return ux, uy, uz


def _split_program(prog):
    """Partition rows into the equality block and the proper-cone block."""
    eq_idx, cone_idx, cone_list = [], [], []
    off = 0
    for kind, dim in prog.cones:
        rows = list(range(off, off + dim))
        if kind == "zero":
            eq_idx.extend(rows)
        else:
            cone_idx.extend(rows)
            cone_list.append((kind, dim))
        off += dim
    eq_idx = np.asarray(eq_idx, dtype=int)
    cone_idx = np.asarray(cone_idx, dtype=int)
    return (prog.A[eq_idx], prog.b[eq_idx], prog.A[cone_idx], prog.b[cone_idx],
            eq_idx, cone_idx, cone_list)


def _solve_equality_only(prog, A_eq, b_eq, settings):
    """Degenerate path: no proper cone rows, a pure linear-equality program."""
    n = prog.n
    x, *_ = np.linalg.lstsq(A_eq, b_eq, rcond=None)
    resid = A_eq @ x - b_eq
    pres = np.linalg.norm(resid)
    if pres > settings.feas_tol * (1.0 + np.linalg.norm(b_eq)):
        # least-squares residual is a Farkas certificate: A'r = 0, b'r = -|r|^2
        cert = resid / (pres ** 2)
        return ConeSolution(x=x, status="infeasible", primal_res=float(pres),
                            dual_res=float(np.linalg.norm(A_eq.T @ cert)),
                            gap=np.inf, iterations=0, z=cert)
    y, *_ = np.linalg.lstsq(A_eq.T, -prog.c, rcond=None)
    dres = np.linalg.norm(prog.c + A_eq.T @ y)
    if dres > settings.feas_tol * (1.0 + np.linalg.norm(prog.c)):
        return ConeSolution(x=x, status="unbounded", primal_res=float(pres),
                            dual_res=float(dres), gap=np.inf, iterations=0)
    z = np.zeros(prog.m)
    z[:] = y  # all rows are equalities here
    return ConeSolution(x=x, status="optimal", primal_res=float(pres),
                        dual_res=float(dres), gap=0.0, iterations=0,
                        z=z, objective=float(prog.c @ x))


def solve(prog, settings=None):
    """Solve a ConeProgram with the homogeneous self-dual interior-point method.

    Deterministic for identical inputs.  Returns status "optimal" with the
    residual guarantees from SolverSettings, "infeasible"/"unbounded" with a
    certificate in the solution fields, or "max_iters".
    """
    settings = settings or SolverSettings()
    A_eq, b_eq, G, h, eq_idx, cone_idx, cone_list = _split_program(prog)
    if cone_idx.size == 0:
        return _solve_equality_only(prog, A_eq, b_eq, settings)

    ops = _ConeOps(cone_list)
    c = prog.c
    n, p, m = prog.n, A_eq.shape[0], G.shape[0]
    norm_b = np.linalg.norm(prog.b)
    norm_c = np.linalg.norm(c)
    data_scale = 1.0 + np.linalg.norm(prog.A)
    kkt = _KKT(A_eq, G, ops)
    G_sp, Gt_sp = kkt.G_sp, kkt.Gt_sp
    A_sp, At_sp = kkt.A_sp, kkt.At_sp
    e = ops.identity()

    # least-squares starting point (identity scaling), shifted into the cone
    ident = _Scaling(ops, e, e)
    kkt.factor(ident)
    x, _, uz = kkt.solve(np.zeros(n), b_eq, h)
    s_hat = -(uz)  # s = h - Gx at the identity scaling
    shift = -ops.min_eig(s_hat)
    s = s_hat if shift < 0 else s_hat + (1.0 + shift) * e
    xd, y, uzd = kkt.solve(-c, np.zeros(p), np.zeros(m))
    z_hat = uzd
    shift = -ops.min_eig(z_hat)
    z = z_hat if shift < 0 else z_hat + (1.0 + shift) * e
    tau, kappa = 1.0, 1.0

    def assemble_duals(y_v, z_v, scale=1.0):
        full = np.zeros(prog.m)
        full[eq_idx] = y_v * scale
        full[cone_idx] = z_v * scale
        return full

    iters = 0
    best = None
    best_merit = np.inf
    small_steps = 0
    for it in range(settings.max_iters):
        iters = it
        # residuals of the homogeneous embedding
        rx = At_sp @ y + Gt_sp @ z + c * tau
        ry = -(A_sp @ x) + b_eq * tau
        rz = -(G_sp @ x) + h * tau - s
        rt = -(c @ x) - (b_eq @ y) - (h @ z) - kappa

        X = x / tau
        pres = np.linalg.norm(np.concatenate([A_sp @ X - b_eq, G_sp @ X + s / tau - h]))
        dres = np.linalg.norm(c + At_sp @ (y / tau) + Gt_sp @ (z / tau))
        gap = float(s @ z) / tau ** 2
        pobj = float(c @ X)
        if (pres <= settings.feas_tol * (1.0 + norm_b)
                and dres <= settings.feas_tol * (1.0 + norm_c)
                and gap <= settings.gap_tol * (1.0 + abs(pobj))):
            return ConeSolution(x=X, status="optimal", primal_res=float(pres),
                                dual_res=float(dres), gap=gap, iterations=it,
                                z=assemble_duals(y, z, 1.0 / tau),
                                objective=pobj)
        by_hz = float(b_eq @ y + h @ z)
        if by_hz < 0:
            res_inf = np.linalg.norm(At_sp @ y + Gt_sp @ z) / (-by_hz)
            if res_inf <= settings.infeas_tol * data_scale:
                return ConeSolution(x=X, status="infeasible", primal_res=float(pres),
                                    dual_res=float(res_inf), gap=np.inf, iterations=it,
                                    z=assemble_duals(y, z, 1.0 / (-by_hz)))
        cx = float(c @ x)
        if cx < 0:
            res_unb = np.linalg.norm(np.concatenate([A_sp @ x, G_sp @ x + s])) / (-cx)
            if res_unb <= settings.infeas_tol * data_scale:
                return ConeSolution(x=x / (-cx), status="unbounded",
                                    primal_res=float(res_unb), dual_res=float(dres),
                                    gap=np.inf, iterations=it)
        merit = max(pres / (1.0 + norm_b), dres / (1.0 + norm_c),
                    gap / (1.0 + abs(pobj)))
        if merit < best_merit:
            best_merit = merit
            best = (X, pres, dres, gap, pobj, assemble_duals(y, z, 1.0 / tau))

        try:
            scaling = _Scaling(ops, s, z)
        except _BoundaryCollapse:
            break  # accuracy floor reached; return the best iterate seen
        lam = scaling.lam
        mu = (float(s @ z) + tau * kappa) / (ops.degree + 1)
        kkt.factor(scaling)
        x1, y1, z1 = kkt.solve(-c, b_eq, h)
        denom_t = float(c @ x1 + b_eq @ y1 + h @ z1) - kappa / tau

        def direction(ds, dk):
            ds_t = ops.jordan_solve(lam, ds)
            x2, y2, z2 = kkt.solve(-rx, ry, rz - scaling.apply(ds_t))
            dtau = (rt - dk / tau - float(c @ x2 + b_eq @ y2 + h @ z2)) / denom_t
            dz = z2 + dtau * z1
            dsl = scaling.apply(ds_t - scaling.apply(dz))
            dka = (dk - kappa * dtau) / tau
            dx = x2 + dtau * x1
            dy = y2 + dtau * y1
            return dx, dy, dz, dsl, dtau, dka

        def max_alpha(dz, dsl, dtau, dka):
            alpha = min(ops.max_step(s, dsl), ops.max_step(z, dz))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dka < 0:
                alpha = min(alpha, -kappa / dka)
            return alpha

        # predictor
        dxa, dya, dza, dsa, dta, dka = direction(-ops.jordan_prod(lam, lam), -tau * kappa)
        a_aff = min(1.0, max_alpha(dza, dsa, dta, dka))
        mu_aff = (float((s + a_aff * dsa) @ (z + a_aff * dza))
                  + (tau + a_aff * dta) * (kappa + a_aff * dka)) / (ops.degree + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector
        corr = ops.jordan_prod(scaling.apply_inv(dsa), scaling.apply(dza))
        ds = -ops.jordan_prod(lam, lam) - corr + sigma * mu * e
        dk = -tau * kappa - dta * dka + sigma * mu
        dx, dy, dz, dsl, dtau, dkap = direction(ds, dk)
        alpha = min(1.0, settings.step_scale * max_alpha(dz, dsl, dtau, dkap))
        if not np.isfinite(alpha) or alpha <= 1e-10:
            small_steps += 1
            if small_steps >= 2:
                break
        else:
            small_steps = 0
        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        s = s + alpha * dsl
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkap

    X, pres, dres, gap, pobj, duals = best
    status = "max_iters"
    if (pres <= settings.feas_tol * (1.0 + norm_b)
            and dres <= settings.feas_tol * (1.0 + norm_c)
            and gap <= settings.gap_tol * (1.0 + abs(pobj))):
        status = "optimal"
    return ConeSolution(x=X, status=status, primal_res=float(pres),
                        dual_res=float(dres), gap=gap, iterations=iters + 1,
                        z=duals, objective=pobj)


# ---------------------------------------------------------------------------
# complex-to-real lifting helpers


def complex_affine_to_real(coeffs):
    """Lift complex linear forms a^H z to real rows over interleaved (Re, Im).

    For each input row a, two output rows are produced: the real part and the
    imaginary part of a^H z, acting on the real vector
    (Re z_0, Im z_0, Re z_1, Im z_1, ...).
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    k, n = coeffs.shape
    out = np.zeros((2 * k, 2 * n))
    out[0::2, 0::2] = coeffs.real
    out[0::2, 1::2] = coeffs.imag
    out[1::2, 0::2] = -coeffs.imag
    out[1::2, 1::2] = coeffs.real
    return out


def lift_complex_vector(z):
    """Interleave (Re z_0, Im z_0, Re z_1, Im z_1, ...)."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def merge_real_vector(x):
    """Inverse of lift_complex_vector."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return x[0::2] + 1j * x[1::2]


def quadratic_epigraph_cone(z_coeffs, t_index, n_real):
    """SOC rows encoding |z^H w|^2 <= t with w real-lifted and t a scalar var.

    Uses the rotated form ||(2 Re, 2 Im, t - 1)|| <= t + 1 as a 4-dim cone;
    at an optimum that minimizes t, the slack is tight: t = |z^H w|^2.
    Returns (A_block, b_block) for the program's A x + s = b convention,
    assuming the complex variables occupy real columns 0..2*len(z)-1.
    """
    rows = complex_affine_to_real(np.asarray(z_coeffs, dtype=complex)[None, :])
    A = np.zeros((4, n_real))
    b = np.zeros(4)
    A[0, t_index] = -1.0
    b[0] = 1.0
    A[1, :rows.shape[1]] = -2.0 * rows[0]
    A[2, :rows.shape[1]] = -2.0 * rows[1]
    A[3, t_index] = -1.0
    b[3] = -1.0
    return A, b


def dump_program(prog, path):
    """Write a plain-text dump (dims, cones, c, b, dense A) for offline checks."""
    with open(path, "w") as fh:
        fh.write(f"n {prog.n}\nm {prog.m}\n")
        fh.write("cones " + " ".join(f"{k}:{d}" for k, d in prog.cones) + "\n")
        fh.write("c " + " ".join(f"{v:.17g}" for v in prog.c) + "\n")
        fh.write("b " + " ".join(f"{v:.17g}" for v in prog.b) + "\n")
        for row in prog.A:
            fh.write("A " + " ".join(f"{v:.17g}" for v in row) + "\n")
