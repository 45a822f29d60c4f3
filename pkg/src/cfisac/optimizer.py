"""Alternating transmit-beamformer and receive-filter optimization.

One outer iteration updates the space-time receive filter (closed form via a
generalized Rayleigh quotient), refreshes the fractional-programming
multiplier gamma with the current radar SINR, linearizes the target-power
term around the previous beamformers and solves one second-order cone
program for the transmit update.  The surrogate is a first-order minorant
that is tight at the anchor, so every accepted iterate can only raise the
radar SINR.

Baselines reuse the same transmit loop under alternative receive rules:
a target-matched filter that ignores clutter ("no_rbf"), a spatial-only
filter on a fixed temporal template ("spatial_bf"), and the transmit loop
without communication constraints ("radar_only").
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import cone
from .cone import ConeProgram, SolverSettings, complex_affine_to_real, \
    lift_complex_vector, merge_real_vector, quadratic_epigraph_cone
from .model import BeamformerSet, SpaceTimeFilter, comm_sinr, radar_sinr
from .numerics import principal_generalized_direction
from .units import linear_to_db

__all__ = [
    "DinkelbachState",
    "SolveTrace",
    "TraceRow",
    "InitResult",
    "AlternatingResult",
    "SolveOptions",
    "InfeasibleDropError",
    "initialize_beamformers",
    "update_receive_filter",
    "update_gamma",
    "surrogate_coefficients",
    "assemble_transmit_socp",
    "run_alternating",
    "baseline_no_rbf",
    "baseline_spatial_bf",
    "baseline_radar_only",
]


class InfeasibleDropError(RuntimeError):
    """Raised when the max-min initialization cannot reach the SINR targets."""

    def __init__(self, achieved, required):
        super().__init__(
            f"max-min communication SINR {achieved:.4g} below target {required:.4g}")
        self.achieved = achieved
        self.required = required


@dataclass
class DinkelbachState:
    """Anchor data for one fractional-programming surrogate step."""

    gamma: float
    W_prev: BeamformerSet
    f_b: list = field(default_factory=list)  # per-AP surrogate gradients
    f: np.ndarray | None = None              # stacked gradient over vec(W)
    z: np.ndarray | None = None              # clutter direction, sqrt(gamma) absorbed
    c_b: list = field(default_factory=list)  # anchor target powers |u^H H_b S w_b|^2


@dataclass
class TraceRow:
    iteration: int
    radar_sinr_db: float
    gamma: float
    min_comm_margin_db: float
    max_power_violation: float
    socp_iterations: int
    wall_ms: float


@dataclass
class SolveTrace:
    rows: list = field(default_factory=list)

    def radar_sinr_linear(self):
        return np.array([10.0 ** (r.radar_sinr_db / 10.0) for r in self.rows])

    def max_ascent_violation(self):
        """Largest per-step decrease of the linear radar SINR (0 if monotone)."""
        lin = self.radar_sinr_linear()
        if lin.size < 2:
            return 0.0
        return float(max(0.0, np.max(lin[:-1] - lin[1:])))


@dataclass
class InitResult:
    beamformers: BeamformerSet
    achieved_min_sinr: float
    feasible: bool
    bisection_iters: int = 0


@dataclass
class AlternatingResult:
    beamformers: BeamformerSet
    filter: SpaceTimeFilter
    trace: SolveTrace
    converged: bool
    aborted: bool
    radar_sinr: float
    outer_iters: int


@dataclass(frozen=True)
class SolveOptions:
    max_outer: int = 100
    rel_tol: float = 1e-4
    receive_rule: str = "optimal"   # optimal | matched | spatial
    include_comm: bool = True
    clutter_aware: bool = True      # keep the weighted clutter term in the update
    momentum: bool = True           # extrapolated anchor with monotone safeguard
    bisection_tol: float = 1e-3
    solver: SolverSettings = SolverSettings()


# ---------------------------------------------------------------------------
# variable layout: x = [interleaved Re/Im of vec(stacked W) scaled by
# 1/sqrt(Pmax)] + extras (epigraph t or feasibility margin). vec(stacked W)
# orders coordinates as (stream j, AP b, antenna i).


class _Layout:
    def __init__(self, cfg):
        self.B, self.Nt, self.ns = cfg.B, cfg.Nt, cfg.n_streams
        self.ncplx = self.B * self.Nt * self.ns
        self.nw = 2 * self.ncplx
        self.p_ref = float(max(cfg.P_b))

    def scatter_ap(self, v_b, b):
        """Lift a per-AP vector (over vec(W_b)) into vec(stacked W) coords."""
        out = np.zeros(self.ncplx, dtype=complex)
        out.reshape(self.ns, self.B, self.Nt)[:, b, :] = v_b.reshape(self.ns, self.Nt)
        return out

    def ap_columns(self, b):
        """Complex-coordinate indices belonging to AP b."""
        idx = np.arange(self.ncplx).reshape(self.ns, self.B, self.Nt)[:, b, :]
        return idx.reshape(-1)

    def stream_block(self, k):
        """Complex-coordinate slice of the cross-AP stack for stream k."""
        return slice(k * self.B * self.Nt, (k + 1) * self.B * self.Nt)

    def decode(self, x, cfg):
        w = merge_real_vector(x[:self.nw]) * np.sqrt(self.p_ref)
        return BeamformerSet.from_w(w, cfg.B, cfg.Nt, cfg.n_streams)


def _user_rows(layout, scenario):
    """Real-lifted constraint rows of every user's stream forms.

    For user k, row pair (2j, 2j+1) of the k-th entry gives Re and Im of
    sum_b h_{b,k}^T w_{b,j} in noise-normalized units (noise power becomes 1).
    """
    cfg = scenario.config
    scale = np.sqrt(layout.p_ref) / np.sqrt(cfg.sigma2_c)
    rows = []
    for k in range(cfg.K):
        g = np.concatenate([scenario.h[b, k] for b in range(cfg.B)]) * scale
        coeffs = np.zeros((layout.ns, layout.ncplx), dtype=complex)
        for j in range(layout.ns):
            coeffs[j, layout.stream_block(j)] = np.conj(g)
        rows.append(complex_affine_to_real(coeffs))
    return rows


def _power_blocks(layout, cfg, n_real):
    """Per-AP power cones ||vec(W_b)|| <= sqrt(P_b) in scaled units."""
    blocks = []
    for b in range(cfg.B):
        cols = layout.ap_columns(b)
        real_cols = np.concatenate([2 * cols, 2 * cols + 1])
        real_cols.sort()
        A = np.zeros((1 + real_cols.size, n_real))
        A[np.arange(1, A.shape[0]), real_cols] = -1.0
        bvec = np.zeros(A.shape[0])
        bvec[0] = np.sqrt(cfg.P_b[b] / layout.p_ref)
        blocks.append((A, bvec))
    return blocks


def _add_user_cones(builder, user_rows_k, k, sinr_factor, n_real, margin_col=None):
    """One user's SOC (rotated SINR form) plus the phase-fixing zero cone."""
    lifted = user_rows_k
    ns2 = lifted.shape[0]
    A = np.zeros((ns2 + 2, n_real))
    b = np.zeros(ns2 + 2)
    A[0, :lifted.shape[1]] = -sinr_factor * lifted[2 * k]
    if margin_col is not None:
        A[0, margin_col] = 1.0
    A[1:1 + ns2, :lifted.shape[1]] = -lifted
    b[-1] = 1.0  # normalized noise amplitude
    builder.add_soc(A, b)
    Az = np.zeros((1, n_real))
    Az[0, :lifted.shape[1]] = lifted[2 * k + 1]
    builder.add_zero(Az, [0.0])


def initialize_beamformers(scenario, model, config=None, bisection_tol=1e-3,
                           solver=None):
    """Feasible start: maximize the minimum communication SINR under power.

    Bisects on the common SINR level; each check solves one cone program
    that maximizes the worst user's constraint margin at that level.  The
    drop is marked infeasible when the achieved max-min SINR falls short of
    the largest per-user target.
    """
    cfg = config or scenario.config
    solver = solver or SolverSettings()
    layout = _Layout(cfg)
    n_real = layout.nw + 1  # margin variable last
    margin_col = layout.nw
    user_rows = _user_rows(layout, scenario)
    power = _power_blocks(layout, cfg, n_real)

    def feasibility(t):
        factor = np.sqrt(1.0 + 1.0 / t)
        builder = cone.ConeProgramBuilder(n_real)
        c = np.zeros(n_real)
        c[margin_col] = -1.0
        builder.set_objective(c)
        for k in range(cfg.K):
            _add_user_cones(builder, user_rows[k], k, factor, n_real, margin_col)
        for A, b in power:
            builder.add_soc(A, b)
        sol = cone.solve(builder.build(), solver)
        ok = sol.status == "optimal" and -sol.objective >= -1e-9
        return ok, sol

    # upper bound: no user can beat its interference-free Cauchy-Schwarz SNR
    bounds = []
    for k in range(cfg.K):
        amp = sum(np.linalg.norm(scenario.h[b, k]) * np.sqrt(cfg.P_b[b])
                  for b in range(cfg.B))
        bounds.append(amp ** 2 / cfg.sigma2_c)
    hi = min(bounds) * 1.001 + 1e-9
    lo = 0.0
    best_x = None
    iters = 0
    while hi - lo > bisection_tol:
        mid = 0.5 * (lo + hi)
        ok, sol = feasibility(mid)
        iters += 1
        if ok:
            lo, best_x = mid, sol.x
        else:
            hi = mid
    if best_x is None:
        W = BeamformerSet.from_w(np.zeros(layout.ncplx, dtype=complex),
                                 cfg.B, cfg.Nt, cfg.n_streams)
    else:
        W = layout.decode(best_x, cfg)
    achieved = min(comm_sinr(W, scenario, k) for k in range(cfg.K))
    feasible = achieved >= max(cfg.Gamma_k) * (1.0 - 1e-9)
    return InitResult(beamformers=W, achieved_min_sinr=float(achieved),
                      feasible=bool(feasible), bisection_iters=iters)


def _target_columns(W, model):
    """Columns sigma_b * H_b S w_b of the weighted target-response matrix."""
    scen = model.scenario
    cols = [np.sqrt(scen.sigma2_b[b]) * (model.target_response[b] @ W.w_b(b))
            for b in range(scen.config.B)]
    return np.column_stack(cols)


def _clutter_vector(W, model):
    cfg = model.scenario.config
    out = np.zeros(model.target_response[0].shape[0], dtype=complex)
    for b in range(cfg.B):
        out += model.clutter_response[b] @ W.w_b(b)
    return out


def update_receive_filter(W, model):
    """Clutter-aware optimal space-time filter for fixed beamformers."""
    V = _target_columns(W, model)
    if np.linalg.norm(V) == 0:
        raise ValueError("beamformers produce no target response")
    cvec = _clutter_vector(W, model)
    u = principal_generalized_direction(V, cvec, model.scenario.config.sigma2_r)
    return SpaceTimeFilter.from_vector(u)


def update_gamma(W, u, model):
    """Fresh fractional-programming multiplier: the current radar SINR."""
    return radar_sinr(W, u, model)


def surrogate_coefficients(state, u, model):
    """Linearize each AP's target-power term around the anchor beamformers.

    Fills the state's per-AP gradients f_b, the stacked gradient f over
    vec(stacked W), the sqrt(gamma)-weighted clutter direction z, and the
    anchor powers c_b.  Returns (f, c_b).
    """
    uvec = u.u if isinstance(u, SpaceTimeFilter) else np.asarray(u)
    scen = model.scenario
    cfg = scen.config
    layout = _Layout(cfg)
    f = np.zeros(layout.ncplx, dtype=complex)
    z = np.zeros(layout.ncplx, dtype=complex)
    state.f_b = []
    state.c_b = []
    for b in range(cfg.B):
        uH_Hb = model.target_response[b].conj().T @ uvec  # (H_b S)^H u
        kappa = np.vdot(uH_Hb, state.W_prev.w_b(b))       # u^H H_b S w_b
        f_b = 2.0 * scen.sigma2_b[b] * kappa * uH_Hb
        state.f_b.append(f_b)
        state.c_b.append(float(np.abs(kappa) ** 2))
        f += layout.scatter_ap(f_b, b)
        z += layout.scatter_ap(model.clutter_response[b].conj().T @ uvec, b)
    state.f = f
    state.z = np.sqrt(max(state.gamma, 0.0)) * z
    return f, list(state.c_b)


@dataclass
class TransmitProblem:
    program: ConeProgram
    layout: _Layout
    config: object
    obj_scale: float

    def decode(self, x):
        return self.layout.decode(x, self.config)


def assemble_transmit_socp(f, z_vec, scenario, config, gamma, include_comm=True):
    """Cone program for one transmit update.

    Maximizes Re{f^H w} - t with t an epigraph of the sqrt(gamma)-weighted
    clutter power |z^H w|^2 (z_vec already absorbs sqrt(gamma)), subject to
    per-user SINR cones, their phase-fixing zero cones, and per-AP power
    cones.  Data is rescaled internally so solver tolerances are meaningful
    at any absolute SINR scale; the variable layout undoes the scaling when
    decoding.
    """
    cfg = config
    layout = _Layout(cfg)
    n_real = layout.nw + 1
    t_col = layout.nw
    root_p = np.sqrt(layout.p_ref)

    f = np.asarray(f, dtype=complex)
    z_vec = np.asarray(z_vec, dtype=complex)
    obj_scale = float(np.linalg.norm(f) * root_p)
    if obj_scale <= 0.0:
        obj_scale = 1.0
    f_s = f * root_p / obj_scale
    z_s = z_vec * root_p / np.sqrt(obj_scale)

    builder = cone.ConeProgramBuilder(n_real)
    c = np.zeros(n_real)
    c[:layout.nw] = -complex_affine_to_real(f_s[None, :])[0]
    c[t_col] = 1.0
    builder.set_objective(c)

    if include_comm:
        user_rows = _user_rows(layout, scenario)
        for k in range(cfg.K):
            factor = np.sqrt(1.0 + 1.0 / cfg.Gamma_k[k])
            _add_user_cones(builder, user_rows[k], k, factor, n_real)
    for A, b in _power_blocks(layout, cfg, n_real):
        builder.add_soc(A, b)
    A_epi, b_epi = quadratic_epigraph_cone(z_s, t_col, n_real)
    builder.add_soc(A_epi, b_epi)
    return TransmitProblem(program=builder.build(), layout=layout,
                           config=cfg, obj_scale=obj_scale)


def _matched_filter(W, model):
    V = _target_columns(W, model)
    v = V.sum(axis=1)
    if np.linalg.norm(v) == 0:
        raise ValueError("beamformers produce no target response")
    return SpaceTimeFilter.from_vector(v)


def _temporal_template(W, model):
    """Delay-aligned, Doppler-ramped signature of the strongest target path.

    Includes the transmitted symbols, so for a single AP with no delay
    spread the separable family spans the full matched filter.
    """
    from .scenario import steering_vector

    scen = model.scenario
    cfg = scen.config
    V = _target_columns(W, model)
    b_star = int(np.argmax(np.linalg.norm(V, axis=0) ** 2))
    Q, L = model.symbols.Q, model.symbols.L
    tau = int(scen.tau[b_star])
    a_t = steering_vector(scen.theta_bt[b_star], cfg.Nt)
    q = np.arange(tau, tau + L)
    t = np.zeros(Q, dtype=complex)
    t[q] = (a_t @ (W.W[b_star] @ model.symbols.S)) * np.exp(2j * np.pi * scen.fD[b_star] * q)
    if np.linalg.norm(t) == 0:
        t[q] = np.exp(2j * np.pi * scen.fD[b_star] * q)
    return t


def _spatial_filter(W, model, template=None):
    """Best spatial weights on a fixed temporal template of the strongest path.

    Only the Nr spatial weights adapt; both quotient terms reduce to the
    spatial subspace, where the interference covariance keeps its rank-one
    plus identity structure.  The template stays frozen across a run so the
    transmit loop faces a stationary receive family.
    """
    scen = model.scenario
    cfg = scen.config
    t = _temporal_template(W, model) if template is None else template
    Q = model.symbols.Q
    V = _target_columns(W, model)
    Nr = cfg.Nr
    Vmats = V.reshape(Nr, Q, -1, order="F")
    V_s = np.einsum("rqb,q->rb", Vmats, np.conj(t))
    c_s = _clutter_vector(W, model).reshape(Nr, Q, order="F") @ np.conj(t)
    sigma2_eff = cfg.sigma2_r * float(np.real(np.vdot(t, t)))
    u_s = principal_generalized_direction(V_s, c_s, sigma2_eff)
    return SpaceTimeFilter.from_vector(np.kron(t, u_s))


def _make_receive_rule(kind, W_init, model):
    if kind == "optimal":
        return update_receive_filter
    if kind == "matched":
        return _matched_filter
    if kind == "spatial":
        template = _temporal_template(W_init, model)
        return lambda W, mdl: _spatial_filter(W, mdl, template=template)
    raise ValueError(f"unknown receive rule {kind!r}")


def _transmit_step(anchor, u, gamma, model, options):
    """One surrogate-anchored cone-program solve of the transmit update."""
    scen = model.scenario
    state = DinkelbachState(gamma=gamma if options.clutter_aware else 0.0,
                            W_prev=anchor)
    f, _ = surrogate_coefficients(state, u, model)
    z_vec = state.z if options.clutter_aware else np.zeros_like(state.z)
    prob = assemble_transmit_socp(f, z_vec, scen, scen.config,
                                  state.gamma, include_comm=options.include_comm)
    sol = cone.solve(prob.program, options.solver)
    if sol.status != "optimal":
        return None, sol
    return prob.decode(sol.x), sol


def _extrapolate(W, W_prev, beta):
    return BeamformerSet(W=tuple((1.0 + beta) * W.W[b] - beta * W_prev.W[b]
                                 for b in range(W.B)))


def run_alternating(model, options=None, init=None):
    """Alternating optimization until the radar SINR stops improving.

    Each outer iteration performs the closed-form receive-filter update, the
    multiplier refresh and one surrogate-anchored cone-program transmit
    update.  The surrogate anchor is extrapolated along the previous step
    (restarted schedule) to escape the slow balance between per-AP target
    responses; a safeguard re-solves from the plain anchor whenever the
    extrapolated step fails to improve, so the radar SINR never decreases.

    Stops when the relative radar-SINR change drops below rel_tol or after
    max_outer iterations; a transmit subproblem hitting the solver's
    iteration cap aborts the run, returning the trace gathered so far.
    """
    options = options or SolveOptions()
    scen = model.scenario
    cfg = scen.config

    if init is None:
        init = initialize_beamformers(scen, model, cfg,
                                      bisection_tol=options.bisection_tol,
                                      solver=options.solver)
    if options.include_comm and not init.feasible:
        raise InfeasibleDropError(init.achieved_min_sinr, max(cfg.Gamma_k))

    W = init.beamformers
    rule = _make_receive_rule(options.receive_rule, W, model)
    W_prev = None
    t_sched = 1.0
    trace = SolveTrace()
    converged = False
    aborted = False
    gamma_prev = None
    u = rule(W, model)
    socp_iters = 0
    for it in range(options.max_outer):
        tic = time.perf_counter()
        gamma = radar_sinr(W, u, model)
        margin = min(comm_sinr(W, scen, k) / cfg.Gamma_k[k] for k in range(cfg.K))
        trace.rows.append(TraceRow(
            iteration=it,
            radar_sinr_db=float(linear_to_db(gamma)) if gamma > 0 else -np.inf,
            gamma=float(gamma),
            min_comm_margin_db=float(linear_to_db(margin)) if margin > 0 else -np.inf,
            max_power_violation=W.max_power_violation(cfg.P_b),
            socp_iterations=socp_iters,
            wall_ms=(time.perf_counter() - tic) * 1e3,
        ))
        if gamma_prev is not None and abs(gamma - gamma_prev) <= options.rel_tol * max(gamma_prev, 1e-300):
            converged = True
            break

        W_new, sol = None, None
        socp_iters = 0
        if options.momentum and W_prev is not None:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_sched ** 2))
            beta = min((t_sched - 1.0) / t_next, 0.95)
            W_new, sol = _transmit_step(_extrapolate(W, W_prev, beta), u, gamma,
                                        model, options)
            socp_iters = sol.iterations
            if W_new is not None and radar_sinr(W_new, u, model) >= gamma:
                t_sched = t_next
            else:
                W_new = None
                t_sched = 1.0
        if W_new is None:
            W_new, sol = _transmit_step(W, u, gamma, model, options)
            socp_iters += sol.iterations
            if W_new is None:
                aborted = True
                break
        W_prev, W = W, W_new
        u = rule(W, model)
        gamma_prev = gamma
        trace.rows[-1].wall_ms = (time.perf_counter() - tic) * 1e3
    final = radar_sinr(W, u, model)
    return AlternatingResult(beamformers=W, filter=u, trace=trace,
                             converged=converged, aborted=aborted,
                             radar_sinr=float(final), outer_iters=len(trace.rows))


def baseline_no_rbf(model, options=None, init=None):
    """Transmit-only design: the receive side stays target-matched.

    Without adaptive receive processing the scheme has no handle on clutter,
    so the transmit update drops the clutter-weighted term and maximizes the
    matched-filter target power alone; the direct-path interference then
    leaks through unsuppressed.  Momentum is disabled because the matched
    receive rule offers no monotone quantity to safeguard against.
    """
    options = replace(options or SolveOptions(), receive_rule="matched",
                      clutter_aware=False, momentum=False)
    return run_alternating(model, options, init=init)


def baseline_spatial_bf(model, options=None, init=None):
    """Spatial-domain receive beamforming on a fixed temporal template.

    Runs the same transmit design as the joint scheme, then restricts the
    receive side to spatial weights over the strongest path's temporal
    template.  Evaluating the restriction on a matched transmit design keeps
    the comparison paired: the joint scheme dominates it by construction,
    and the gap isolates what space-time processing adds over spatial-only
    combining.  (Re-optimizing the transmit loop against the restricted
    filter is the alternative reading; with two receive antennas its
    filter/beamformer pursuit stalls the convergence rule, so the paired
    form is used.)
    """
    result = run_alternating(model, options, init=init)
    u_restricted = _spatial_filter(result.beamformers, model)
    sinr = radar_sinr(result.beamformers, u_restricted, model)
    return AlternatingResult(
        beamformers=result.beamformers, filter=u_restricted,
        trace=result.trace, converged=result.converged,
        aborted=result.aborted, radar_sinr=float(sinr),
        outer_iters=result.outer_iters)


def baseline_radar_only(model, options=None, init=None):
    """Same pipeline with every communication constraint removed."""
    options = replace(options or SolveOptions(), include_comm=False)
    return run_alternating(model, options, init=init)
