"""Experiment driver: Monte-Carlo sweeps, CSV emission and diagnostics.

A sweep runs every (drop, axis value, scheme) combination, seeding each drop
deterministically from the base seed plus the drop index.  Drops whose
max-min initialization cannot reach the communication targets are recorded
with converged=false and excluded from averages.  Results are written
atomically to CSV after sorting, so the output is reproducible regardless
of worker scheduling; CFISAC_THREADS caps process parallelism (absent means
single-threaded).
"""

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import cone, numerics
from .model import (SpaceTimeFilter, build_sensing_model, comm_sinr, draw_symbols,
                    monte_carlo_radar_sinr, radar_sinr, simulate_received, vec)
from .optimizer import (DinkelbachState, InfeasibleDropError, SolveOptions,
                        baseline_no_rbf, baseline_radar_only, baseline_spatial_bf,
                        initialize_beamformers, run_alternating,
                        surrogate_coefficients, update_receive_filter)
from .scenario import SystemConfig, generate_scenario
from .units import db_to_linear, dbm_to_watt, linear_to_db, watt_to_dbm

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "CSV_HEADER",
    "desk_config",
    "paper_config",
    "run_experiment",
    "summarize",
    "validate",
    "SummaryRow",
    "load_experiment_config",
]

CSV_HEADER = ("drop_id,scheme,P_dBm,Gamma_dB,radar_sinr_dB,min_comm_sinr_dB,"
              "outer_iters,converged,wall_ms,seed")

SCHEMES = ("proposed", "spatial_bf", "no_rbf", "radar_only")

_SCHEME_RUNNERS = {
    "proposed": run_alternating,
    "spatial_bf": baseline_spatial_bf,
    "no_rbf": baseline_no_rbf,
    "radar_only": baseline_radar_only,
}


def desk_config(P_dBm=35.0, Gamma_dB=-5.0, Nt=2, Nr=2):
    """Small-scale configuration for tests and CI-sized experiments."""
    return SystemConfig(
        B=3, K=4, Nt=Nt, Nr=Nr, L=16,
        fc=24e9, bandwidth=10e6, fs=20e6,
        sigma2_c=dbm_to_watt(-80.0), sigma2_r=dbm_to_watt(-80.0),
        P_b=(float(dbm_to_watt(P_dBm)),) * 3,
        Gamma_k=(float(db_to_linear(Gamma_dB)),) * 4,
    )


def paper_config(P_dBm=35.0, Gamma_dB=10.0, Nt=4, Nr=4):
    """Full-scale configuration: 6 APs, 15 users, 4 antennas, 100 symbols."""
    return SystemConfig(
        B=6, K=15, Nt=Nt, Nr=Nr, L=100,
        fc=24e9, bandwidth=10e6, fs=20e6,
        sigma2_c=dbm_to_watt(-80.0), sigma2_r=dbm_to_watt(-80.0),
        P_b=(float(dbm_to_watt(P_dBm)),) * 6,
        Gamma_k=(float(db_to_linear(Gamma_dB)),) * 15,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    base: SystemConfig
    axis: str                 # "power" (dBm) or "comm_sinr" (dB)
    values: tuple
    schemes: tuple = SCHEMES
    drops: int = 20
    seed: int = 1
    output: str = "results.csv"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if self.axis not in ("power", "comm_sinr"):
            raise ValueError("axis must be 'power' or 'comm_sinr'")
        if list(self.values) != sorted(set(self.values)):
            raise ValueError("axis values must be strictly increasing")
        if self.drops < 1:
            raise ValueError("drops must be >= 1")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")


@dataclass
class ResultRow:
    drop_id: int
    scheme: str
    P_dBm: float
    Gamma_dB: float
    radar_sinr_dB: float
    min_comm_sinr_dB: float
    outer_iters: int
    converged: bool
    wall_ms: float
    seed: int

    def to_csv(self):
        return ",".join([
            str(self.drop_id), self.scheme,
            _fmt(self.P_dBm), _fmt(self.Gamma_dB),
            _fmt(self.radar_sinr_dB), _fmt(self.min_comm_sinr_dB),
            str(self.outer_iters), "true" if self.converged else "false",
            _fmt(self.wall_ms), str(self.seed),
        ])


def _fmt(x):
    return f"{float(x):.10g}"


def load_experiment_config(path):
    """Read an ExperimentConfig from a JSON file; unknown keys are rejected."""
    with open(path) as fh:
        raw = json.load(fh)
    allowed = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "base" not in raw or "axis" not in raw or "values" not in raw:
        raise ValueError("config requires 'base', 'axis' and 'values'")
    base_raw = dict(raw["base"])
    base_allowed = {f.name for f in fields(SystemConfig)}
    unknown = set(base_raw) - base_allowed
    if unknown:
        raise ValueError(f"unknown base config keys: {sorted(unknown)}")
    base = SystemConfig(**base_raw)
    kwargs = {k: v for k, v in raw.items() if k != "base"}
    return ExperimentConfig(base=base, **kwargs)


def _axis_config(exp, value):
    base = exp.base
    if exp.axis == "power":
        watts = float(dbm_to_watt(value))
        return replace(base, P_b=(watts,) * base.B)
    gamma = float(db_to_linear(value))
    return replace(base, Gamma_k=(gamma,) * base.K)


def _axis_labels(cfg, exp, value):
    if exp.axis == "power":
        return float(value), float(linear_to_db(max(cfg.Gamma_k)))
    return float(watt_to_dbm(max(cfg.P_b))), float(value)


def _symbol_rng(seed):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))


def run_drop(exp, drop_index, options=None):
    """Run every (axis value, scheme) combination for one drop."""
    options = options or SolveOptions()
    seed = exp.seed + drop_index
    base = exp.base
    scenario = generate_scenario(base, seed)
    Q = base.L + int(max(np.max(scenario.tau), np.max(scenario.iota)))
    symbols = draw_symbols(_symbol_rng(seed), base.K, base.Nt, base.L, Q)
    model = build_sensing_model(scenario, symbols)

    rows = []
    init_cache = {}
    for value in exp.values:
        cfg_v = _axis_config(exp, value)
        scen_v = replace(scenario, config=cfg_v)
        model_v = replace(model, scenario=scen_v)
        p_dbm, gamma_db = _axis_labels(cfg_v, exp, value)
        key = cfg_v.P_b
        if key not in init_cache:
            init_cache[key] = initialize_beamformers(
                scen_v, model_v, bisection_tol=options.bisection_tol,
                solver=options.solver)
        cached = init_cache[key]
        feasible = cached.achieved_min_sinr >= max(cfg_v.Gamma_k) * (1.0 - 1e-9)
        init = replace_init(cached, feasible)
        for scheme in exp.schemes:
            tic = time.perf_counter()
            try:
                result = _SCHEME_RUNNERS[scheme](model_v, options, init=init)
                wall = (time.perf_counter() - tic) * 1e3
                min_comm = min(comm_sinr(result.beamformers, scen_v, k)
                               for k in range(cfg_v.K))
                converged = bool(result.converged and not result.aborted)
                if converged:
                    converged = _feasible_at_emission(result, scen_v, cfg_v, scheme)
                rows.append(ResultRow(
                    drop_id=drop_index, scheme=scheme, P_dBm=p_dbm,
                    Gamma_dB=gamma_db,
                    radar_sinr_dB=float(linear_to_db(result.radar_sinr))
                    if result.radar_sinr > 0 else float("nan"),
                    min_comm_sinr_dB=float(linear_to_db(min_comm))
                    if min_comm > 0 else float("nan"),
                    outer_iters=result.outer_iters, converged=converged,
                    wall_ms=wall, seed=seed))
            except InfeasibleDropError:
                wall = (time.perf_counter() - tic) * 1e3
                rows.append(ResultRow(
                    drop_id=drop_index, scheme=scheme, P_dBm=p_dbm,
                    Gamma_dB=gamma_db, radar_sinr_dB=float("nan"),
                    min_comm_sinr_dB=float(linear_to_db(init.achieved_min_sinr))
                    if init.achieved_min_sinr > 0 else float("nan"),
                    outer_iters=0, converged=False, wall_ms=wall, seed=seed))
    return rows


def replace_init(init, feasible):
    from .optimizer import InitResult
    return InitResult(beamformers=init.beamformers,
                      achieved_min_sinr=init.achieved_min_sinr,
                      feasible=feasible, bisection_iters=init.bisection_iters)


def _feasible_at_emission(result, scenario, cfg, scheme):
    if result.beamformers.max_power_violation(cfg.P_b) > 1e-8 * max(cfg.P_b):
        return False
    if scheme == "radar_only":
        return True
    worst = min(comm_sinr(result.beamformers, scenario, k) / cfg.Gamma_k[k]
                for k in range(cfg.K))
    return worst >= 1.0 - 1e-6


def _worker(args):
    exp, drop_index, options = args
    return run_drop(exp, drop_index, options)


def run_experiment(exp, options=None, progress=None):
    """Run the full sweep and write the CSV atomically; returns all rows.

    CFISAC_THREADS > 1 runs drops in worker processes; each worker gets a
    single-threaded BLAS so the workers do not oversubscribe the machine.
    """
    workers = int(os.environ.get("CFISAC_THREADS", "1"))
    all_rows = []
    if workers > 1:
        import multiprocessing as mp

        os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
        os.environ.setdefault("OMP_NUM_THREADS", "1")
        ctx = mp.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            for rows in pool.map(_worker,
                                 [(exp, i, options) for i in range(exp.drops)]):
                all_rows.extend(rows)
                if progress:
                    progress(len(all_rows))
    else:
        for i in range(exp.drops):
            all_rows.extend(run_drop(exp, i, options))
            if progress:
                progress(len(all_rows))
    order = {s: i for i, s in enumerate(SCHEMES)}
    all_rows.sort(key=lambda r: (r.drop_id, r.P_dBm, r.Gamma_dB, order[r.scheme]))
    tmp = str(exp.output) + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in all_rows:
            fh.write(row.to_csv() + "\n")
    os.replace(tmp, exp.output)
    return all_rows


@dataclass
class SummaryRow:
    scheme: str
    P_dBm: float
    Gamma_dB: float
    mean_radar_sinr_dB: float
    std_radar_sinr_dB: float
    converged_rows: int
    total_rows: int


def summarize(csv_path):
    """Per-(scheme, axis point) means over converged rows, in dB domain."""
    rows = read_result_rows(csv_path)
    groups = {}
    for r in rows:
        key = (r.scheme, r.P_dBm, r.Gamma_dB)
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[1], k[2], k[0])):
        scheme, p, g = key
        grp = groups[key]
        vals = [r.radar_sinr_dB for r in grp if r.converged]
        mean = float(np.mean(vals)) if vals else float("nan")
        std = float(np.std(vals)) if vals else float("nan")
        out.append(SummaryRow(scheme=scheme, P_dBm=p, Gamma_dB=g,
                              mean_radar_sinr_dB=mean, std_radar_sinr_dB=std,
                              converged_rows=len(vals), total_rows=len(grp)))
    return out


def read_result_rows(csv_path):
    """Parse a results CSV, rejecting schema violations with the line number."""
    rows = []
    with open(csv_path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{csv_path}: empty file") from None
        if ",".join(header) != CSV_HEADER:
            raise ValueError(f"{csv_path}: line 1: bad header")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 10:
                raise ValueError(f"{csv_path}: line {lineno}: expected 10 fields")
            try:
                rows.append(ResultRow(
                    drop_id=int(rec[0]), scheme=rec[1], P_dBm=float(rec[2]),
                    Gamma_dB=float(rec[3]), radar_sinr_dB=float(rec[4]),
                    min_comm_sinr_dB=float(rec[5]), outer_iters=int(rec[6]),
                    converged=rec[7] == "true", wall_ms=float(rec[8]),
                    seed=int(rec[9])))
            except ValueError as exc:
                raise ValueError(f"{csv_path}: line {lineno}: {exc}") from None
    return rows


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class CheckResult:
    name: str
    passed: bool
    error: float
    detail: str = ""

    def __str__(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} (err={self.error:.3e})"


def validate(config=None, seed=7, tau_offset=0):
    """Run the cross-module oracle suite on one small drop; report each check.

    `tau_offset` deliberately perturbs the model's delays, which must break
    the time-domain equivalence check (used to prove the check has teeth).
    """
    cfg = config or desk_config()
    checks = []
    scenario = generate_scenario(cfg, seed)
    rng = np.random.default_rng(seed + 1)
    Q = (cfg.L + int(max(np.max(scenario.tau), np.max(scenario.iota)))
         + abs(int(tau_offset)))
    symbols = draw_symbols(_symbol_rng(seed), cfg.K, cfg.Nt, cfg.L, Q)
    scen_model = scenario
    if tau_offset:
        scen_model = replace(scenario, tau=scenario.tau + int(tau_offset))
    model = build_sensing_model(scen_model, symbols)

    W = _random_beamformers(rng, cfg)
    zero_noise = np.zeros((cfg.Nr, Q), dtype=complex)

    # time-domain oracle vs Kronecker model, single-AP target path
    errs = []
    for b in range(cfg.B):
        alpha = np.zeros(cfg.B)
        alpha[b] = 1.0
        clutter = simulate_received(scenario, W, symbols, np.zeros(cfg.B), zero_noise)
        target = simulate_received(scenario, W, symbols, alpha, zero_noise) - clutter
        ref = model.target_response[b] @ W.w_b(b)
        errs.append(np.linalg.norm(vec(target) - ref) / max(np.linalg.norm(ref), 1e-300))
    err = float(max(errs))
    checks.append(CheckResult("kronecker_target_identity", err <= 1e-10, err,
                              "vec(time-domain echo) vs H_b S w_b"))

    clutter = simulate_received(scenario, W, symbols, np.zeros(cfg.B), zero_noise)
    ref = sum(model.clutter_response[b] @ W.w_b(b) for b in range(cfg.B))
    err = float(np.linalg.norm(vec(clutter) - ref) / max(np.linalg.norm(ref), 1e-300))
    checks.append(CheckResult("kronecker_clutter_identity", err <= 1e-10, err,
                              "vec(time-domain clutter) vs sum C_b S w_b"))

    u = update_receive_filter(W, model)
    analytic = radar_sinr(W, u, model)
    mc = monte_carlo_radar_sinr(scen_model, W, u, symbols, 20000,
                                np.random.default_rng(seed + 2))
    err = float(abs(mc - analytic) / analytic)
    checks.append(CheckResult("monte_carlo_sinr_match", err <= 0.03, err,
                              f"analytic {analytic:.4e} vs MC {mc:.4e}"))

    err = _dense_filter_angle(W, model)
    checks.append(CheckResult("receive_filter_vs_dense_eig", err <= 1e-8, err,
                              "reduced filter vs dense eigensolver (rad)"))

    err = _surrogate_violation(rng, W, u, model)
    checks.append(CheckResult("surrogate_minorization", err <= 1e-10, err,
                              "max violation over sampled beamformers"))

    prog = _random_feasible_program(np.random.default_rng(seed + 3))
    sol = cone.solve(prog)
    err = float(max(sol.primal_res, sol.dual_res, sol.gap))
    checks.append(CheckResult("socp_kkt_residuals", sol.status == "optimal"
                              and sol.primal_res <= 1e-7 * (1 + np.linalg.norm(prog.b))
                              and sol.gap <= 1e-8 * (1 + abs(sol.objective)),
                              err, f"status {sol.status}"))

    try:
        numerics.rank_one_plus_identity_inverse_apply(np.ones(3), 0.0, np.eye(3))
        checks.append(CheckResult("zero_noise_guard", False, 0.0,
                                  "sigma2=0 was not rejected"))
    except ValueError:
        checks.append(CheckResult("zero_noise_guard", True, 0.0,
                                  "sigma2=0 rejected"))
    return checks


def _random_beamformers(rng, cfg):
    from .model import BeamformerSet
    mats = []
    for b in range(cfg.B):
        Wb = (rng.standard_normal((cfg.Nt, cfg.n_streams))
              + 1j * rng.standard_normal((cfg.Nt, cfg.n_streams)))
        Wb *= np.sqrt(cfg.P_b[b]) / np.linalg.norm(Wb)
        mats.append(Wb)
    return BeamformerSet(W=tuple(mats))


def _dense_filter_angle(W, model):
    from .optimizer import _clutter_vector, _target_columns
    V = _target_columns(W, model)
    cvec = _clutter_vector(W, model)
    sigma2 = model.scenario.config.sigma2_r
    n = V.shape[0]
    R = np.outer(cvec, cvec.conj()) + sigma2 * np.eye(n)
    Rinv_half = np.linalg.inv(np.linalg.cholesky(R))
    Mrm = Rinv_half @ V
    vals, vecs = np.linalg.eigh(Mrm @ Mrm.conj().T)
    u_dense = Rinv_half.conj().T @ vecs[:, -1]
    u_dense /= np.linalg.norm(u_dense)
    u_fast = update_receive_filter(W, model).u
    resid = u_fast - u_dense * np.vdot(u_dense, u_fast)
    return float(np.arcsin(min(1.0, np.linalg.norm(resid))))


def _surrogate_violation(rng, W, u, model):
    cfg = model.scenario.config
    state = DinkelbachState(gamma=1.0, W_prev=W)
    surrogate_coefficients(state, u, model)
    uvec = u.u
    worst = -np.inf
    for _ in range(50):
        W2 = _random_beamformers(rng, cfg)
        for b in range(cfg.B):
            resp = np.vdot(uvec, model.target_response[b] @ W2.w_b(b))
            true_val = np.abs(resp) ** 2
            lin = 2.0 * np.real(np.vdot(state.f_b[b] / (2 * model.scenario.sigma2_b[b]),
                                        W2.w_b(b))) - state.c_b[b]
            worst = max(worst, lin - true_val)
    return float(max(worst, 0.0))


def _random_feasible_program(rng):
    n = 8
    spec = (("zero", 2), ("nonneg", 4), ("soc", 4))
    dims = sum(d for _, d in spec)
    A = rng.standard_normal((dims, n))
    s0 = np.zeros(dims)
    s0[2:6] = rng.uniform(0.5, 2.0, 4)
    v = rng.standard_normal(3)
    s0[6] = np.linalg.norm(v) + 1.0
    s0[7:] = v
    b = A @ rng.standard_normal(n) + s0
    z0 = np.zeros(dims)
    z0[:2] = rng.standard_normal(2)
    z0[2:6] = rng.uniform(0.5, 2.0, 4)
    v = rng.standard_normal(3)
    z0[6] = np.linalg.norm(v) + 1.0
    z0[7:] = v
    return cone.ConeProgram(c=-A.T @ z0, A=A, b=b, cones=spec)
