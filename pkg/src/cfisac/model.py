"""Vectorized sensing model, SINR evaluation and a time-domain oracle.

The sensing AP observes Q = L + max(delays) snapshots.  Stacking the
observation matrix column-by-column turns each transmit AP's target echo
into H_b @ S_tilde @ w_b and its direct-path clutter into C_b @ S_tilde @
w_b, where H_b and C_b are Kronecker products of a temporal factor (delay
shift times Doppler ramp) and a spatial factor (steering outer product or
the direct channel).  `simulate_received` reproduces the same signals slot
by slot without ever touching the Kronecker form and serves as the
independent oracle for the vectorized model.
"""

from dataclasses import dataclass

import numpy as np

from .scenario import steering_vector

__all__ = [
    "SymbolBlock",
    "SensingModel",
    "BeamformerSet",
    "SpaceTimeFilter",
    "shift_matrix",
    "doppler_matrix",
    "draw_symbols",
    "build_sensing_model",
    "comm_sinr",
    "radar_sinr",
    "simulate_received",
    "monte_carlo_radar_sinr",
]


def vec(M):
    """Column-major vectorization."""
    return np.asarray(M).flatten(order="F")


def unvec(v, rows, cols):
    return np.asarray(v).reshape((rows, cols), order="F")


@dataclass(frozen=True)
class SymbolBlock:
    """One realized block of unit-power transmit symbols."""

    S: np.ndarray        # (K+Nt, L) complex
    Q: int               # observation length in samples
    S_tilde: np.ndarray  # (Nt*L, Nt*(K+Nt)) = kron(S.T, I_Nt)

    @property
    def L(self):
        return self.S.shape[1]

    @property
    def n_streams(self):
        return self.S.shape[0]


def draw_symbols(rng, K, Nt, L, Q):
    """Draw i.i.d. standard complex normal symbols for K+Nt streams."""
    if L < 1:
        raise ValueError("L must be >= 1")
    n = K + Nt
    S = (rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L))) / np.sqrt(2.0)
    S_tilde = np.kron(S.T, np.eye(Nt))
    return SymbolBlock(S=S, Q=int(Q), S_tilde=S_tilde)


def shift_matrix(tau, L, Q):
    """Binary L x Q matrix with a 1 in row m at column m + tau (0-based)."""
    if tau < 0 or tau > Q - L:
        raise ValueError("delay does not fit in the observation window")
    J = np.zeros((L, Q))
    J[np.arange(L), np.arange(L) + tau] = 1.0
    return J


def doppler_matrix(fD, Q):
    """Diagonal Q x Q phase ramp diag(1, e^{j2pi fD}, ..., e^{j2pi(Q-1)fD})."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    return np.diag(np.exp(2j * np.pi * fD * np.arange(Q)))


@dataclass(frozen=True)
class SensingModel:
    """Assembled sensing matrices for one drop and one symbol block."""

    scenario: object
    symbols: SymbolBlock
    H: tuple        # B matrices, (Nr*Q, Nt*L): target path per AP
    C: tuple        # B matrices, (Nr*Q, Nt*L): direct clutter path per AP
    J_tau: tuple    # B shift matrices (L, Q)
    J_iota: tuple   # B shift matrices (L, Q)
    D: tuple        # B Doppler diagonals (Q, Q)
    target_response: tuple   # B matrices H_b @ S_tilde, (Nr*Q, Nt*(K+Nt))
    clutter_response: tuple  # B matrices C_b @ S_tilde

    @property
    def Q(self):
        return self.symbols.Q

    @property
    def config(self):
        return self.scenario.config


def build_sensing_model(scenario, symbols):
    """Assemble H_b, C_b and their products with the symbol lift.

    The per-AP response products use the Kronecker mixed-product identity
    (A kron B)(C kron I) = (A C) kron B, which avoids the Nt*L-sized
    intermediate; tests confirm equality with the dense product.
    """
    cfg = scenario.config
    S = symbols.S
    L, Q = symbols.L, symbols.Q
    if S.shape[0] != cfg.K + cfg.Nt or L != cfg.L:
        raise ValueError("symbol block does not match the configuration")
    needed = cfg.L + int(max(np.max(scenario.tau), np.max(scenario.iota)))
    if Q < needed:
        raise ValueError("observation window too short for the drop's delays")

    a_r = steering_vector(scenario.theta_t, cfg.Nr)
    H, C, Jt, Ji, D = [], [], [], [], []
    tr, cr = [], []
    for b in range(cfg.B):
        a_t = steering_vector(scenario.theta_bt[b], cfg.Nt)
        spatial = np.outer(a_r, a_t)
        J_tau = shift_matrix(int(scenario.tau[b]), L, Q)
        J_iota = shift_matrix(int(scenario.iota[b]), L, Q)
        Db = doppler_matrix(float(scenario.fD[b]), Q)
        temporal_t = Db @ J_tau.T          # (Q, L)
        H.append(np.kron(temporal_t, spatial))
        C.append(np.kron(J_iota.T, scenario.G[b]))
        Jt.append(J_tau)
        Ji.append(J_iota)
        D.append(Db)
        tr.append(np.kron(temporal_t @ S.T, spatial))
        cr.append(np.kron(J_iota.T @ S.T, scenario.G[b]))

    return SensingModel(
        scenario=scenario,
        symbols=symbols,
        H=tuple(H),
        C=tuple(C),
        J_tau=tuple(Jt),
        J_iota=tuple(Ji),
        D=tuple(D),
        target_response=tuple(tr),
        clutter_response=tuple(cr),
    )


@dataclass(frozen=True)
class BeamformerSet:
    """Per-AP transmit matrices W_b of shape (Nt, K+Nt) plus stacked views."""

    W: tuple  # B complex matrices

    def __post_init__(self):
        object.__setattr__(self, "W", tuple(np.asarray(w, dtype=complex) for w in self.W))

    @property
    def B(self):
        return len(self.W)

    @property
    def stacked(self):
        """Row-stacked (B*Nt, K+Nt) matrix [W_1; ...; W_B]."""
        return np.vstack(self.W)

    @property
    def w(self):
        """vec of the stacked matrix: columns are the cross-AP stream stacks."""
        return vec(self.stacked)

    def w_b(self, b):
        return vec(self.W[b])

    def wbar(self, k):
        """Stream k's beamformer stacked across APs."""
        return np.concatenate([self.W[b][:, k] for b in range(self.B)])

    @staticmethod
    def selector(b, B, Nt):
        """T_b with T_b @ stacked == W_b."""
        e = np.zeros((1, B))
        e[0, b] = 1.0
        return np.kron(e, np.eye(Nt))

    def frobenius_powers(self):
        return np.array([np.linalg.norm(Wb) ** 2 for Wb in self.W])

    def max_power_violation(self, P_b):
        return float(np.max(self.frobenius_powers() - np.asarray(P_b)))

    @classmethod
    def from_w(cls, w, B, Nt, n_streams):
        """Rebuild the per-AP matrices from vec(stacked W)."""
        Wst = unvec(np.asarray(w, dtype=complex), B * Nt, n_streams)
        return cls(W=tuple(Wst[b * Nt:(b + 1) * Nt, :] for b in range(B)))


@dataclass(frozen=True)
class SpaceTimeFilter:
    """Unit-norm space-time receive weight vector over Nr*Q samples."""

    u: np.ndarray

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValueError("zero filter")
        u = v / nrm
        idx = np.nonzero(np.abs(u) > 1e-12)[0]
        if idx.size:
            i = idx[0]
            u = u * (np.conj(u[i]) / np.abs(u[i]))
            u[i] = u[i].real
        return cls(u=u)


def comm_sinr(W, scenario, k):
    """Downlink SINR of user k (0-based) for the given beamformers.

    Interference sums over every other stream, probing streams included.
    """
    cfg = scenario.config
    if not 0 <= k < cfg.K:
        raise ValueError("user index out of range")
    # row vector over streams: sum_b h_{b,k}^T W_b
    terms = np.zeros(cfg.n_streams, dtype=complex)
    for b in range(cfg.B):
        terms += scenario.h[b, k] @ W.W[b]
    powers = np.abs(terms) ** 2
    signal = powers[k]
    interference = float(np.sum(powers) - signal)
    return float(signal / (interference + cfg.sigma2_c))


def radar_sinr(W, u, model):
    """Radar output SINR after the space-time filter.

    Ratio of averaged target-echo power to deterministic clutter power plus
    noise; invariant to scaling of u.
    """
    uvec = u.u if isinstance(u, SpaceTimeFilter) else np.asarray(u, dtype=complex)
    if np.linalg.norm(uvec) == 0:
        raise ValueError("zero filter")
    scen = model.scenario
    cfg = scen.config
    num = 0.0
    clutter = np.zeros(uvec.shape[0], dtype=complex)
    for b in range(cfg.B):
        wb = W.w_b(b)
        num += scen.sigma2_b[b] * np.abs(np.vdot(uvec, model.target_response[b] @ wb)) ** 2
        clutter += model.clutter_response[b] @ wb
    den = np.abs(np.vdot(uvec, clutter)) ** 2 + cfg.sigma2_r * float(np.real(np.vdot(uvec, uvec)))
    return float(num / den)


def simulate_received(scenario, W, symbols, alpha, noise):
    """Slot-by-slot received signal at the sensing AP, (Nr, Q) complex.

    Given realizations of the per-AP target gains `alpha` and an additive
    noise matrix, plays the transmit symbols through the delayed, Doppler
    shifted target path and the delayed direct path.  Works entirely in the
    time domain; used as the independent oracle for the vectorized model.
    """
    cfg = scenario.config
    S, L, Q = symbols.S, symbols.L, symbols.Q
    alpha = np.asarray(alpha, dtype=complex)
    Y = np.array(noise, dtype=complex, copy=True)
    if Y.shape != (cfg.Nr, Q):
        raise ValueError("noise must be (Nr, Q)")
    a_r = steering_vector(scenario.theta_t, cfg.Nr)
    X = [W.W[b] @ S for b in range(cfg.B)]  # (Nt, L) transmit blocks
    for b in range(cfg.B):
        a_t = steering_vector(scenario.theta_bt[b], cfg.Nt)
        tau_b, iota_b, f_b = int(scenario.tau[b]), int(scenario.iota[b]), float(scenario.fD[b])
        for q in range(Q):
            l_t = q - tau_b
            if 0 <= l_t < L and alpha[b] != 0:
                Y[:, q] += (alpha[b] * (a_t @ X[b][:, l_t])
                            * np.exp(2j * np.pi * q * f_b)) * a_r
            l_c = q - iota_b
            if 0 <= l_c < L:
                Y[:, q] += scenario.G[b] @ X[b][:, l_c]
    return Y


def monte_carlo_radar_sinr(scenario, W, u, symbols, trials, rng):
    """Monte-Carlo estimate of the radar output SINR.

    Draws the per-AP target gains from CN(0, sigma2_b), simulates the
    received block in the time domain and averages the filtered target
    power; the clutter term is deterministic given the symbols.  Converges
    to the analytic radar SINR.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cfg = scenario.config
    uvec = u.u if isinstance(u, SpaceTimeFilter) else np.asarray(u, dtype=complex)
    zero_noise = np.zeros((cfg.Nr, symbols.Q), dtype=complex)
    clutter_only = simulate_received(scenario, W, symbols, np.zeros(cfg.B), zero_noise)
    # unit-gain target responses per AP, clutter cancelled by subtraction
    p = np.empty(cfg.B, dtype=complex)
    for b in range(cfg.B):
        e = np.zeros(cfg.B)
        e[b] = 1.0
        resp = simulate_received(scenario, W, symbols, e, zero_noise) - clutter_only
        p[b] = np.vdot(uvec, vec(resp))
    sig = np.sqrt(scenario.sigma2_b)
    draws = (rng.standard_normal((trials, cfg.B))
             + 1j * rng.standard_normal((trials, cfg.B))) / np.sqrt(2.0)
    num = float(np.mean(np.abs((draws * sig) @ p) ** 2))
    clut = np.abs(np.vdot(uvec, vec(clutter_only))) ** 2
    den = clut + cfg.sigma2_r * float(np.real(np.vdot(uvec, uvec)))
    return float(num / den)
