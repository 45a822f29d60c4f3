"""Random system drops: geometry, channels, path losses, delays and Dopplers.

A drop places one moving point target at the origin, a sensing access point
(AP) on the x-axis, transmit APs in a ring around the target and users in a
disk, then draws Rician channels for every transmit-AP-to-user and
transmit-AP-to-sensing-AP link.  All arrays are uniform linear arrays (ULAs)
with half-wavelength spacing, aligned with the x-axis; angles are measured
from broadside.
"""

from dataclasses import dataclass, field

import numpy as np

from .units import SPEED_OF_LIGHT, db_to_linear

__all__ = [
    "SystemConfig",
    "Scenario",
    "steering_vector",
    "path_loss",
    "bistatic_delay_doppler",
    "rician_channel",
    "generate_scenario",
]


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters for one simulation setup.

    Powers are in watts, frequencies in Hz, distances in meters and SINR
    targets in linear scale.
    """

    B: int                  # transmit APs
    K: int                  # users
    Nt: int                 # transmit antennas per AP
    Nr: int                 # sensing-AP antennas
    L: int                  # symbol-block length
    fc: float               # carrier frequency
    bandwidth: float
    fs: float               # sampling frequency
    sigma2_c: float         # user noise power
    sigma2_r: float         # sensing noise power
    P_b: tuple              # per-AP power budgets, length B
    Gamma_k: tuple          # per-user SINR targets (linear), length K
    rician_K_dB: float = 3.0
    pl_exp_sense: float = 2.2   # tx-target, target-sensing, tx-sensing links
    pl_exp_comm: float = 2.8    # tx-user links
    rcs_var: float = 1.0
    target_speed: float = 30.0
    sensing_ap_offset: float = 30.0
    ap_ring_inner: float = 30.0
    ap_ring_outer: float = 60.0
    user_disk_radius: float = 150.0
    clutter_extra_loss_dB: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "P_b", tuple(float(p) for p in self.P_b))
        object.__setattr__(self, "Gamma_k", tuple(float(g) for g in self.Gamma_k))
        for name in ("B", "K", "Nt", "Nr", "L"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("fc", "bandwidth", "fs", "sigma2_c", "sigma2_r",
                     "sensing_ap_offset", "ap_ring_inner", "ap_ring_outer",
                     "user_disk_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.fs < self.bandwidth:
            raise ValueError("fs must be >= bandwidth")
        if len(self.P_b) != self.B:
            raise ValueError("P_b must have length B")
        if len(self.Gamma_k) != self.K:
            raise ValueError("Gamma_k must have length K")
        if any(p <= 0 for p in self.P_b):
            raise ValueError("P_b entries must be > 0")
        if any(g <= 0 for g in self.Gamma_k):
            raise ValueError("Gamma_k entries must be > 0")
        if self.ap_ring_outer < self.ap_ring_inner:
            raise ValueError("ap_ring_outer must be >= ap_ring_inner")

    @property
    def n_streams(self):
        """Total number of transmit streams (communication + probing)."""
        return self.K + self.Nt


@dataclass(frozen=True)
class Scenario:
    """One random drop: positions, channels and target-path parameters.

    Immutable after construction; safe to share read-only across workers.
    """

    config: SystemConfig
    ap_positions: np.ndarray        # (B, 2)
    user_positions: np.ndarray      # (K, 2)
    sensing_ap_position: np.ndarray  # (2,)
    target_position: np.ndarray     # (2,)
    target_velocity: np.ndarray     # (2,)
    h: np.ndarray                   # (B, K, Nt) complex, tx-AP b to user k
    G: np.ndarray                   # (B, Nr, Nt) complex, tx-AP b to sensing AP
    theta_t: float                  # target angle at sensing AP (rad)
    theta_bt: np.ndarray            # (B,) target angle at each transmit AP
    tau: np.ndarray                 # (B,) target-path delay, integer samples
    iota: np.ndarray                # (B,) direct-path delay, integer samples
    fD: np.ndarray                  # (B,) normalized Doppler, cycles/sample
    sigma2_b: np.ndarray            # (B,) target-path gain variance


def steering_vector(theta, n):
    """ULA response for half-wavelength spacing, phase reference at element 0.

    Element m equals exp(j*pi*m*sin(theta)).
    """
    if n < 1:
        raise ValueError("antenna count must be >= 1")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(theta))


def path_loss(distance, exponent, fc):
    """Linear power gain (lambda/4pi)^2 * distance^(-exponent).

    The free-space gain at the 1 m reference distance anchors the model;
    distances below the reference are rejected.
    """
    if distance < 1.0:
        raise ValueError("distance below 1 m reference")
    lam = SPEED_OF_LIGHT / fc
    return (lam / (4.0 * np.pi)) ** 2 * distance ** (-exponent)


def bistatic_delay_doppler(tx_pos, target_pos, rx_pos, velocity, fc, fs):
    """Two-hop delay (integer samples) and normalized Doppler (cycles/sample).

    The delay is the round of fs * path_length / c.  The Doppler follows the
    bistatic range rate: fD = -(rdot_tx + rdot_rx) * fc / (c * fs), where
    rdot_x is the rate of change of the target-to-endpoint-x distance.
    """
    tx = np.asarray(tx_pos, dtype=float)
    rx = np.asarray(rx_pos, dtype=float)
    tgt = np.asarray(target_pos, dtype=float)
    v = np.asarray(velocity, dtype=float)
    d_tx = np.linalg.norm(tgt - tx)
    d_rx = np.linalg.norm(tgt - rx)
    if d_tx == 0.0 or d_rx == 0.0:
        raise ValueError("target coincides with an endpoint")
    tau = int(round(fs * (d_tx + d_rx) / SPEED_OF_LIGHT))
    rdot_tx = float((tgt - tx) @ v) / d_tx
    rdot_rx = float((tgt - rx) @ v) / d_rx
    fD = -(rdot_tx + rdot_rx) * fc / (SPEED_OF_LIGHT * fs)
    if abs(fD) >= 0.5:
        raise ValueError("normalized Doppler magnitude >= 0.5 (aliasing)")
    return tau, float(fD)


def rician_channel(rng, rows, cols, K_factor_linear, los_matrix, gain):
    """Rician fading matrix with average power `gain` per entry.

    H = sqrt(gain) * (sqrt(K/(K+1)) * LOS + sqrt(1/(K+1)) * N) with N i.i.d.
    standard complex normal.  `los_matrix` must have unit average element
    power so that E||H||_F^2 = gain * rows * cols.
    """
    if K_factor_linear < 0:
        raise ValueError("Rician factor must be >= 0")
    los = np.asarray(los_matrix, dtype=complex)
    if los.shape != (rows, cols):
        raise ValueError("los_matrix has wrong shape")
    scatter = (rng.standard_normal((rows, cols))
               + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    if np.isinf(K_factor_linear):
        mix = los
    else:
        k = K_factor_linear
        mix = np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * scatter
    return np.sqrt(gain) * mix


def _broadside_angle(from_pos, to_pos):
    # Arrays lie along the x-axis, so sin(theta) is the x-component of the
    # unit direction vector.
    d = np.asarray(to_pos, dtype=float) - np.asarray(from_pos, dtype=float)
    r = np.linalg.norm(d)
    return float(np.arcsin(np.clip(d[0] / r, -1.0, 1.0)))


def _sample_ring(rng, inner, outer, center):
    r = np.sqrt(rng.uniform(inner ** 2, outer ** 2))
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return center + r * np.array([np.cos(phi), np.sin(phi)])


def _sample_disk(rng, radius, center):
    r = radius * np.sqrt(rng.uniform())
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return center + r * np.array([np.cos(phi), np.sin(phi)])


def generate_scenario(config, seed):
    """Draw one reproducible random drop for the given configuration.

    The target sits at the origin, the sensing AP at (sensing_ap_offset, 0).
    Transmit APs are uniform over the ring [ap_ring_inner, ap_ring_outer]
    around the target, users uniform over the user disk.  Positions closer
    than 1 m to any link endpoint they connect to are resampled so that every
    path-loss evaluation stays above the reference distance.
    """
    cfg = config
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    target = np.zeros(2)
    sensing = np.array([cfg.sensing_ap_offset, 0.0])

    ap_pos = np.empty((cfg.B, 2))
    for b in range(cfg.B):
        while True:
            p = _sample_ring(rng, cfg.ap_ring_inner, cfg.ap_ring_outer, target)
            if (np.linalg.norm(p - sensing) >= 1.0
                    and np.linalg.norm(p - target) >= 1.0):
                ap_pos[b] = p
                break

    user_pos = np.empty((cfg.K, 2))
    for k in range(cfg.K):
        while True:
            p = _sample_disk(rng, cfg.user_disk_radius, target)
            if np.all(np.linalg.norm(ap_pos - p, axis=1) >= 1.0):
                user_pos[k] = p
                break

    phi_v = rng.uniform(0.0, 2.0 * np.pi)
    velocity = cfg.target_speed * np.array([np.cos(phi_v), np.sin(phi_v)])

    K_lin = float(db_to_linear(cfg.rician_K_dB))
    extra = float(db_to_linear(-cfg.clutter_extra_loss_dB))

    h = np.empty((cfg.B, cfg.K, cfg.Nt), dtype=complex)
    for b in range(cfg.B):
        for k in range(cfg.K):
            d = np.linalg.norm(user_pos[k] - ap_pos[b])
            gain = path_loss(d, cfg.pl_exp_comm, cfg.fc)
            los = steering_vector(_broadside_angle(ap_pos[b], user_pos[k]), cfg.Nt)
            los = los[:, None] * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
            h[b, k] = rician_channel(rng, cfg.Nt, 1, K_lin, los, gain)[:, 0]

    G = np.empty((cfg.B, cfg.Nr, cfg.Nt), dtype=complex)
    for b in range(cfg.B):
        d = np.linalg.norm(sensing - ap_pos[b])
        gain = path_loss(d, cfg.pl_exp_sense, cfg.fc) * extra
        a_rx = steering_vector(_broadside_angle(sensing, ap_pos[b]), cfg.Nr)
        a_tx = steering_vector(_broadside_angle(ap_pos[b], sensing), cfg.Nt)
        los = np.outer(a_rx, a_tx) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        G[b] = rician_channel(rng, cfg.Nr, cfg.Nt, K_lin, los, gain)

    theta_t = _broadside_angle(sensing, target)
    theta_bt = np.array([_broadside_angle(ap_pos[b], target) for b in range(cfg.B)])

    tau = np.empty(cfg.B, dtype=int)
    iota = np.empty(cfg.B, dtype=int)
    fD = np.empty(cfg.B)
    sigma2_b = np.empty(cfg.B)
    pl_target_rx = path_loss(np.linalg.norm(sensing - target), cfg.pl_exp_sense, cfg.fc)
    for b in range(cfg.B):
        tau[b], fD[b] = bistatic_delay_doppler(
            ap_pos[b], target, sensing, velocity, cfg.fc, cfg.fs)
        iota[b] = int(round(cfg.fs * np.linalg.norm(sensing - ap_pos[b])
                            / SPEED_OF_LIGHT))
        d_tx = np.linalg.norm(target - ap_pos[b])
        sigma2_b[b] = cfg.rcs_var * path_loss(d_tx, cfg.pl_exp_sense, cfg.fc) * pl_target_rx

    return Scenario(
        config=cfg,
        ap_positions=ap_pos,
        user_positions=user_pos,
        sensing_ap_position=sensing,
        target_position=target,
        target_velocity=velocity,
        h=h,
        G=G,
        theta_t=theta_t,
        theta_bt=theta_bt,
        tau=tau,
        iota=iota,
        fD=fD,
        sigma2_b=sigma2_b,
    )
