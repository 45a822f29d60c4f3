"""Shared fixtures: synthetic scenarios with arbitrary delays and channels."""

import numpy as np

from cfisac.model import BeamformerSet
from cfisac.scenario import Scenario, SystemConfig
from cfisac.units import dbm_to_watt


def toy_config(B=2, K=2, Nt=2, Nr=2, L=4, sigma2_r=1.0, sigma2_c=1.0,
               P_b=None, Gamma_k=None):
    return SystemConfig(
        B=B, K=K, Nt=Nt, Nr=Nr, L=L,
        fc=24e9, bandwidth=10e6, fs=20e6,
        sigma2_c=sigma2_c, sigma2_r=sigma2_r,
        P_b=tuple(P_b) if P_b is not None else (1.0,) * B,
        Gamma_k=tuple(Gamma_k) if Gamma_k is not None else (1.0,) * K,
    )


def toy_scenario(rng, cfg, taus, iotas, fDs, sigma2_b=None, zero_clutter=False):
    """A scenario with hand-picked delays/Dopplers and random channels."""
    B, K, Nt, Nr = cfg.B, cfg.K, cfg.Nt, cfg.Nr
    h = (rng.standard_normal((B, K, Nt)) + 1j * rng.standard_normal((B, K, Nt)))
    G = (rng.standard_normal((B, Nr, Nt)) + 1j * rng.standard_normal((B, Nr, Nt)))
    if zero_clutter:
        G = np.zeros_like(G)
    return Scenario(
        config=cfg,
        ap_positions=np.zeros((B, 2)),
        user_positions=np.zeros((K, 2)),
        sensing_ap_position=np.array([30.0, 0.0]),
        target_position=np.zeros(2),
        target_velocity=np.array([30.0, 0.0]),
        h=h,
        G=G,
        theta_t=float(rng.uniform(-1.2, 1.2)),
        theta_bt=rng.uniform(-1.2, 1.2, B),
        tau=np.asarray(taus, dtype=int),
        iota=np.asarray(iotas, dtype=int),
        fD=np.asarray(fDs, dtype=float),
        sigma2_b=(np.asarray(sigma2_b, dtype=float) if sigma2_b is not None
                  else rng.uniform(0.2, 1.0, B)),
    )


def random_toy_scenario(rng, B=2, K=2, Nt=2, Nr=2, L=4, max_delay=3, **cfg_kw):
    cfg = toy_config(B=B, K=K, Nt=Nt, Nr=Nr, L=L, **cfg_kw)
    taus = rng.integers(0, max_delay + 1, B)
    iotas = rng.integers(0, max_delay + 1, B)
    fDs = rng.uniform(-0.4, 0.4, B)
    return toy_scenario(rng, cfg, taus, iotas, fDs)


def random_beamformers(rng, cfg, full_power=False):
    mats = []
    for b in range(cfg.B):
        Wb = (rng.standard_normal((cfg.Nt, cfg.n_streams))
              + 1j * rng.standard_normal((cfg.Nt, cfg.n_streams)))
        scale = np.sqrt(cfg.P_b[b]) / np.linalg.norm(Wb)
        if not full_power:
            scale *= rng.uniform(0.3, 1.0)
        mats.append(scale * Wb)
    return BeamformerSet(W=tuple(mats))


def subspace_angle(u, v):
    """Angle between unit vectors up to phase, resolved below 1e-8 rad."""
    u = np.asarray(u).reshape(-1)
    v = np.asarray(v).reshape(-1)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    resid = u - v * np.vdot(v, u)
    return float(np.arcsin(min(1.0, np.linalg.norm(resid))))
