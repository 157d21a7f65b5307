"""Linearized fluctuations of the homogeneous three-band model.

Two six-dimensional first-order problems, i dR/dt = (matrix) R:

* quasimomentum q != 0, basis (db_q, db_-q^dag, dc_q, dc_-q^dag,
  ds_q, ds_-q^dag): atomic Bogoliubov problem in the periodic optical
  potential; the photon field carries zero quasimomentum and does not
  couple.
* q = 0, basis (da, da^dag, db0, db0^dag, dc0, dc0^dag): cavity
  fluctuations coupled to the even condensate doublet; non-Hermitian via
  the cavity loss -i kappa.

Modes evolve as exp(-i omega t), so Im(omega) < 0 is damped (cooling) and
Im(omega) > 0 growing (heating).

Construction notes (constraints the entries must satisfy, enforced by the
test suite against an independently assembled plane-wave Bogoliubov
operator):

* the c/s diagonals carry the density-overlap corrections
  G_coll*(2 + gamma0^2) and G_coll*(2 - gamma0^2); with these the q -> 0
  limit of the q != 0 matrix equals the atomic sector of the q = 0 matrix,
  and the undriven c-sector eigenvalue equals the collision-renormalized
  frequency exactly.
* the cavity-atom couplings carry sqrt(N): the collective coupling seen by
  the fluctuations must match G = sqrt(2N) u of the two-mode model, and the
  static linear response d(alpha)/d(eta) of the q = 0 matrix must reproduce
  the derivative of the mean-field branch.
* q is dimensionless in units of k throughout; the +-4iq entries are in
  recoil units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .numerics import eig_dense
from .params import OMEGA_M, SystemParams, derive
from .band_meanfield import BandMeanField

FLUCTUATION_BASIS_Q = ("b_q", "b_-q_dag", "c_q", "c_-q_dag", "s_q", "s_-q_dag")
FLUCTUATION_BASIS_0 = ("a", "a_dag", "b0", "b0_dag", "c0", "c0_dag")


@dataclass
class SpectrumPoint:
    """One complex eigenfrequency with its eigenvector and weights.

    q is None exactly when the point came from the q = 0 cavity-coupled
    matrix.  Weights are squared-magnitude fractions of the unit-normalized
    eigenvector (cavity: da/da^dag components; c_weight: dc/dc^dag).
    """

    q: float | None
    omega: complex
    vector: np.ndarray
    cavity_weight: float = 0.0
    c_weight: float = 0.0
    parity: str | None = None
    mode_overlap: float | None = None
    track: int | None = None
    two_mode: bool = False


def build_Lq(sol: BandMeanField, q: float, p: SystemParams) -> np.ndarray:
    """Six-by-six fluctuation matrix at quasimomentum q (units of k)."""
    if q == 0.0:
        raise ValueError("q = 0 fluctuations couple to the cavity: use build_M")
    if not -1.0 <= q <= 1.0:
        raise ValueError("q must lie in the first Brillouin zone [-1, 1]")
    d = derive(p)
    G = p.G_coll
    b0, g0, mu, I = sol.beta0, sol.gamma0, sol.mu, sol.I

    wb = q * q + 2.0 * G - mu
    wc = (4.0 + q * q) + G * (2.0 + g0 * g0) - mu
    ws = (4.0 + q * q) + G * (2.0 - g0 * g0) - mu
    C = 2.0 * G * b0 * g0
    B = d.u * I + 2.0 * C
    Ac = G * (1.0 + g0 * g0 / 2.0)
    As = 0.5 * G * (1.0 + b0 * b0)
    iq4 = 4.0j * q

    return np.array([
        [wb,   G,    B,    C,    0.0,  0.0],
        [-G,  -wb,  -C,   -B,    0.0,  0.0],
        [B,    C,    wc,   Ac,   iq4,  0.0],
        [-C,  -B,   -Ac,  -wc,   0.0, -iq4],
        [0.0,  0.0, -iq4,  0.0,  ws,   As],
        [0.0,  0.0,  0.0,  iq4, -As,  -ws],
    ], dtype=complex)


def build_M(sol: BandMeanField, p: SystemParams) -> np.ndarray:
    """Six-by-six cavity-coupled q = 0 fluctuation matrix (non-Hermitian)."""
    d = derive(p)
    G = p.G_coll
    b0, g0, mu, I = sol.beta0, sol.gamma0, sol.mu, sol.I
    alpha = sol.alpha

    A = complex(-p.delta_c + 2.0 * b0 * g0 * p.N * d.u, -p.kappa)
    wb = 2.0 * G - mu
    wc = OMEGA_M + G * (2.0 + g0 * g0) - mu
    C = 2.0 * G * b0 * g0
    B = d.u * I + 2.0 * C
    Ac = G * (1.0 + g0 * g0 / 2.0)
    root_N = math.sqrt(p.N)
    cb = d.u * root_N * g0   # coupling to the homogeneous component
    cc = d.u * root_N * b0   # coupling to the density-wave component
    ac, acc = alpha.conjugate(), alpha

    return np.array([
        [A,          0.0,        cb * acc,   cb * acc,   cc * acc,   cc * acc],
        [0.0,       -A.conjugate(), -cb * ac, -cb * ac,  -cc * ac,  -cc * ac],
        [cb * ac,    cb * acc,   wb,         G,          B,          C],
        [-cb * ac,  -cb * acc,  -G,         -wb,        -C,         -B],
        [cc * ac,    cc * acc,   B,          C,          wc,         Ac],
        [-cc * ac,  -cc * acc,  -C,         -B,         -Ac,        -wc],
    ], dtype=complex)


def goldstone_vector(sol: BandMeanField) -> np.ndarray:
    """Exact null vector of the q = 0 matrix from atomic U(1) phase symmetry."""
    v = np.array([0.0, 0.0, sol.beta0, -sol.beta0, sol.gamma0, -sol.gamma0],
                 dtype=complex)
    return v / np.linalg.norm(v)


def _weights(vector: np.ndarray) -> tuple[float, float]:
    v = vector / np.linalg.norm(vector)
    cavity = float(abs(v[0]) ** 2 + abs(v[1]) ** 2)
    c_mode = float(abs(v[4]) ** 2 + abs(v[5]) ** 2)
    return cavity, c_mode


def _weights_q(vector: np.ndarray) -> float:
    v = vector / np.linalg.norm(vector)
    return float(abs(v[2]) ** 2 + abs(v[3]) ** 2)


def band_structure(sol: BandMeanField, p: SystemParams, q_grid) -> list[SpectrumPoint]:
    """Positive-frequency bands over a quasimomentum grid plus the q = 0
    cavity-dressed point."""
    points: list[SpectrumPoint] = []
    for q in np.asarray(q_grid, dtype=float):
        dec = eig_dense(build_Lq(sol, float(q), p))
        for w, v in zip(dec.eigenvalues, dec.eigenvectors.T):
            if w.real <= 0.0:
                continue
            points.append(SpectrumPoint(
                q=float(q), omega=complex(w), vector=np.array(v),
                cavity_weight=0.0, c_weight=_weights_q(np.array(v)),
            ))
    points.extend(optomech_mode(sol, p))
    return points


def optomech_mode(sol: BandMeanField, p: SystemParams) -> list[SpectrumPoint]:
    """Cavity-selected density-wave eigenmode of the q = 0 matrix.

    Picks the positive-real-part eigenpair with maximal c-mode weight.  If a
    second candidate lies within 1% of that weight the selection is
    ambiguous and both points are returned with two_mode set.
    """
    dec = eig_dense(build_M(sol, p))
    candidates = []
    for w, v in zip(dec.eigenvalues, dec.eigenvectors.T):
        if w.real <= 0.0:
            continue
        vec = np.array(v)
        cavity, c_mode = _weights(vec)
        candidates.append(SpectrumPoint(q=None, omega=complex(w), vector=vec,
                                        cavity_weight=cavity, c_weight=c_mode))
    if not candidates:
        raise RuntimeError("no positive-frequency eigenvalue of the q=0 matrix")
    candidates.sort(key=lambda pt: -pt.c_weight)
    best = candidates[0]
    if len(candidates) > 1 and candidates[1].c_weight > 0.99 * best.c_weight:
        pair = [best, candidates[1]]
        for pt in pair:
            pt.two_mode = True
        return pair
    return [best]


def track_modes(sweeps: list[list[SpectrumPoint]], min_overlap: float = 0.5
                ) -> list[list[SpectrumPoint]]:
    """Assign track ids across an ordered sweep by eigenvector overlap.

    Each point is matched to the previous sweep step's point of maximal
    |<v_prev | v_new>| (greedy one-to-one).  Overlap below min_overlap
    starts a new track, so continuation follows mode character rather than
    energy order.
    """
    tracked: list[list[SpectrumPoint]] = []
    next_track = 0
    prev: list[SpectrumPoint] = []
    for step in sweeps:
        new_step = [replace(pt, track=None) for pt in step]
        if prev:
            overlap = np.zeros((len(prev), len(new_step)))
            for i, a in enumerate(prev):
                va = a.vector / np.linalg.norm(a.vector)
                for j, b in enumerate(new_step):
                    vb = b.vector / np.linalg.norm(b.vector)
                    overlap[i, j] = abs(np.vdot(va, vb))
            used_prev: set[int] = set()
            used_new: set[int] = set()
            order = np.dstack(np.unravel_index(np.argsort(-overlap, axis=None),
                                               overlap.shape))[0]
            for i, j in order:
                if i in used_prev or j in used_new:
                    continue
                if overlap[i, j] < min_overlap:
                    break
                new_step[j].track = prev[i].track
                used_prev.add(int(i))
                used_new.add(int(j))
        for pt in new_step:
            if pt.track is None:
                pt.track = next_track
                next_track += 1
        next_track = max(next_track, max(pt.track for pt in new_step) + 1)
        tracked.append(new_step)
        prev = new_step
    return tracked
