"""Linearized excitations of the trapped condensate coupled to cavity
fluctuations.

The fluctuation vector is [da, da^dag, dPhi(x_1..x_M), dPhi^dag(x_1..x_M)]
over the M interior grid nodes, with the same sqrt(N) fluctuation scaling
as the homogeneous model, so in the homogeneous limit the blocks reduce
exactly to the q = 0 band matrix:

* cavity diagonal  -delta_c + U0 N (C - 1/2) - i kappa, with C the
  self-consistent cos^2 overlap of the profile;
* cavity-atom coupling kernel U0 sqrt(N) (cos^2(2 pi x) - 1/2) psi(x);
  removing the spatial mean of cos^2 keeps the N conserved-number shift
  inside the detuning instead of double counting it in the coupling;
* atomic Bogoliubov blocks [H - mu + 2 gN psi^2, gN psi^2;
  -gN psi^2, -(H - mu + 2 gN psi^2)] with H containing the trap and the
  optical potential U0 I cos^2, discretized with the same operator as the
  ground-state solve.

The trap is symmetric, so even and odd sectors decouple; the solver
diagonalizes them separately (identical spectrum to the full matrix, at a
quarter of the cost) and the measured cross-parity coupling of the
assembled matrix is reported with every solve.  Odd modes carry no cavity
weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .band_fluctuations import SpectrumPoint, track_modes
from .errors import SolverError
from .numerics import eig_dense, laplacian_1d, refine_smallest_eigenpair
from .params import KINETIC_PREFACTOR, WAVENUMBER, SystemParams
from .sweep_table import SweepTable
from .trapped_meanfield import CondensateProfile


@dataclass
class TrappedSpectrum:
    """Eigenmodes of one trapped profile with diagnostics.

    points holds the reported modes (lowest positive real parts, both
    parities unless restricted); eigenvalues_all the complete spectrum of
    the solved sectors.  checks carries the solve-time invariants: the
    symplectic pairing residual, the refined magnitude and phase-vector
    overlap of the zero mode, and the cross-parity coupling of the
    assembled matrix.
    """

    points: list[SpectrumPoint]
    eigenvalues_all: np.ndarray
    profile_hash: str
    h: float
    checks: dict = field(default_factory=dict)


def build_trapped_matrix(profile: CondensateProfile, p: SystemParams) -> np.ndarray:
    """Full (2M+2) x (2M+2) fluctuation matrix about a converged profile."""
    grid = profile.grid
    if profile.psi.shape[0] != grid.n_points:
        raise SolverError("profile and grid sizes do not match")
    x = grid.x_interior
    h = grid.h
    psi = profile.psi[1:-1]
    m = grid.n_interior
    cos2 = np.cos(WAVENUMBER * x) ** 2

    kin = -KINETIC_PREFACTOR * laplacian_1d(m, h)
    v_diag = p.V_tr * x * x + p.U0 * profile.I * cos2 + 2.0 * p.gN * psi * psi
    Hn = kin + np.diag(v_diag - profile.mu)
    An = np.diag(p.gN * psi * psi)

    a_cav = complex(-p.delta_c + p.U0 * p.N * (profile.cos2_overlap - 0.5), -p.kappa)
    g_vec = p.U0 * math.sqrt(p.N) * (cos2 - 0.5) * psi
    alpha = profile.alpha

    A = np.zeros((2 * m + 2, 2 * m + 2), dtype=complex)
    A[0, 0] = a_cav
    A[1, 1] = -a_cav.conjugate()
    A[0, 2:m + 2] = alpha * h * g_vec
    A[0, m + 2:] = alpha * h * g_vec
    A[1, 2:m + 2] = -alpha.conjugate() * h * g_vec
    A[1, m + 2:] = -alpha.conjugate() * h * g_vec
    A[2:m + 2, 0] = alpha.conjugate() * g_vec
    A[2:m + 2, 1] = alpha * g_vec
    A[m + 2:, 0] = -alpha.conjugate() * g_vec
    A[m + 2:, 1] = -alpha * g_vec
    A[2:m + 2, 2:m + 2] = Hn
    A[2:m + 2, m + 2:] = An
    A[m + 2:, 2:m + 2] = -An
    A[m + 2:, m + 2:] = -Hn
    return A


def _parity_indices(m: int):
    """Interior-node index arrays: (low half, mirrored high half, center)."""
    if m % 2 == 0:
        raise SolverError("parity split requires an odd interior count")
    c = (m - 1) // 2
    i_lo = np.arange(c)
    i_hi = m - 1 - i_lo
    return i_lo, i_hi, c


def _block_even_odd(B: np.ndarray, i_lo, i_hi, c):
    """Even and odd projections of an M x M atomic block, plus the largest
    cross-parity element (which must vanish for a symmetric problem)."""
    inv = 1.0 / math.sqrt(2.0)
    cols_e = np.empty((B.shape[0], c + 1), dtype=B.dtype)
    cols_e[:, :c] = (B[:, i_lo] + B[:, i_hi]) * inv
    cols_e[:, c] = B[:, c]
    cols_o = (B[:, i_lo] - B[:, i_hi]) * inv

    ee = np.empty((c + 1, c + 1), dtype=B.dtype)
    ee[:c, :] = (cols_e[i_lo, :] + cols_e[i_hi, :]) * inv
    ee[c, :] = cols_e[c, :]
    oo = (cols_o[i_lo, :] - cols_o[i_hi, :]) * inv
    oe = (cols_e[i_lo, :] - cols_e[i_hi, :]) * inv
    eo_max = float(np.max(np.abs(oe))) if oe.size else 0.0
    eo2 = np.empty((c + 1, c), dtype=B.dtype)
    eo2[:c, :] = (cols_o[i_lo, :] + cols_o[i_hi, :]) * inv
    eo2[c, :] = cols_o[c, :]
    cross = max(eo_max, float(np.max(np.abs(eo2))) if eo2.size else 0.0)
    return ee, oo, cross


def _vector_even(v, i_lo, i_hi, c):
    out = np.empty(c + 1, dtype=complex)
    out[:c] = (v[i_lo] + v[i_hi]) / math.sqrt(2.0)
    out[c] = v[c]
    return out


def _expand_even(ve, i_lo, i_hi, c, m):
    out = np.zeros(m, dtype=complex)
    out[i_lo] = ve[:c] / math.sqrt(2.0)
    out[i_hi] = ve[:c] / math.sqrt(2.0)
    out[c] = ve[c]
    return out


def _expand_odd(vo, i_lo, i_hi, c, m):
    out = np.zeros(m, dtype=complex)
    out[i_lo] = vo / math.sqrt(2.0)
    out[i_hi] = -vo / math.sqrt(2.0)
    return out


def _weights(vector: np.ndarray, m: int, h: float, test_profile: np.ndarray):
    w = np.concatenate(([1.0, 1.0], np.full(2 * m, h)))
    total = float(np.real(np.vdot(vector, w * vector)))
    cavity = float(abs(vector[0]) ** 2 + abs(vector[1]) ** 2) / total
    u = vector[2:m + 2]
    v = vector[m + 2:]
    t_norm = h * float(test_profile @ test_profile)
    at_norm = h * float(np.real(np.vdot(u, u) + np.vdot(v, v)))
    if at_norm > 0 and t_norm > 0:
        ov = (abs(h * np.dot(test_profile, u)) ** 2
              + abs(h * np.dot(test_profile, v)) ** 2) / (t_norm * at_norm)
    else:
        ov = 0.0
    return cavity, float(ov)


def spectrum(profile: CondensateProfile, p: SystemParams, n_report: int = 60,
             sectors: tuple = ("even", "odd"), parity_split: bool = True,
             re_min: float = 1e-6) -> TrappedSpectrum:
    """Dense spectrum of the trapped fluctuation matrix with labels.

    Reports the n_report lowest positive-frequency modes of the requested
    parity sectors, each with parity, cavity weight, decay rate Im(omega)
    and overlap with the cavity-selected density-wave profile
    cos(2.2pi.x) psi(x).
    """
    A = build_trapped_matrix(profile, p)
    grid = profile.grid
    m = grid.n_interior
    h = grid.h
    x = grid.x_interior
    psi = profile.psi[1:-1]
    test_profile = np.cos(2.0 * WAVENUMBER * x) * psi
    norm_A = float(np.linalg.norm(A, np.inf))

    points: list[SpectrumPoint] = []
    all_w = []
    checks: dict = {}

    if parity_split:
        i_lo, i_hi, c = _parity_indices(m)
        Hn = A[2:m + 2, 2:m + 2]
        An = A[2:m + 2, m + 2:]
        Hee, Hoo, cross_h = _block_even_odd(Hn, i_lo, i_hi, c)
        Aee, Aoo, cross_a = _block_even_odd(An, i_lo, i_hi, c)
        checks["cross_parity"] = max(cross_h, cross_a)
        g_row = A[0, 2:m + 2]
        g_even = _vector_even(g_row, i_lo, i_hi, c)
        g_odd = (g_row[i_lo] - g_row[i_hi]) / math.sqrt(2.0)
        checks["cross_parity"] = max(
            checks["cross_parity"],
            float(np.max(np.abs(g_odd))) if g_odd.size else 0.0,
        )
        me = c + 1

        if "even" in sectors:
            dim = 2 + 2 * me
            Ae = np.zeros((dim, dim), dtype=complex)
            Ae[0, 0] = A[0, 0]
            Ae[1, 1] = A[1, 1]
            col = A[2:m + 2, 0]
            col_e = _vector_even(col, i_lo, i_hi, c)
            colb = A[2:m + 2, 1]
            colb_e = _vector_even(colb, i_lo, i_hi, c)
            Ae[0, 2:2 + me] = _vector_even(A[0, 2:m + 2], i_lo, i_hi, c)
            Ae[0, 2 + me:] = _vector_even(A[0, m + 2:], i_lo, i_hi, c)
            Ae[1, 2:2 + me] = _vector_even(A[1, 2:m + 2], i_lo, i_hi, c)
            Ae[1, 2 + me:] = _vector_even(A[1, m + 2:], i_lo, i_hi, c)
            Ae[2:2 + me, 0] = col_e
            Ae[2:2 + me, 1] = colb_e
            Ae[2 + me:, 0] = _vector_even(A[m + 2:, 0], i_lo, i_hi, c)
            Ae[2 + me:, 1] = _vector_even(A[m + 2:, 1], i_lo, i_hi, c)
            Ae[2:2 + me, 2:2 + me] = Hee
            Ae[2:2 + me, 2 + me:] = Aee
            Ae[2 + me:, 2:2 + me] = -Aee
            Ae[2 + me:, 2 + me:] = -Hee
            dec = eig_dense(Ae)
            all_w.append(dec.eigenvalues)
            for wval, vec in zip(dec.eigenvalues, dec.eigenvectors.T):
                full = np.zeros(2 * m + 2, dtype=complex)
                full[0:2] = vec[0:2]
                full[2:m + 2] = _expand_even(vec[2:2 + me], i_lo, i_hi, c, m)
                full[m + 2:] = _expand_even(vec[2 + me:], i_lo, i_hi, c, m)
                cav, ov = _weights(full, m, h, test_profile)
                points.append(SpectrumPoint(q=None, omega=complex(wval), vector=full,
                                            cavity_weight=cav, c_weight=ov,
                                            parity="even", mode_overlap=ov))
            # refined zero mode lives in the even sector
            lam, vec = refine_smallest_eigenpair(Ae)
            full = np.zeros(2 * m + 2, dtype=complex)
            full[0:2] = vec[0:2]
            full[2:m + 2] = _expand_even(vec[2:2 + me], i_lo, i_hi, c, m)
            full[m + 2:] = _expand_even(vec[2 + me:], i_lo, i_hi, c, m)
            phase = np.zeros(2 * m + 2, dtype=complex)
            phase[2:m + 2] = psi
            phase[m + 2:] = -psi
            phase /= np.linalg.norm(phase)
            checks["zero_mode_abs"] = abs(lam)
            checks["zero_mode_overlap"] = float(
                abs(np.vdot(phase, full / np.linalg.norm(full))))

        if "odd" in sectors:
            mo = c
            dim = 2 * mo
            Ao = np.zeros((dim, dim), dtype=complex)
            Ao[:mo, :mo] = Hoo
            Ao[:mo, mo:] = Aoo
            Ao[mo:, :mo] = -Aoo
            Ao[mo:, mo:] = -Hoo
            dec = eig_dense(Ao)
            all_w.append(dec.eigenvalues)
            for wval, vec in zip(dec.eigenvalues, dec.eigenvectors.T):
                full = np.zeros(2 * m + 2, dtype=complex)
                full[2:m + 2] = _expand_odd(vec[:mo], i_lo, i_hi, c, m)
                full[m + 2:] = _expand_odd(vec[mo:], i_lo, i_hi, c, m)
                cav, ov = _weights(full, m, h, test_profile)
                points.append(SpectrumPoint(q=None, omega=complex(wval), vector=full,
                                            cavity_weight=cav, c_weight=ov,
                                            parity="odd", mode_overlap=ov))
    else:
        dec = eig_dense(A)
        all_w.append(dec.eigenvalues)
        for wval, vec in zip(dec.eigenvalues, dec.eigenvectors.T):
            u = vec[2:m + 2]
            even_part = float(np.linalg.norm(u + u[::-1]) ** 2)
            odd_part = float(np.linalg.norm(u - u[::-1]) ** 2)
            has_cavity = abs(vec[0]) ** 2 + abs(vec[1]) ** 2 > 1e-20
            parity = "even" if (even_part >= odd_part or has_cavity) else "odd"
            cav, ov = _weights(vec, m, h, test_profile)
            points.append(SpectrumPoint(q=None, omega=complex(wval), vector=np.array(vec),
                                        cavity_weight=cav, c_weight=ov,
                                        parity=parity, mode_overlap=ov))
        lam, vec = refine_smallest_eigenpair(A)
        phase = np.zeros(2 * m + 2, dtype=complex)
        phase[2:m + 2] = psi
        phase[m + 2:] = -psi
        phase /= np.linalg.norm(phase)
        checks["zero_mode_abs"] = abs(lam)
        checks["zero_mode_overlap"] = float(
            abs(np.vdot(phase, vec / np.linalg.norm(vec))))

    eigenvalues_all = np.concatenate(all_w)
    order = np.lexsort((eigenvalues_all.imag, eigenvalues_all.real))
    eigenvalues_all = eigenvalues_all[order]

    # symplectic pairing: every omega has -conj(omega) somewhere in the set
    from scipy.spatial import cKDTree

    pts_re_im = np.column_stack((eigenvalues_all.real, eigenvalues_all.imag))
    tree = cKDTree(pts_re_im)
    mirrored = np.column_stack((-eigenvalues_all.real, eigenvalues_all.imag))
    dists, _ = tree.query(mirrored)
    checks["pairing_residual"] = float(np.max(dists))
    checks["matrix_norm"] = norm_A

    positive = [pt for pt in points if pt.omega.real > re_min]
    positive.sort(key=lambda pt: pt.omega.real)
    return TrappedSpectrum(points=positive[:n_report],
                           eigenvalues_all=eigenvalues_all,
                           profile_hash=profile.params_hash,
                           h=h, checks=checks)


def identify_optomech_track(spectra: list[TrappedSpectrum], delta_grid,
                            two_mode_ratio: float = 0.25) -> SweepTable:
    """Cavity-selected mode along a sweep: per point the even mode with
    maximal cavity weight, stitched into tracks by eigenvector overlap.

    A point is flagged two-mode when the runner-up cavity weight exceeds
    two_mode_ratio of the leader (several condensate excitations share the
    cavity near avoided crossings).
    """
    even_sets = [[pt for pt in spec.points if pt.parity == "even"]
                 for spec in spectra]
    tracked = track_modes(even_sets)
    table = SweepTable(swept="delta_c")
    cols = {"delta_c": [], "track_id": [], "re_omega": [], "im_omega": [],
            "parity": [], "cavity_weight": [], "flag_two_mode": []}
    for dc, modes in zip(np.asarray(delta_grid, dtype=float), tracked):
        if not modes:
            continue
        ranked = sorted(modes, key=lambda pt: -pt.cavity_weight)
        best = ranked[0]
        two_mode = (len(ranked) > 1
                    and ranked[1].cavity_weight > two_mode_ratio * best.cavity_weight)
        cols["delta_c"].append(float(dc))
        cols["track_id"].append(int(best.track))
        cols["re_omega"].append(best.omega.real)
        cols["im_omega"].append(best.omega.imag)
        cols["parity"].append(best.parity)
        cols["cavity_weight"].append(best.cavity_weight)
        cols["flag_two_mode"].append(bool(two_mode))
    for name, values in cols.items():
        table.add_column(name, values)
    return table


def spectrum_sweep_table(spectra: list[TrappedSpectrum], delta_grid) -> SweepTable:
    """Long-format table of all reported even modes with track ids."""
    even_sets = [[pt for pt in spec.points if pt.parity == "even"]
                 for spec in spectra]
    tracked = track_modes(even_sets)
    table = SweepTable(swept="delta_c")
    cols = {"delta_c": [], "track_id": [], "re_omega": [], "im_omega": [],
            "parity": [], "cavity_weight": [], "flag_two_mode": []}
    for dc, modes in zip(np.asarray(delta_grid, dtype=float), tracked):
        if not modes:
            continue
        ranked = sorted(modes, key=lambda pt: -pt.cavity_weight)
        leader = ranked[0].cavity_weight if ranked else 0.0
        second = ranked[1].cavity_weight if len(ranked) > 1 else 0.0
        flag = second > 0.25 * leader if leader > 0 else False
        for pt in modes:
            cols["delta_c"].append(float(dc))
            cols["track_id"].append(int(pt.track))
            cols["re_omega"].append(pt.omega.real)
            cols["im_omega"].append(pt.omega.imag)
            cols["parity"].append(pt.parity)
            cols["cavity_weight"].append(pt.cavity_weight)
            cols["flag_two_mode"].append(bool(flag))
    for name, values in cols.items():
        table.add_column(name, values)
    return table
