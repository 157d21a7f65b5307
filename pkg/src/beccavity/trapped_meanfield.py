"""Cavity-coupled Gross-Pitaevskii ground state of a harmonically trapped
condensate on a real-space grid.

The condensate wave function psi(x) is real, even and normalized to one
(trapezoid rule).  The stationary problem solved self-consistently is

    mu psi = [ -(1/(2 pi)^2) d^2/dx^2 + V_tr x^2 + gN psi^2
               + U0 |alpha|^2 cos^2(2 pi x) ] psi
    alpha  = eta / (i kappa + (Delta_c - U0 N Integral[cos^2(2 pi x) psi^2]))

with Delta_c = delta_c + N U0 / 2.  The grid carries Dirichlet walls; the
box must be large enough that the wave function at the wall is below 1e-8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import SolverError
from .params import KINETIC_PREFACTOR, WAVENUMBER, SystemParams
from .sweep_table import SweepTable


@dataclass(frozen=True)
class Grid1D:
    """Uniform symmetric grid including the Dirichlet wall nodes."""

    n_points: int
    half_width: float
    h: float
    x: np.ndarray = field(repr=False)

    @property
    def x_interior(self) -> np.ndarray:
        return self.x[1:-1]

    @property
    def n_interior(self) -> int:
        return self.n_points - 2


def make_grid(n_points: int, half_width: float) -> Grid1D:
    if n_points < 5:
        raise ValueError("n_points must be at least 5")
    if n_points % 2 == 0:
        raise ValueError("n_points must be odd so the grid contains x = 0")
    x = np.linspace(-half_width, half_width, n_points)
    h = x[1] - x[0]
    return Grid1D(n_points=n_points, half_width=half_width, h=h, x=x)


def tf_radius_estimate(p: SystemParams) -> float:
    """Analytic Thomas-Fermi radius sqrt(mu/V_tr), mu from
    (4/3) mu^(3/2) V_tr^(-1/2) = gN.  Zero when gN = 0."""
    if p.gN <= 0.0 or p.V_tr <= 0.0:
        return 0.0
    mu = (0.75 * p.gN * math.sqrt(p.V_tr)) ** (2.0 / 3.0)
    return math.sqrt(mu / p.V_tr)


def oscillator_length(p: SystemParams) -> float:
    """Harmonic-oscillator length 1/sqrt(2 pi sqrt(V_tr))."""
    if p.V_tr <= 0.0:
        raise ValueError("V_tr must be positive for a trapped grid")
    return 1.0 / math.sqrt(2.0 * math.pi * math.sqrt(p.V_tr))


def default_grid(p: SystemParams, half_width: float | None = None,
                 points_per_lambda: int | None = None) -> Grid1D:
    """Grid sized from the cloud: half-width max(2.4 R_TF, 6.5 a_ho).

    The spacing divides the lattice period lambda/2 exactly (even points
    per wavelength) so period-commensurate window averages are exact.
    """
    r_tf = tf_radius_estimate(p)
    if half_width is None:
        half_width = max(2.4 * r_tf, 6.5 * oscillator_length(p))
    elif r_tf > 0.0 and half_width < 2.0 * r_tf:
        raise ValueError(
            f"half_width {half_width} below twice the Thomas-Fermi radius {r_tf:.3f}"
        )
    if points_per_lambda is None:
        points_per_lambda = max(40, 4 * math.ceil(100.0 / half_width))
    if points_per_lambda % 4:
        raise ValueError("points_per_lambda must be a multiple of 4")
    m = round(half_width * points_per_lambda)
    return make_grid(2 * m + 1, m / points_per_lambda)


@dataclass
class CondensateProfile:
    """Converged condensate wave function with its cavity state."""

    grid: Grid1D
    psi: np.ndarray            # real, includes zero wall nodes
    mu: float
    alpha: complex
    I: float
    cos2_overlap: float        # Integral[cos^2(2 pi x) psi^2]
    norm_residual: float
    gpe_residual: float
    energies: dict
    params_hash: str
    energy_history: np.ndarray = field(default=None, repr=False)
    iterations: int = 0


def _hamiltonian_diagonals(grid: Grid1D, potential: np.ndarray):
    """(lower, diag, upper) of the interior kinetic+potential operator."""
    inv_h2 = 1.0 / (grid.h * grid.h)
    n = grid.n_interior
    diag = 2.0 * KINETIC_PREFACTOR * inv_h2 + potential
    off = -KINETIC_PREFACTOR * inv_h2 * np.ones(n - 1)
    return off, diag, off


def _apply_h(grid: Grid1D, potential: np.ndarray, psi_in: np.ndarray) -> np.ndarray:
    lo, di, up = _hamiltonian_diagonals(grid, potential)
    out = di * psi_in
    out[:-1] += up * psi_in[1:]
    out[1:] += lo * psi_in[:-1]
    return out


def cavity_amplitude(p: SystemParams, cos2_overlap: float) -> complex:
    """Steady cavity field for a given atomic cos^2 overlap."""
    detuning = p.Delta_c - p.U0 * p.N * cos2_overlap
    return p.eta / complex(detuning, p.kappa)


RESIDUAL_TARGET = 0.4e-8


class _Relaxer:
    """Imaginary-time relaxation machinery on one grid at fixed intensity."""

    def __init__(self, p: SystemParams, grid: Grid1D):
        self.p = p
        self.grid = grid
        self.x = grid.x_interior
        self.h = grid.h
        self.cos2 = np.cos(WAVENUMBER * self.x) ** 2
        self.v_trap = p.V_tr * self.x * self.x
        self.energy_history: list[float] = []
        self.iterations = 0

    def overlap(self, psi: np.ndarray) -> float:
        return self.h * float(self.cos2 @ (psi * psi))

    def potential(self, psi: np.ndarray, I: float) -> np.ndarray:
        return self.v_trap + self.p.gN * psi * psi + self.p.U0 * I * self.cos2

    def mu_and_residual(self, psi: np.ndarray, I: float) -> tuple[float, float]:
        h_psi = _apply_h(self.grid, self.potential(psi, I), psi)
        mu = self.h * float(psi @ h_psi)
        return mu, float(np.max(np.abs(h_psi - mu * psi)))

    def energy(self, psi: np.ndarray, I: float) -> dict:
        h2 = self.h
        kinetic = h2 * float(psi @ _apply_h(self.grid, np.zeros_like(self.x), psi))
        trap = h2 * float(self.v_trap @ (psi * psi))
        coll = 0.5 * self.p.gN * h2 * float((psi * psi) @ (psi * psi))
        opt = self.p.U0 * I * h2 * float(self.cos2 @ (psi * psi))
        return {"kinetic": kinetic, "trap": trap, "collision": coll, "optical": opt}

    def step(self, psi: np.ndarray, I: float, dtau: float, mu: float) -> np.ndarray:
        lo, di, up = _hamiltonian_diagonals(self.grid, self.potential(psi, I))
        ab = np.zeros((3, self.grid.n_interior))
        ab[0, 1:] = dtau * up
        ab[1, :] = 1.0 + dtau * (di - mu)
        ab[2, :-1] = dtau * lo
        psi_new = solve_banded((1, 1), ab, psi)
        return psi_new / math.sqrt(self.h * float(psi_new @ psi_new))

    def relax_fixed_intensity(self, psi: np.ndarray, I: float,
                              rel_target: float, n_max: int) -> tuple[np.ndarray, float, float]:
        """Propagate at fixed photon number until the residual target."""
        mu = 0.0
        residual = math.inf
        dtau = None
        e_prev = math.inf
        halvings = 0
        for _ in range(n_max):
            mu, residual = self.mu_and_residual(psi, I)
            if residual < rel_target * max(abs(mu), 1e-10):
                break
            if dtau is None:
                dtau = 0.1 / max(abs(mu), 1e-3)
            psi = self.step(psi, I, dtau, mu)
            self.iterations += 1
            en = self.energy(psi, I)
            total = sum(en.values())
            self.energy_history.append(total)
            if total > e_prev * (1.0 + 1e-12) and halvings < 40:
                dtau *= 0.5
                halvings += 1
            e_prev = total
        return psi, mu, residual


def _initial_psi(p: SystemParams, grid: Grid1D, psi0: np.ndarray | None) -> np.ndarray:
    x = grid.x_interior
    h = grid.h
    if psi0 is None:
        r_tf = tf_radius_estimate(p)
        if r_tf > 0.0:
            mu_tf = (0.75 * p.gN * math.sqrt(p.V_tr)) ** (2.0 / 3.0)
            psi = np.sqrt(np.maximum(mu_tf - p.V_tr * x * x, 0.0) / p.gN)
            psi = np.maximum(psi, 1e-12)
        else:
            a = oscillator_length(p)
            psi = np.exp(-0.5 * (x / a) ** 2)
    else:
        psi = np.asarray(psi0, dtype=float).copy()
        if psi.shape[0] == grid.n_points:
            psi = psi[1:-1]
    psi = 0.5 * (psi + psi[::-1])  # even ground state in a symmetric trap
    return psi / math.sqrt(h * float(psi @ psi))


def _joint_relaxation(p, rx, psi, alpha, budget, tol_mu, tol_alpha):
    """Per-step cavity update with adaptive under-relaxation (cold starts)."""
    mu, mu_prev = 0.0, math.inf
    mix = 1.0
    d_alpha_prev = 0.0 + 0.0j
    dtau = None
    best_joint = math.inf
    since_best = 0
    for _ in range(budget):
        I = abs(alpha) ** 2
        mu, residual = rx.mu_and_residual(psi, I)
        alpha_raw = cavity_amplitude(p, rx.overlap(psi))
        d_alpha = alpha_raw - alpha
        # a period-2 oscillation shows up as a direction reversal
        if (d_alpha * d_alpha_prev.conjugate()).real < 0.0:
            mix = max(0.002, 0.5 * mix)
        else:
            mix = min(1.0, 1.02 * mix)
        d_alpha_prev = d_alpha
        alpha = alpha + mix * d_alpha
        joint = residual / max(abs(mu), 1e-10) + abs(d_alpha)
        if (residual < RESIDUAL_TARGET * abs(mu)
                and abs(d_alpha) < tol_alpha * max(1.0, abs(alpha))
                and abs(mu - mu_prev) < tol_mu):
            return alpha, psi, True
        mu_prev = mu
        if joint < 0.5 * best_joint:
            best_joint, since_best = joint, 0
        else:
            since_best += 1
            if since_best > 1500:
                break  # cavity feedback not contracting: scalar fallback
        if dtau is None:
            dtau = 0.1 / max(abs(mu), 1e-3)
        psi = rx.step(psi, I, dtau, mu)
        rx.iterations += 1
    return alpha, psi, False


def _scalar_self_consistency(p, rx, psi, I_start, max_iter, tol_alpha, warm):
    """Solve |alpha(I)|^2 = I by damped iteration, bisecting on failure.

    The wave function is relaxed at fixed intensity inside each residual
    evaluation; warm starts use gentle damping so the iterate stays within
    the basin of the continuation branch.
    """
    def g_of(I, psi_in, rel_target):
        psi_out, _, _ = rx.relax_fixed_intensity(psi_in, I, rel_target, max_iter)
        a = cavity_amplitude(p, rx.overlap(psi_out))
        return abs(a) ** 2 - I, psi_out, a

    I = I_start
    s = 0.25 if warm else 0.5
    g_prev = math.inf
    alpha = 0.0 + 0.0j
    ok = False
    for _ in range(160):
        g, psi, alpha = g_of(I, psi, 1e-2 * RESIDUAL_TARGET)
        if abs(g) < 1e-10 * max(1.0, I):
            ok = True
            break
        if abs(g) > abs(g_prev):
            s = max(0.02, 0.5 * s)
        else:
            s = min(1.0 if not warm else 0.5, 1.2 * s)
        g_prev = g
        I = max(I + s * g, 0.0)
    if not ok:
        # bracket the nearest sign change of g and bisect
        I_scale = max(p.eta**2 / p.kappa**2, 1e-6)
        ga, _, _ = g_of(I, psi, 1e-6)
        step0 = max(0.05 * I, 1e-3 * I_scale)
        bracket = None
        for k in range(1, 40):
            for direction in (1.0, -1.0):
                I_try = I + direction * k * step0
                if I_try < 0:
                    continue
                gb, _, _ = g_of(I_try, psi, 1e-6)
                if (ga < 0) != (gb < 0):
                    bracket = (min(I, I_try), max(I, I_try))
                    break
            if bracket:
                break
        if not bracket:
            raise SolverError("cavity self-consistency failed to bracket")
        a_, b_ = bracket
        ga, _, _ = g_of(a_, psi, 1e-6)
        for _ in range(80):
            mid = 0.5 * (a_ + b_)
            gm, psi, alpha = g_of(mid, psi, 1e-8)
            if (ga < 0) != (gm < 0):
                b_ = mid
            else:
                a_, ga = mid, gm
            if abs(b_ - a_) < 1e-12 * max(1.0, abs(mid)):
                break
    # final tight joint polish at the converged intensity
    converged = False
    for _ in range(40):
        g, psi, alpha = g_of(abs(alpha) ** 2, psi, RESIDUAL_TARGET)
        if abs(g) < tol_alpha * max(1.0, abs(alpha) ** 2):
            converged = True
            break
    return alpha, psi, converged


def ground_state(p: SystemParams, grid: Grid1D | None = None,
                 psi0: np.ndarray | None = None, I0: float | None = None,
                 max_iter: int = 60000,
                 tol_mu: float = 1e-10, tol_alpha: float = 1e-10,
                 wall_tol: float = 1e-8) -> CondensateProfile:
    """Self-consistent ground state by imaginary-time propagation.

    Each backward-Euler step solves (1 + dtau (H[psi] - mu)) psi_new = psi
    with the banded interior operator, renormalizes, and refreshes the
    cavity field from the current density, under-relaxed adaptively when
    the cavity response oscillates.  Near cavity resonance the feedback
    loop gain can exceed one for any per-step mixing; the solver then falls
    back to a scalar self-consistency solve over the photon number, with
    the wave function relaxed at fixed intensity inside each evaluation.

    A warm start (I0 given, typically with psi0 from a neighbouring
    detuning) goes straight to the scalar solve with gentle damping: its
    basins are delimited by the unstable middle root, so continuation
    follows the hysteresis branch.  The fixed point is the discrete
    eigenpair, so the converged residual is solver-independent.
    """
    if p.V_tr <= 0.0:
        raise SolverError("trapped solver requires V_tr > 0")
    if grid is None:
        grid = default_grid(p)
    rx = _Relaxer(p, grid)
    h = grid.h
    psi = _initial_psi(p, grid, psi0)

    converged = False
    if p.eta == 0.0:
        alpha = 0.0 + 0.0j
        psi, mu, residual = rx.relax_fixed_intensity(psi, 0.0, RESIDUAL_TARGET, max_iter)
        converged = residual < RESIDUAL_TARGET * abs(mu)
    elif p.U0 == 0.0:
        alpha = cavity_amplitude(p, 0.5)  # overlap is irrelevant at U0 = 0
        psi, mu, residual = rx.relax_fixed_intensity(psi, abs(alpha) ** 2,
                                                     RESIDUAL_TARGET, max_iter)
        converged = residual < RESIDUAL_TARGET * abs(mu)
    else:
        alpha = cavity_amplitude(p, rx.overlap(psi))
        if I0 is None:
            alpha, psi, converged = _joint_relaxation(
                p, rx, psi, alpha, min(max_iter, 8000), tol_mu, tol_alpha)
        else:
            alpha = math.sqrt(max(I0, 0.0)) * (alpha / abs(alpha) if alpha else 1.0)
        if not converged:
            alpha, psi, converged = _scalar_self_consistency(
                p, rx, psi, abs(alpha) ** 2, max_iter, tol_alpha,
                warm=I0 is not None)

    I = abs(alpha) ** 2
    mu, residual = rx.mu_and_residual(psi, I)
    if not converged or residual > 1e-8 * abs(mu):
        raise SolverError(
            f"ground state not converged after {rx.iterations} iterations: "
            f"residual {residual:.3e}, |mu| {abs(mu):.3e}"
        )
    if max(abs(psi[0]), abs(psi[-1])) > wall_tol:
        raise SolverError(
            f"wave function at the wall is {max(abs(psi[0]), abs(psi[-1])):.2e}; "
            "enlarge the box half-width"
        )

    psi_full = np.zeros(grid.n_points)
    psi_full[1:-1] = psi
    norm_residual = abs(h * float(psi @ psi) - 1.0)
    return CondensateProfile(
        grid=grid, psi=psi_full, mu=mu, alpha=complex(alpha), I=I,
        cos2_overlap=rx.overlap(psi), norm_residual=norm_residual,
        gpe_residual=residual,
        energies=rx.energy(psi, I),
        params_hash=p.params_hash(),
        energy_history=np.asarray(rx.energy_history),
        iterations=rx.iterations,
    )


def measure_tf_radius(profile: CondensateProfile, threshold: float = 1e-3) -> float:
    """Half-width where the period-averaged density falls below
    threshold times its central value."""
    e, _, _ = decompose_envelope(profile)
    density = e * e
    center = density[profile.grid.n_points // 2]
    above = np.abs(profile.grid.x)[density >= threshold * center]
    return float(np.max(above)) if above.size else 0.0


def decompose_envelope(profile: CondensateProfile):
    """Split psi into slowly varying envelopes: psi ~ e + sqrt(2) cos(2kx) f.

    Sliding-window projection over one lattice period lambda/2: each window
    is least-squares fitted with a locally quadratic average plus a locally
    linear sqrt(2) cos(2kx) quadrature, so e(x) is the detrended local
    average and f(x) the modulation amplitude, free of slope leakage at the
    cloud edge.  Returns (e, f, reconstruction_error) with the error in the
    relative L2 sense.
    """
    x = profile.grid.x
    psi = profile.psi
    h = profile.grid.h
    m = round(0.5 / h)
    if abs(m * h - 0.5) > 1e-9 * max(1.0, 1.0 / h) or m % 2:
        raise ValueError("the lattice period 0.5 must span an even number of grid steps")
    t = (np.arange(m + 1) - m // 2) * h
    two_k = 2.0 * WAVENUMBER
    root2 = math.sqrt(2.0)
    basis = np.column_stack([
        np.ones_like(t), t, t * t,
        root2 * np.cos(two_k * t), root2 * np.sin(two_k * t),
        root2 * t * np.cos(two_k * t), root2 * t * np.sin(two_k * t),
    ])
    # rows of the pseudo-inverse act as sliding correlation kernels
    pinv = np.linalg.pinv(basis)
    pad = m // 2
    padded = np.pad(psi, (pad, m - pad), mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, m + 1)
    coef = windows @ pinv.T  # (n_points, 5)

    phase = two_k * x
    e = coef[:, 0]
    # psi ~ e + sqrt(2) f [cos(2kt) cos(2kx) - sin(2kt) sin(2kx)] in window
    # coordinates t = y - x, so the two quadrature coefficients recombine as
    f = coef[:, 3] * np.cos(phase) - coef[:, 4] * np.sin(phase)
    recon = e + math.sqrt(2.0) * np.cos(two_k * x) * f
    err = float(np.linalg.norm(psi - recon) / np.linalg.norm(psi))
    return e, f, err


def sweep_trapped(p: SystemParams, delta_grid, direction: str = "down",
                  grid: Grid1D | None = None,
                  return_profiles: bool = False):
    """Warm-started detuning sweep; direction picks the hysteresis branch.

    "up" visits the grid ascending, "down" descending; each point starts
    from the previous converged wave function and cavity field, so the two
    directions trace the two stable branches across the bistable region.
    """
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    delta_grid = np.sort(np.asarray(delta_grid, dtype=float))
    order = delta_grid if direction == "up" else delta_grid[::-1]
    if grid is None:
        grid = default_grid(p)

    table = SweepTable(swept="delta_c", params=p.to_dict())
    table.meta["params_hash"] = p.params_hash()
    table.meta["direction"] = direction
    cols = {"delta_c": [], "I": [], "mu": [], "cos2_overlap": [], "delta_c_eff": []}
    alphas = []
    profiles = []
    psi_warm = None
    I_warm = None
    for dc in order:
        pd = p.with_delta_c(float(dc))
        prof = ground_state(pd, grid=grid, psi0=psi_warm, I0=I_warm)
        psi_warm = prof.psi
        I_warm = prof.I
        cols["delta_c"].append(float(dc))
        cols["I"].append(prof.I)
        cols["mu"].append(prof.mu)
        cols["cos2_overlap"].append(prof.cos2_overlap)
        cols["delta_c_eff"].append(
            pd.delta_c - pd.U0 * pd.N * (prof.cos2_overlap - 0.5)
        )
        alphas.append(prof.alpha)
        if return_profiles:
            profiles.append(prof)
    for name, values in cols.items():
        table.add_column(name, values)
    table.add_complex_column("alpha", alphas)
    if return_profiles:
        return table, profiles
    return table
