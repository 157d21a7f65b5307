"""Steady-state mean-field branches of the homogeneous BEC-cavity system.

The condensate lives in the even zero-quasimomentum doublet: a homogeneous
component beta0 = cos(theta) and a density-wave component gamma0 =
sin(theta).  The three coupled steady-state conditions are

    alpha = eta / (i kappa + (delta_c - 2 N u beta0 gamma0))
    mu beta0  = u I gamma0 + G_coll (beta0^3 + 3 beta0 gamma0^2)
    mu gamma0 = 4 gamma0 + u I beta0 + G_coll (1.5 gamma0^3 + 3 beta0^2 gamma0)

with I = |alpha|^2.  Eliminating mu between the two atomic equations gives

    u I(theta) = beta0 gamma0 [4 + G_coll (2 beta0^2 - 1.5 gamma0^2)]
                 / (gamma0^2 - beta0^2)

and branch finding reduces to scanning the scalar residual
F(theta) = I(theta) [kappa^2 + (delta_c - 2 N u beta0 gamma0)^2] - eta^2,
which provably finds every branch (folds defeat naive fixed-point
iteration).  The elimination is re-verified against a damped-Newton solve
of the full four-unknown system in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .numerics import find_roots_scan
from .params import OMEGA_M, SystemParams, derive
from .sweep_table import SweepTable

# theta scan window; |gamma0| stays well below 1/sqrt(2) in the regime where
# the three-band truncation is valid, and I(theta) diverges at +-pi/4.
THETA_EDGE = math.pi / 4.0
THETA_MARGIN = 1e-6


@dataclass
class BandMeanField:
    """One steady-state branch of the homogeneous model."""

    theta: float
    beta0: float
    gamma0: float
    mu: float
    alpha: complex
    I: float
    label: str = "lower"
    stable: bool = True

    @property
    def gamma0_sq(self) -> float:
        return self.gamma0 * self.gamma0

    def residuals(self, p: SystemParams) -> tuple[float, float, float]:
        """Residuals of the three steady-state conditions (photon, b, c)."""
        d = derive(p)
        u = d.u
        b0, g0, mu, I = self.beta0, self.gamma0, self.mu, self.I
        G = p.G_coll
        r_photon = I * (p.kappa**2 + (p.delta_c - 2.0 * p.N * u * b0 * g0) ** 2) - p.eta**2
        r_b = mu * b0 - u * I * g0 - G * (b0**3 + 3.0 * b0 * g0**2)
        r_c = mu * g0 - OMEGA_M * g0 - u * I * b0 - G * (1.5 * g0**3 + 3.0 * b0**2 * g0)
        return r_photon, r_b, r_c


def photon_number_from_theta(theta: float, p: SystemParams) -> float:
    """Photon number I(theta) from the chemical-potential elimination.

    Negative values mark the non-physical side of the scan.
    """
    d = derive(p)
    if d.u == 0.0:
        raise SolverError("U0 = 0: photon number is not a function of theta")
    b0, g0 = math.cos(theta), math.sin(theta)
    denom = g0 * g0 - b0 * b0
    num = b0 * g0 * (OMEGA_M + p.G_coll * (2.0 * b0 * b0 - 1.5 * g0 * g0))
    return num / (denom * d.u)


def consistency_residual(theta: float, p: SystemParams) -> float:
    """Scalar steady-state residual F(theta); roots are mean-field branches."""
    d = derive(p)
    b0, g0 = math.cos(theta), math.sin(theta)
    I = photon_number_from_theta(theta, p)
    shifted = p.delta_c - 2.0 * p.N * d.u * b0 * g0
    return I * (p.kappa**2 + shifted * shifted) - p.eta**2


def _solution_from_theta(theta: float, p: SystemParams) -> BandMeanField:
    d = derive(p)
    b0, g0 = math.cos(theta), math.sin(theta)
    alpha = p.eta / complex(p.delta_c - 2.0 * p.N * d.u * b0 * g0, p.kappa)
    # store the photon number through the cavity route so |alpha|^2 = I
    # holds identically; at a root it agrees with the chemical-potential
    # elimination to the bisection width
    I = abs(alpha) ** 2
    mu = d.u * I * g0 / b0 + p.G_coll * (b0 * b0 + 3.0 * g0 * g0)
    return BandMeanField(theta=theta, beta0=b0, gamma0=g0, mu=mu, alpha=alpha, I=I)


def _undriven_solution(p: SystemParams) -> BandMeanField:
    alpha = p.eta / complex(p.delta_c, p.kappa)
    I = abs(alpha) ** 2
    return BandMeanField(theta=0.0, beta0=1.0, gamma0=0.0, mu=p.G_coll,
                         alpha=alpha, I=I)


def solve_branches(p: SystemParams, delta_c: float | None = None,
                   n_scan: int = 4096) -> list[BandMeanField]:
    """All steady-state branches at one detuning, sorted by photon number.

    With three branches they are labeled lower/middle/upper and the middle
    one is flagged unstable (S-curve rule).  Every returned solution is
    re-checked against the three steady-state conditions.
    """
    if delta_c is not None:
        p = p.with_delta_c(delta_c)
    d = derive(p)

    if p.eta == 0.0 or d.u == 0.0:
        # undriven cavity or no optical coupling: homogeneous condensate
        sols = [_undriven_solution(p)]
    else:
        roots = find_roots_scan(
            lambda t: consistency_residual(t, p),
            (-THETA_EDGE + THETA_MARGIN, THETA_EDGE - THETA_MARGIN),
            n_scan=n_scan,
            tol=0.0,  # refine brackets to machine width
        )
        if len(roots) == 0:
            raise SolverError("no steady state found: scan-range fault")
        sols = [_solution_from_theta(r.x, p) for r in roots]

    sols.sort(key=lambda s: s.I)
    if len(sols) == 3:
        for sol, label in zip(sols, ("lower", "middle", "upper")):
            sol.label = label
        sols[1].stable = False
    scale = max(abs(sols[-1].mu), OMEGA_M)
    for sol in sols:
        _, r_b, r_c = sol.residuals(p)
        if max(abs(r_b), abs(r_c)) > 1e-8 * scale:
            raise SolverError(
                f"steady state failed the independent residual check: {r_b:.3e}, {r_c:.3e}"
            )
    return sols


def bistable_window_band(p: SystemParams, delta_lo: float, delta_hi: float,
                         n_scan: int = 400) -> tuple[float, float] | None:
    """Detuning interval with three mean-field branches, by count bisection."""
    grid = np.linspace(delta_lo, delta_hi, n_scan)
    counts = [len(solve_branches(p, dc)) for dc in grid]
    three = [i for i, c in enumerate(counts) if c == 3]
    if not three:
        return None

    def bisect(i_one, i_three):
        a, b = grid[i_one], grid[i_three]
        for _ in range(80):
            m = 0.5 * (a + b)
            if len(solve_branches(p, m)) == 3:
                b = m
            else:
                a = m
            if abs(b - a) < 1e-10 * max(1.0, abs(m)):
                break
        return 0.5 * (a + b)

    lo = bisect(three[0] - 1, three[0]) if three[0] > 0 else grid[0]
    hi = bisect(three[-1] + 1, three[-1]) if three[-1] < len(grid) - 1 else grid[-1]
    return lo, hi


def sweep_branches(p: SystemParams, delta_grid) -> SweepTable:
    """All branches along a detuning grid, long format with track ids.

    Branch identity is connected across adjacent grid points by nearest-I
    matching (greedy one-to-one on |Delta I|).
    """
    delta_grid = np.asarray(delta_grid, dtype=float)
    table = SweepTable(swept="delta_c", params=p.to_dict())
    table.meta["params_hash"] = p.params_hash()

    cols: dict[str, list] = {
        "delta_c": [], "track": [], "label": [], "I": [],
        "gamma0_sq": [], "mu": [], "stable": [],
    }
    prev: list[tuple[int, float]] = []  # (track, I) at the previous point
    next_track = 0
    for dc in delta_grid:
        sols = solve_branches(p, dc)
        tracks = [-1] * len(sols)
        if prev:
            # greedy one-to-one nearest-I matching
            pairs = sorted(
                ((abs(s.I - pi), i, j) for i, s in enumerate(sols)
                 for j, (_, pi) in enumerate(prev)),
                key=lambda t: (t[0], t[1], t[2]),
            )
            used_new, used_old = set(), set()
            for _, i, j in pairs:
                if i in used_new or j in used_old:
                    continue
                tracks[i] = prev[j][0]
                used_new.add(i)
                used_old.add(j)
        for i in range(len(sols)):
            if tracks[i] < 0:
                tracks[i] = next_track
                next_track += 1
        prev = [(tracks[i], sols[i].I) for i in range(len(sols))]
        next_track = max(next_track, max(tracks) + 1)
        for i, s in enumerate(sols):
            cols["delta_c"].append(float(dc))
            cols["track"].append(tracks[i])
            cols["label"].append(s.label)
            cols["I"].append(s.I)
            cols["gamma0_sq"].append(s.gamma0_sq)
            cols["mu"].append(s.mu)
            cols["stable"].append(s.stable)
    for name, values in cols.items():
        table.add_column(name, values)
    return table
