"""Restricted two-mode radiation-pressure model of the BEC-cavity system.

The cavity mode couples to a single density-wave mode of the condensate
(bare frequency omega_M = 4 omega_R, coupling G = sqrt(2N) u).  S-wave
collisions enter through a Bogoliubov rescaling of the mode quadratures:
they stiffen the mechanical frequency and soften the coupling.

The conjugate quadrature is taken as Y = i(c^dag - c)/sqrt(2); the harmonic
form (X^2 + Y^2)/2 requires conjugate quadratures, so X and Y cannot be the
same combination.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.optimize import brentq

from .numerics import NumericsError, RootSet, solve_cubic_real
from .params import OMEGA_M, SystemParams, derive


@dataclass(frozen=True)
class EffectiveModel:
    """Collision-renormalized two-mode model parameters.

    chi = ((omega_M + 2 G_coll)/omega_M)^(1/4) >= 1 rescales the
    quadratures; omega_M_ren = sqrt(omega_M (omega_M + 2 G_coll)) and
    G_ren = G / chi.  omega_M_weak / G_weak are the first-order expansions
    kept for diagnostics.
    """

    omega_M: float
    G_coll: float
    G: float
    chi: float
    omega_M_ren: float
    G_ren: float
    omega_M_weak: float
    G_weak: float


def renormalize(omega_M: float, G_coll: float, G: float) -> EffectiveModel:
    """Collision renormalization of the mechanical frequency and coupling."""
    if omega_M <= 0:
        raise ValueError("omega_M must be positive")
    if G_coll < 0:
        raise ValueError("G_coll must be nonnegative")
    chi = ((omega_M + 2.0 * G_coll) / omega_M) ** 0.25
    return EffectiveModel(
        omega_M=omega_M,
        G_coll=G_coll,
        G=G,
        chi=chi,
        omega_M_ren=math.sqrt(omega_M * (omega_M + 2.0 * G_coll)),
        G_ren=G / chi,
        omega_M_weak=omega_M + G_coll,
        G_weak=(1.0 - G_coll / (2.0 * omega_M)) * G,
    )


def model_from_params(p: SystemParams) -> EffectiveModel:
    d = derive(p)
    return renormalize(OMEGA_M, p.G_coll, d.G)


def cubic_coefficients(model: EffectiveModel, p: SystemParams, delta_c: float):
    """Coefficients (a3, a2, a1, a0) of the photon-number cubic.

    Eliminating the static mode displacement <X> = -G_ren*I/omega_M_ren from
    the coupled steady state gives
    I * [(delta_c + G_ren^2/omega_M_ren * I)^2 + kappa^2] = eta^2,
    expanded below in descending powers of I.
    """
    b = model.G_ren**2 / model.omega_M_ren
    return (b * b, 2.0 * delta_c * b, delta_c**2 + p.kappa**2, -(p.eta**2))


def cubic_photon_number(model: EffectiveModel, p: SystemParams, delta_c: float) -> RootSet:
    """Real nonnegative photon-number roots, ascending.

    With three roots the middle one is unstable (S-curve rule).  Negative
    numerical roots are discarded with a warning.
    """
    a3, a2, a1, a0 = cubic_coefficients(model, p, delta_c)
    if a3 == 0.0:
        # no optomechanical nonlinearity: Lorentzian response
        out = RootSet()
        value = p.eta**2 / a1
        from .numerics import Root

        out.roots.append(Root(value, 0.0, (value, value)))
        return out
    roots = solve_cubic_real(a3, a2, a1, a0)
    kept = [r for r in roots if r.x >= -1e-12 * max(1.0, abs(r.x))]
    if len(kept) != len(roots):
        warnings.warn("discarded negative photon-number root(s)", stacklevel=2)
    for r in kept:
        r.x = max(r.x, 0.0)
    roots.roots = kept
    return roots


def stability_labels(n_roots: int) -> list[bool]:
    """Stable flags for ascending roots: the middle of three is unstable."""
    if n_roots == 3:
        return [True, False, True]
    return [True] * n_roots


def bistability_threshold(model: EffectiveModel, kappa: float) -> float:
    """Critical squared drive (8/(3 sqrt(3))) * omega_M_ren * kappa^3 / G_ren^2."""
    if model.G_ren == 0.0:
        raise NumericsError("no optomechanical nonlinearity: G_ren = 0")
    return (8.0 / (3.0 * math.sqrt(3.0))) * model.omega_M_ren * kappa**3 / model.G_ren**2


def _fold_drive(delta: float, b: float, kappa: float, sign: float) -> float:
    """Squared drive at which the cubic acquires a double root at detuning delta.

    The cubic reads F(I) = I [(b I + delta)^2 + kappa^2] - eta^2.  Setting
    F' = 0 with y = b I + delta gives 3 y^2 - 2 delta y + kappa^2 = 0, so
    folds exist for delta <= -sqrt(3) kappa, at
    y = (delta +/- sqrt(delta^2 - 3 kappa^2)) / 3 and I = (y - delta)/b.
    """
    disc = delta * delta - 3.0 * kappa * kappa
    if disc < 0:
        return math.nan
    y = (delta + sign * math.sqrt(disc)) / 3.0
    I = (y - delta) / b
    return I * (y * y + kappa * kappa)


def _count_roots(model: EffectiveModel, p: SystemParams, delta: float) -> int:
    return len(cubic_photon_number(model, p, delta))


def bistable_window(model: EffectiveModel, p: SystemParams):
    """Maximal detuning interval with three real photon-number roots.

    Returns (delta_lo, delta_hi) or None below threshold.  Endpoints are
    located on the fold curves (double-root condition) and then refined by
    bisection on the root count of the cubic, so near-threshold windows are
    resolved without root clustering.
    """
    if model.G_ren == 0.0 or p.eta == 0.0:
        return None
    b = model.G_ren**2 / model.omega_M_ren
    kappa = p.kappa
    eta_sq = p.eta**2
    delta_star = -math.sqrt(3.0) * kappa

    # above threshold iff the drive exceeds the fold drive at the cusp
    cusp = _fold_drive(delta_star, b, kappa, 1.0)
    if not (eta_sq > cusp):
        return None

    endpoints = []
    for sign in (1.0, -1.0):
        def h(delta, sign=sign):
            return _fold_drive(delta, b, kappa, sign) - eta_sq

        hi = delta_star
        lo = delta_star * 2.0
        for _ in range(200):
            if h(lo) > 0:
                break
            lo *= 2.0
        else:
            raise NumericsError("failed to bracket bistable window endpoint")
        endpoints.append(brentq(h, lo, hi, xtol=1e-13, rtol=8.9e-16))

    lo, hi = sorted(endpoints)
    mid = 0.5 * (lo + hi)
    if _count_roots(model, p, mid) != 3:
        return None

    # refine each endpoint by bisection on the root count
    width = hi - lo

    def refine(outer, inner):
        # `outer` is the fold estimate; the 3-root side lies toward `inner`
        step = math.copysign(max(1e-9 * abs(outer), 1e-9, 1e-6 * width), inner - outer)
        one_side, three_side = outer - step, outer + step
        for _ in range(60):
            if _count_roots(model, p, one_side) != 3:
                break
            one_side -= step
            step *= 2.0
        step = three_side - outer
        for _ in range(60):
            if _count_roots(model, p, three_side) == 3:
                break
            three_side += step
            step *= 2.0
        lo_, hi_ = one_side, three_side
        for _ in range(100):
            m = 0.5 * (lo_ + hi_)
            if _count_roots(model, p, m) == 3:
                hi_ = m
            else:
                lo_ = m
            if abs(hi_ - lo_) < 1e-12 * max(1.0, abs(m)):
                break
        return 0.5 * (lo_ + hi_)

    lo_ref = refine(lo, mid)
    hi_ref = refine(hi, mid)
    return (lo_ref, hi_ref)


def mean_displacement(model: EffectiveModel, I: float) -> float:
    """Static displacement of the renormalized quadrature at photon number I."""
    return -model.G_ren * I / model.omega_M_ren


def gamma0_sq_from_root(model: EffectiveModel, N: float, I: float) -> float:
    """Density-wave population |gamma0|^2 implied by a photon-number root.

    Valid in the linear regime: <X> = <X_ren>/chi and <X> = sqrt(2N) gamma0.
    """
    x = mean_displacement(model, I) / model.chi
    gamma0 = x / math.sqrt(2.0 * N)
    return gamma0 * gamma0
