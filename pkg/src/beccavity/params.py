"""Unit system and validated parameter records shared by every solver.

Units: frequencies in recoil units (omega_R = 1), lengths in optical
wavelengths (lambda = 1, so the cavity wave number is k = 2*pi) and
hbar = 1.  In these units the kinetic operator is -(1/(2*pi)**2) d^2/dx^2
and the effective atomic mass is m = 2*pi**2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, replace

# Recoil frequency: the unit of all frequencies/energies in this package.
OMEGA_R = 1.0
# Bare frequency of the cavity-selected density-wave mode, in recoil units.
OMEGA_M = 4.0 * OMEGA_R
# Optical wave number with lambda = 1.
WAVENUMBER = 2.0 * math.pi
# Prefactor of -d^2/dx^2 in the kinetic operator (hbar = 1, m = 2*pi^2).
KINETIC_PREFACTOR = OMEGA_R / WAVENUMBER**2

#: Config keys accepted by parse_config / validate_params.
CONFIG_KEYS = ("N", "U0", "eta", "kappa", "delta_c", "Delta_c", "G_coll", "gN", "V_tr")


class ParameterError(ValueError):
    """Invalid or inconsistent physical parameters."""


@dataclass(frozen=True)
class SystemParams:
    """Validated physical constants, immutable after construction.

    Attributes
    ----------
    N : float
        Atom number.
    U0 : float
        Per-photon light shift (omega_R).
    eta : float
        Cavity drive amplitude (omega_R).
    kappa : float
        Cavity half linewidth (omega_R).
    delta_c : float
        Shifted cavity detuning (omega_R).  Authoritative unless the record
        was built from Delta_c.
    G_coll : float
        Collision parameter of the homogeneous three-band model (omega_R).
    gN : float
        Real-space collision parameter g*N of the trapped model
        (omega_R * lambda).
    V_tr : float
        Harmonic trap curvature (omega_R / lambda^2).
    detuning_input : str
        Which detuning key was supplied ("delta_c" or "Delta_c").
    """

    N: float
    U0: float
    eta: float
    kappa: float
    delta_c: float
    G_coll: float = 0.0
    gN: float = 0.0
    V_tr: float = 0.0
    detuning_input: str = "delta_c"

    @property
    def Delta_c(self) -> float:
        """Bare drive-cavity detuning, Delta_c = delta_c + N*U0/2."""
        return self.delta_c + self.N * self.U0 / 2.0

    def with_delta_c(self, delta_c: float) -> "SystemParams":
        """Copy with a different shifted detuning (used by sweeps)."""
        return replace(self, delta_c=float(delta_c), detuning_input="delta_c")

    def to_dict(self) -> dict:
        return asdict(self)

    def params_hash(self) -> str:
        """Short deterministic hash of the physical content."""
        import hashlib

        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class DerivedParams:
    """Quantities recomputed deterministically from SystemParams.

    u = U0/(2*sqrt(2)) is the two-mode optical coupling per photon,
    G = sqrt(2N)*u the collective coupling, omega_M = 4*omega_R the bare
    mechanical frequency of the density-wave mode.
    """

    u: float
    G: float
    omega_M: float
    delta_c: float


def _require_finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} is not a number: {value!r}") from exc
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return value


def validate_params(raw: dict) -> SystemParams:
    """Validate a key-value record into a SystemParams.

    Mandatory keys: N, U0, eta, kappa and exactly one of delta_c / Delta_c.
    Optional (default 0): G_coll, gN, V_tr.  Unknown keys are errors.
    """
    unknown = set(raw) - set(CONFIG_KEYS)
    if unknown:
        raise ParameterError(f"unknown parameter keys: {sorted(unknown)}")

    for key in ("N", "U0", "eta", "kappa"):
        if key not in raw:
            raise ParameterError(f"missing mandatory key: {key}")

    has_small = "delta_c" in raw
    has_big = "Delta_c" in raw
    if has_small and has_big:
        raise ParameterError("both delta_c and Delta_c supplied: ambiguous detuning")
    if not (has_small or has_big):
        raise ParameterError("missing detuning: supply delta_c or Delta_c")

    N = _require_finite("N", raw["N"])
    U0 = _require_finite("U0", raw["U0"])
    eta = _require_finite("eta", raw["eta"])
    kappa = _require_finite("kappa", raw["kappa"])
    G_coll = _require_finite("G_coll", raw.get("G_coll", 0.0))
    gN = _require_finite("gN", raw.get("gN", 0.0))
    V_tr = _require_finite("V_tr", raw.get("V_tr", 0.0))

    if N <= 0:
        raise ParameterError("N must be positive")
    if kappa <= 0:
        raise ParameterError("kappa must be positive")
    if eta < 0:
        raise ParameterError("eta must be nonnegative")
    if G_coll < 0:
        raise ParameterError("G_coll must be nonnegative")
    if gN < 0:
        raise ParameterError("gN must be nonnegative")
    if V_tr < 0:
        raise ParameterError("V_tr must be nonnegative")

    if has_small:
        delta_c = _require_finite("delta_c", raw["delta_c"])
        detuning_input = "delta_c"
    else:
        Delta_c = _require_finite("Delta_c", raw["Delta_c"])
        delta_c = Delta_c - N * U0 / 2.0
        detuning_input = "Delta_c"

    return SystemParams(
        N=N, U0=U0, eta=eta, kappa=kappa, delta_c=delta_c,
        G_coll=G_coll, gN=gN, V_tr=V_tr, detuning_input=detuning_input,
    )


def derive(p: SystemParams) -> DerivedParams:
    """Deterministic derived quantities: u, G, omega_M and delta_c."""
    u = p.U0 / (2.0 * math.sqrt(2.0))
    G = math.sqrt(2.0 * p.N) * u
    return DerivedParams(u=u, G=G, omega_M=OMEGA_M, delta_c=p.delta_c)


def parse_config(text: str) -> dict:
    """Parse `key = value` lines into a raw dict.  '#' starts a comment.

    Unknown keys are rejected here (not just in validate_params) so typos in
    config files fail loudly.
    """
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParameterError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ParameterError(f"line {lineno}: unknown parameter key {key!r}")
        if key in raw:
            raise ParameterError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = _require_finite(key, value)
    return raw


def load_config(path: str, overrides: dict | None = None) -> SystemParams:
    """Read a config file, apply overrides, and validate."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = parse_config(fh.read())
    if overrides:
        for key, value in overrides.items():
            if key not in CONFIG_KEYS:
                raise ParameterError(f"unknown override key {key!r}")
            raw[key] = _require_finite(key, value)
    return validate_params(raw)
