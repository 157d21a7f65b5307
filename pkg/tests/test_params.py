import math

import pytest

from beccavity.params import (
    KINETIC_PREFACTOR, OMEGA_M, ParameterError,
    derive, load_config, parse_config, validate_params,
)

FIG1 = {"N": 6e4, "U0": 0.96, "eta": 549.5, "kappa": 363.9,
        "delta_c": -5120, "G_coll": 1}


def test_canonical_set_valid():
    p = validate_params(FIG1)
    assert p.N == 6e4 and p.delta_c == -5120


def test_undriven_limit_valid():
    p = validate_params({"N": 6e4, "U0": 0.96, "eta": 0, "kappa": 363.9,
                         "delta_c": 0, "G_coll": 0})
    assert p.eta == 0


def test_negative_atom_number_rejected():
    with pytest.raises(ParameterError, match="N must be positive"):
        validate_params({**FIG1, "N": -5})


@pytest.mark.parametrize("key,value", [
    ("kappa", 0.0), ("kappa", -1.0), ("eta", -1.0),
    ("G_coll", -0.5), ("gN", -1.0), ("V_tr", -0.1),
])
def test_domain_violations(key, value):
    with pytest.raises(ParameterError):
        validate_params({**FIG1, key: value})


def test_nonfinite_rejected():
    with pytest.raises(ParameterError, match="finite"):
        validate_params({**FIG1, "eta": float("nan")})


def test_missing_key():
    raw = dict(FIG1)
    del raw["kappa"]
    with pytest.raises(ParameterError, match="kappa"):
        validate_params(raw)


def test_both_detunings_ambiguous():
    with pytest.raises(ParameterError, match="ambiguous"):
        validate_params({**FIG1, "Delta_c": 1.0})


def test_unknown_key_rejected():
    with pytest.raises(ParameterError, match="unknown"):
        validate_params({**FIG1, "Kappa": 1.0})


def test_derive_u():
    p = validate_params(FIG1)
    d = derive(p)
    assert d.u == pytest.approx(0.96 / (2 * math.sqrt(2)), abs=1e-15)
    assert d.u == pytest.approx(0.3394113, abs=1e-7)


def test_derive_G():
    d = derive(validate_params(FIG1))
    assert d.G == pytest.approx(math.sqrt(2 * 6e4) * 0.96 / (2 * math.sqrt(2)), rel=1e-14)
    assert d.G == pytest.approx(117.575, abs=1e-3)


def test_delta_c_from_Delta_c():
    # Delta_c = -5120 + N U0 / 2 = 23680 must reproduce delta_c = -5120
    p = validate_params({"N": 6e4, "U0": 0.96, "eta": 549.5, "kappa": 363.9,
                         "Delta_c": 23680.0})
    assert p.delta_c == pytest.approx(-5120.0, abs=1e-9)
    assert p.detuning_input == "Delta_c"
    assert p.Delta_c == pytest.approx(23680.0)


def test_omega_M_is_four():
    assert OMEGA_M == 4.0


def test_kinetic_prefactor_unit_consistency():
    # lengths in lambda, hbar = 1: a plane wave with the optical wave
    # number must carry exactly one recoil of kinetic energy
    k = 2 * math.pi
    assert KINETIC_PREFACTOR * k**2 == pytest.approx(1.0, rel=1e-15)


def test_config_round_trip_bit_for_bit():
    p = validate_params(FIG1)
    text = "\n".join(f"{k} = {v!r}" for k, v in [
        ("N", p.N), ("U0", p.U0), ("eta", p.eta), ("kappa", p.kappa),
        ("delta_c", p.delta_c), ("G_coll", p.G_coll), ("gN", p.gN),
        ("V_tr", p.V_tr)])
    p2 = validate_params(parse_config(text))
    d1, d2 = derive(p), derive(p2)
    assert (d1.u, d1.G, d1.delta_c) == (d2.u, d2.G, d2.delta_c)
    assert p.to_dict() == p2.to_dict()


def test_config_parsing(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("# comment\nN = 6e4\nU0 = 0.96  # inline\neta=549.5\n"
                   "kappa = 363.9\ndelta_c = -5120\n")
    p = load_config(str(cfg))
    assert p.U0 == 0.96 and p.delta_c == -5120


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("N = 6e4\nbogus = 1\n")
    with pytest.raises(ParameterError, match="bogus"):
        load_config(str(cfg))


def test_config_overrides(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("N = 6e4\nU0 = 0.96\neta = 549.5\nkappa = 363.9\ndelta_c = -5120\n")
    p = load_config(str(cfg), {"G_coll": "2"})
    assert p.G_coll == 2.0
