"""
Tests for data models
"""

import pytest
from pydantic import ValidationError

from src.models.schemas import (
    GreenSection,
    LatticeSection,
    PrimeCoefficient,
    ProbeRow,
    RaySpec,
    RhoAuditEntry,
    RunConfig,
    Signature,
    ThetaSpec,
)


def test_run_config_creation():
    """Test creating a minimal intersect configuration"""
    config = RunConfig(d_k=3, F_poly=[1, -1, -1], m_range=[-1, 1, 2], v_list=[1.0])

    assert config.d_k == 3
    assert config.F_poly == [1, -1, -1]
    assert config.tol == 1e-8
    assert config.seed == 0
    assert config.green is None


def test_run_config_rejects_unknown_keys():
    with pytest.raises(ValidationError) as info:
        RunConfig.model_validate({"d_k": 3, "m_rnage": [1]})
    assert info.value.errors()[0]["loc"] == ("m_rnage",)


@pytest.mark.parametrize(
    "payload",
    [
        {"d_k": 3, "F_poly": [2, 0, -1]},
        {"d_k": 3, "F_poly": [1]},
        {"d_k": 3, "m_range": [1, 0]},
        {"d_k": 3, "v_list": [1.0, -0.5]},
        {"d_k": 3, "tol": 0},
    ],
)
def test_run_config_rejects_invalid_values(payload):
    with pytest.raises(ValidationError):
        RunConfig.model_validate(payload)


def test_ray_defaults_and_order():
    """Test the default ray and the requirement that |q| decreases"""
    ray = RaySpec()
    assert ray.q_start > ray.q_stop
    assert ray.samples == 13

    with pytest.raises(ValidationError, match="q_stop"):
        RaySpec(q_start=1e-4, q_stop=1e-2)


def test_green_section_shape():
    section = GreenSection(n=3, A=[[[1, 0]]], m=1, v=0.5, ray={"u": [[0.2, 0.1]]})
    assert section.ray.u == [[0.2, 0.1]]
    assert section.theta is None

    with pytest.raises(ValidationError, match="A must be"):
        GreenSection(n=4, A=[[[1, 0]]], m=1, v=0.5, ray={"u": [[0, 0], [0, 0]]})
    with pytest.raises(ValidationError, match="ray.u"):
        GreenSection(n=3, A=[[[1, 0]]], m=1, v=0.5)
    with pytest.raises(ValidationError, match="nonzero"):
        GreenSection(n=2, m=0, v=0.5)


def test_theta_spec_needs_xi_above_one():
    assert ThetaSpec().xi_v[0] == 2.0
    with pytest.raises(ValidationError):
        ThetaSpec(xi_v=[2.0, 1.0])


def test_lattice_section_entry_count():
    section = LatticeSection(rank=2, entries=[[0, 0], [1, 0], [1, 0], [0, 0]], counts=[1, 2])
    assert section.decompose is True
    assert section.ind == []

    with pytest.raises(ValidationError, match="rank"):
        LatticeSection(rank=2, entries=[[1, 0]])
    with pytest.raises(ValidationError, match="pair"):
        LatticeSection(rank=1, entries=[[1, 0, 0]])


def test_signature():
    sig = Signature(pos=2, neg=1)
    assert sig.rank == 3
    assert sig.as_tuple() == (2, 1)
    with pytest.raises(ValidationError):
        Signature(pos=-1, neg=0)


def test_report_models_serialize():
    """Test that report rows dump to plain JSON types"""
    coefficient = PrimeCoefficient(prime=5, coefficient="1/3", value=0.536479304144)
    assert coefficient.model_dump(mode="json")["coefficient"] == "1/3"

    entry = RhoAuditEntry(label="ideal[0]", norm="1/5", rho=0)
    assert entry.model_dump()["factorization"] == []

    row = ProbeRow(abs_q=1e-3, xi=11.4, E_int=2e-4, E_bnd=-0.7, tail_bound=1e-9)
    assert row.flagged is False
    assert len(row.csv_values()) == 5
