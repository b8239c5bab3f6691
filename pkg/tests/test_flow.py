import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torsionflow.errors import ExtinctionReached, InsufficientSamples, NonCompatibleJ
from torsionflow.flow import (
    FlowConfig,
    FlowState,
    Sample,
    Trajectory,
    canonical_structure,
    dissipation_residual,
    distance_to_canonical,
    einstein_hilbert,
    flow_rhs,
    geometry,
    integrate,
    retract,
    sample,
)
from torsionflow.frame import J_CANONICAL, j_from_chart
from torsionflow.variation import Deformation, HomogeneousStructure, webster_variation

charts = st.tuples(st.floats(-0.4, 0.4), st.floats(-1.4, -0.7))


def perturbed(dist=0.3, s=1.0):
    """J on the b = -1 line at Frobenius distance ``dist`` from J_can (2a^2 + a^4 = dist^2)."""
    a = math.sqrt(math.sqrt(1 + dist**2) - 1)
    return FlowState(j_from_chart(a, -1.0), s)


# ---- canonical structure ----------------------------------------------------------------

def test_canonical_structure():
    c = canonical_structure()
    np.testing.assert_array_equal(c.J @ c.J, -np.eye(2))
    g = geometry(c)
    assert abs(g.A11) <= 1e-14 and g.W == pytest.approx(2, abs=1e-12)


@pytest.mark.parametrize("s", [0.25, 1.0, 3.0])
def test_canonical_family_geometry_and_energy(s):
    g = geometry(canonical_structure(s))
    assert g.W == pytest.approx(2 / s, rel=1e-12) and abs(g.A11) <= 1e-14
    energy, volume = einstein_hilbert(canonical_structure(s))
    assert energy == pytest.approx(4 * s, rel=1e-12)
    assert volume == pytest.approx(2 * s * s, rel=1e-12)


@given(charts, st.floats(0.2, 3.0))
def test_solver_residual_and_volume_scaling(chart, s):
    st1 = FlowState(j_from_chart(*chart), 1.0)
    sts = FlowState(j_from_chart(*chart), s)
    assert geometry(sts).residual <= 1e-12
    assert einstein_hilbert(sts)[1] == pytest.approx(s * s * einstein_hilbert(st1)[1], rel=1e-12)


# ---- right-hand side --------------------------------------------------------------------

def test_rhs_canonical():
    dJ, ds = flow_rhs(canonical_structure(), normalized=False)
    np.testing.assert_allclose(dJ, 0, atol=1e-14)
    assert ds == pytest.approx(-4)
    dJ, ds = flow_rhs(canonical_structure(2.5), normalized=True)
    np.testing.assert_allclose(dJ, 0, atol=1e-14)
    assert ds == 0


@given(charts, st.floats(0.3, 3.0))
def test_rhs_is_tangent_to_compatible_structures(chart, s):
    state = FlowState(j_from_chart(*chart), s)
    dJ, _ = flow_rhs(state)
    anti = dJ @ state.J + state.J @ dJ
    assert np.max(np.abs(anti)) <= 1e-10
    assert abs(np.trace(anti)) <= 1e-10


def test_retract():
    J = 1.3 * J_CANONICAL + np.array([[1e-3, 0], [0, 2e-3]])
    R = retract(J)
    np.testing.assert_allclose(R @ R, -np.eye(2), atol=1e-15)
    with pytest.raises(NonCompatibleJ):
        retract(np.eye(2))


# ---- integration ---------------------------------------------------------------------------

def test_linear_shrink_and_extinction():
    traj = integrate(canonical_structure(), FlowConfig(dt=1e-3, t_end=0.2))
    for s in traj.samples:
        assert abs(s.state.s - (1 - 4 * s.time)) <= 1e-10
    assert traj.final.time == pytest.approx(0.2)
    ext = integrate(canonical_structure(), FlowConfig(dt=1e-3, t_end=0.3))
    assert ext.halt_reason == "extinction"
    assert ext.extinction_time == pytest.approx(0.25, abs=1e-6)
    with pytest.raises(ExtinctionReached):
        integrate(canonical_structure(), FlowConfig(dt=1e-3, t_end=0.3), raise_on_extinction=True)


def test_normalized_canonical_is_fixed():
    traj = integrate(canonical_structure(), FlowConfig(normalized=True, dt=1e-2, t_end=1.0))
    for s in traj.samples:
        np.testing.assert_array_equal(s.state.J, J_CANONICAL)
        assert s.state.s == 1.0


def test_normalized_convergence_from_distance_point_three():
    start = perturbed(0.3)
    assert distance_to_canonical(start.J) == pytest.approx(0.3, abs=1e-12)
    traj = integrate(start, FlowConfig(normalized=True, dt=1e-2, t_end=5.0))
    d, t = traj.column("dist_can"), traj.times()
    assert np.all(np.diff(d) < 0)
    first = t[np.argmax(d < 1e-6)]
    assert d[-1] < 1e-6
    assert first == pytest.approx(3.15, abs=0.011)  # regression fixture (dt = 1e-2 and 5e-3 agree)


def test_samples_stay_compatible_and_times_increase():
    traj = integrate(perturbed(0.3), FlowConfig(dt=1e-3, t_end=0.1, record_every=7))
    times = traj.times()
    assert np.all(np.diff(times) > 0)
    for s in traj.samples:
        J = s.state.J
        assert np.max(np.abs(J @ J + np.eye(2))) <= 1e-10
        assert J[1, 0] > 0 and s.state.s > 0


@given(charts, st.floats(0.5, 2.0))
def test_energy_non_increasing(chart, s0):
    traj = integrate(FlowState(j_from_chart(*chart), s0), FlowConfig(dt=2e-3, t_end=0.04))
    E = traj.column("energy")
    assert np.all(np.diff(E) <= 1e-9)


def test_rk4_order():
    start, t_end = perturbed(0.3), 0.1
    ref = integrate(start, FlowConfig(dt=1e-2 / 8, t_end=t_end)).final.state
    errs = []
    for dt in (1e-2, 5e-3):
        fin = integrate(start, FlowConfig(dt=dt, t_end=t_end)).final.state
        errs.append(np.linalg.norm(fin.J - ref.J) + abs(fin.s - ref.s))
    assert 10 <= errs[0] / errs[1] <= 24


def test_scaling_equivariance():
    """(J(t/c), c s(t/c)) solves the flow from (J0, c s0)."""
    c, s0 = 2.0, 1.0
    J0 = perturbed(0.3).J
    small = integrate(FlowState(J0, s0), FlowConfig(dt=1e-3, t_end=0.1)).final.state
    big = integrate(FlowState(J0, c * s0), FlowConfig(dt=c * 1e-3, t_end=c * 0.1)).final.state
    assert np.max(np.abs(big.J - small.J)) <= 1e-8
    assert abs(big.s - c * small.s) <= 1e-8


# ---- dissipation ---------------------------------------------------------------------------

def test_dissipation_canonical_is_minus_sixteen():
    traj = integrate(canonical_structure(), FlowConfig(dt=1e-3, t_end=0.01))
    assert max(abs(r) for r in dissipation_residual(traj)) <= 1e-8
    s = traj.samples[0]
    predicted = -2 * (s.A_abs**2 + s.W**2) * s.volume
    assert predicted == pytest.approx(-16, abs=1e-8)
    dE = (traj.samples[1].energy - traj.samples[0].energy) / 1e-3
    assert dE == pytest.approx(-16, abs=1e-8)


def test_dissipation_perturbed_richardson():
    start = perturbed(0.3)
    worst = []
    for dt in (1e-3, 5e-4):
        traj = integrate(start, FlowConfig(dt=dt, t_end=0.02))
        worst.append(max(abs(r) for r in dissipation_residual(traj)))
    assert worst[0] <= 1e-4
    assert 3.2 <= worst[0] / worst[1] <= 4.8


def test_dissipation_flags_static_states():
    def static(state):
        base = sample(state)
        return Trajectory([Sample(0.1 * k, base.state, base.W, base.A_abs, base.energy, base.volume, base.dist_can) for k in range(3)])

    assert dissipation_residual(static(canonical_structure()))[0] == pytest.approx(16)
    with pytest.raises(InsufficientSamples):
        dissipation_residual(Trajectory(static(canonical_structure()).samples[:2]))


@given(charts, st.floats(0.5, 2.0))
def test_webster_variation_reproduces_dissipation(chart, s):
    """Plugging the flow's own velocity (E = A, eta = -W) into the Webster variation gives dE/dt."""
    state = FlowState(j_from_chart(*chart), s)
    g = geometry(state)
    vol = state.structure().volume()
    Wdot = complex(webster_variation(Deformation(g.A11, -g.W, HomogeneousStructure(state.structure())))).real
    dE = (Wdot - 4 * g.W**2) * vol  # d(W Vol) with dVol/dt = 4 eta Vol
    assert dE == pytest.approx(-2 * (g.A_abs**2 + g.W**2) * vol, abs=1e-8)


# ---- distance ----------------------------------------------------------------------------------

def test_distance_examples():
    assert distance_to_canonical(J_CANONICAL) == 0
    assert distance_to_canonical(-J_CANONICAL) == pytest.approx(2 * math.sqrt(2))
    J = j_from_chart(0.1, -1.0)  # c = 1.01
    assert distance_to_canonical(J) == pytest.approx(math.sqrt(2 * 0.01 + 0.01**2), rel=1e-14)
