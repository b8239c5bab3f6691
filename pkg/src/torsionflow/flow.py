"""The torsion flow on left-invariant structures of SU(2).

With theta = s sigma^3 fixed in direction, a left-invariant state is the pair
(J, s): J is the 2x2 complex structure in the contact basis (e1, -e2) and s
the contact-form scale.  The flow

    dJ/dt = 2 A_{J,theta},    d theta/dt = -2 W theta

becomes the ODE  dJ/dt = 2 A(J, s),  ds/dt = -2 W(J, s) s.  The normalized
flow keeps the volume fixed; for homogeneous states W equals its own average,
so the theta equation freezes (ds = 0) and only J moves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ExtinctionReached, InsufficientSamples, NonCompatibleJ, StepUnstable
from .frame import (
    J_CANONICAL,
    LeftInvariantStructure,
    PseudohermitianGeometry,
    adapted_coframe,
    sigma,
    solve_structure_equations,
    su2,
    torsion_endomorphism,
)

SU2 = su2()
J_UNSTABLE = 1e6
TANGENCY_TOL = 1e-8


@dataclass(frozen=True)
class FlowState:
    J: np.ndarray
    s: float
    time: float = 0.0

    def __post_init__(self):
        J = np.array(self.J, dtype=float)
        J.setflags(write=False)
        object.__setattr__(self, "J", J)
        if not self.s > 0:
            raise ValueError("contact-form scale must be positive")

    def structure(self) -> LeftInvariantStructure:
        return LeftInvariantStructure(SU2, self.s * sigma(3), self.J)

    @property
    def chart(self) -> tuple[float, float, float]:
        return float(self.J[0, 0]), float(self.J[0, 1]), float(self.J[1, 0])


@dataclass(frozen=True)
class FlowConfig:
    normalized: bool = False
    dt: float = 1e-3
    t_end: float = 1.0
    retraction_tolerance: float = 1e-10
    extinction_guard: float = 1e-6
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.extinction_guard > 0:
            raise ValueError("extinction_guard must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class Sample:
    time: float
    state: FlowState
    W: float
    A_abs: float
    energy: float
    volume: float
    dist_can: float


@dataclass
class Trajectory:
    samples: list[Sample] = field(default_factory=list)
    normalized: bool = False
    halt_reason: str = "t_end"
    extinction_time: float | None = None

    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])

    @property
    def final(self) -> Sample:
        return self.samples[-1]


def canonical_structure(s: float = 1.0) -> FlowState:
    return FlowState(J_CANONICAL.copy(), s, 0.0)


def geometry(state: FlowState) -> PseudohermitianGeometry:
    return solve_structure_equations(adapted_coframe(state.structure()))


def flow_rhs(state: FlowState, normalized: bool = False) -> tuple[np.ndarray, float]:
    """(dJ, ds) for the (optionally normalized) torsion flow."""
    cf = adapted_coframe(state.structure())
    g = solve_structure_equations(cf)
    dJ = 2.0 * torsion_endomorphism(cf, g.A11)
    # runtime check that the velocity is tangent to {J^2 = -I}: dJ J + J dJ = 0
    anti = dJ @ state.J + state.J @ dJ
    if np.max(np.abs(anti)) > TANGENCY_TOL * max(1.0, float(np.max(np.abs(dJ)))):
        raise StepUnstable("torsion velocity does not anticommute with J")
    ds = 0.0 if normalized else -2.0 * g.W * state.s
    return dJ, ds


def retract(J: np.ndarray) -> np.ndarray:
    """Nearest-scale compatible structure: J / sqrt(-(a^2 + bc)).

    For J = [[a, b], [c, -a]] (trace-free) J^2 = (a^2 + bc) I, so dividing by
    sqrt(-(a^2 + bc)) restores J^2 = -I exactly.  The trace is removed first.
    """
    J = np.asarray(J, dtype=float)
    tr = 0.5 * (J[0, 0] - J[1, 1])
    J = np.array([[tr, J[0, 1]], [J[1, 0], -tr]])
    det = -(J[0, 0] ** 2 + J[0, 1] * J[1, 0])
    if not det > 0:
        raise NonCompatibleJ("J left the elliptic region; cannot retract")
    return J / math.sqrt(det)


def einstein_hilbert(state: FlowState, geom: PseudohermitianGeometry | None = None) -> tuple[float, float]:
    """(energy, volume) with volume = |theta ^ d theta(e1, e2, e3)| and energy = W * volume."""
    geom = geom or geometry(state)
    vol = state.structure().volume()
    return geom.W * vol, vol


def distance_to_canonical(J) -> float:
    return float(np.linalg.norm(np.asarray(J, dtype=float) - J_CANONICAL))


def torsion_norm_sq(A11: complex) -> float:
    """||A||^2 = A_11 A^11 = |A_11|^2 (one Hermitian contraction).

    This is the normalization under which the energy identity holds along the
    flow; counting both index orientations (2|A_11|^2) overshoots by exactly
    the torsion term.
    """
    return abs(A11) ** 2


def sample(state: FlowState) -> Sample:
    g = geometry(state)
    energy, vol = einstein_hilbert(state, g)
    return Sample(state.time, state, g.W, g.A_abs, energy, vol, distance_to_canonical(state.J))


def _rk4(state: FlowState, dt: float, normalized: bool) -> tuple[np.ndarray, float]:
    # stages leave J^2 = -I slightly; evaluating the field at the retracted
    # point is a smooth extension off the manifold, so RK4 keeps its order
    def rhs(J, s):
        return flow_rhs(FlowState(retract(J), s, state.time), normalized)

    J0, s0 = state.J, state.s
    k1J, k1s = rhs(J0, s0)
    k2J, k2s = rhs(J0 + 0.5 * dt * k1J, s0 + 0.5 * dt * k1s)
    k3J, k3s = rhs(J0 + 0.5 * dt * k2J, s0 + 0.5 * dt * k2s)
    k4J, k4s = rhs(J0 + dt * k3J, s0 + dt * k3s)
    J = J0 + dt / 6.0 * (k1J + 2 * k2J + 2 * k3J + k4J)
    s = s0 + dt / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
    return J, s


def integrate(state: FlowState, config: FlowConfig, *, raise_on_extinction: bool = False) -> Trajectory:
    """Fixed-step RK4 with retraction onto J^2 = -I after every step.

    Extinction (s dropping below the guard, or an RK stage reaching s <= 0)
    halts the run; the trajectory records ``halt_reason = "extinction"`` and an
    ``extinction_time`` extrapolated linearly from the last accepted state.
    With ``raise_on_extinction`` an :class:`ExtinctionReached` is raised
    instead, carrying the trajectory as ``args[1]``.
    """
    traj = Trajectory(normalized=config.normalized)
    traj.samples.append(sample(state))
    n_steps = int(round((config.t_end - state.time) / config.dt))
    if n_steps < 0:
        raise ValueError("t_end precedes the initial time")
    current = state
    for step in range(1, n_steps + 1):
        t_new = state.time + step * config.dt
        try:
            J, s = _rk4(current, config.dt, config.normalized)
            failed = not (s >= config.extinction_guard)
        except (ValueError, NonCompatibleJ, ZeroDivisionError, FloatingPointError):
            failed = True
        if failed:
            _, ds = flow_rhs(current, config.normalized)
            traj.halt_reason = "extinction"
            traj.extinction_time = current.time + (current.s / -ds if ds < 0 else math.inf)
            if raise_on_extinction:
                raise ExtinctionReached(f"contact scale vanished near t = {traj.extinction_time:.9g}", traj)
            return traj
        if not np.all(np.isfinite(J)) or np.linalg.norm(J) > J_UNSTABLE:
            raise StepUnstable(f"|J| exceeded {J_UNSTABLE:g} at t = {t_new:g}")
        current = FlowState(retract(J), s, t_new)
        if step % config.record_every == 0 or step == n_steps:
            traj.samples.append(sample(current))
    return traj


def dissipation_residual(traj: Trajectory) -> list[float]:
    """Centered dE/dt minus -2(||A||^2 + W^2) Vol at every interior sample.

    Needs an unnormalized trajectory with equally spaced samples.
    """
    if len(traj.samples) < 3:
        raise InsufficientSamples("need at least 3 samples for a centered difference")
    out = []
    sm = traj.samples
    for i in range(1, len(sm) - 1):
        dt = sm[i + 1].time - sm[i - 1].time
        dE = (sm[i + 1].energy - sm[i - 1].energy) / dt
        predicted = -2.0 * (sm[i].A_abs**2 + sm[i].W ** 2) * sm[i].volume
        out.append(dE - predicted)
    return out


def with_time(state: FlowState, t: float) -> FlowState:
    return replace(state, time=t)
