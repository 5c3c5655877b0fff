"""Quasi-steady-state closed-loop simulator.

Alternates one control update with one network solve per step (the step
period is a reporting convention; controller dynamics are assumed settled
within it). Internally voltages are squared magnitudes and angles are kept
in a common frame where every phase's nominal angle is zero; the nominal
-120/+120 degree offsets are added back when reporting.

Two solvers:
  linear         v = R p + X q + 1, delta = (X p - R q)/2, any feeder
  exact_two_bus  exact DistFlow on a two-node feeder; scalar closed form on
                 a single phase, fixed point on the raw impedance block for
                 multi-phase lines (each phase a separate node, matching the
                 linear model's convention)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import build_closed_loop
from .errors import NoRealSolution, ParseError
from .feeder import build_sensitivity

NOMINAL_DEG = np.array([0.0, -120.0, 120.0])


def solve_exact_two_bus(z, p, q, v_slack=1.0):
    """Exact receiving-end voltage on a single line, as a complex phasor.

    z is the scalar line impedance, (p, q) the net injection at the
    receiving node, v_slack the sending-end magnitude. Solves the branch
    quadratic in |V_j|^2,

        u^2 + (2(r P + x Q) - v_slack^2) u + |z|^2 (P^2 + Q^2) = 0,

    with (P, Q) = -(p, q) the receiving-end consumption, and keeps the
    high-voltage root. Raises NoRealSolution when the discriminant is
    negative (voltage collapse).
    """
    z = complex(z)
    t = v_slack * v_slack + 2.0 * (z.real * p + z.imag * q)
    disc = t * t - 4.0 * abs(z) ** 2 * (p * p + q * q)
    if disc < 0.0:
        raise NoRealSolution("branch quadratic has no real root")
    u = 0.5 * (t + np.sqrt(disc))
    if u <= 0.0:
        raise NoRealSolution("voltage solution is nonpositive")
    s_cons = -(p + 1j * q)
    return (u + s_cons * z.conjugate()) / v_slack


def solve_two_node_block(zblk, s_inj, v_slack=1.0, tol=1e-12, max_iter=60, v_start=None):
    """Exact fixed point for a multi-phase two-node network.

    zblk is the k x k impedance block over the present phases, s_inj the
    complex net injections. Iterates V = v_slack - Z conj(S_cons / V) in the
    common-angle frame; the linearization of this map is exactly the raw
    block model used everywhere else.
    """
    k = len(s_inj)
    v = np.full(k, complex(v_slack)) if v_start is None else np.asarray(v_start, dtype=complex).copy()
    s_cons = -np.asarray(s_inj, dtype=complex)
    for _ in range(max_iter):
        if np.any(np.abs(v) < 1e-6):
            raise NoRealSolution("phase voltage collapsed during fixed point")
        v_new = v_slack - zblk @ np.conj(s_cons / v)
        if np.max(np.abs(v_new - v)) < tol:
            return v_new
        v = v_new
    raise NoRealSolution("two-node fixed point did not converge")


def solve_linear_flow(sens, p, q):
    """Linearized network solve: squared magnitudes and common-frame angles."""
    v = sens.R @ p + sens.X @ q + 1.0
    delta = 0.5 * (sens.X @ p - sens.R @ q)
    return v, delta


@dataclass
class SimScenario:
    """Everything one closed-loop run needs.

    loads maps node id to (P, Q) consumption in pu applied to each present
    phase (or a list of three per-phase pairs). v_init / delta_init_deg are
    magnitudes and angle offsets from nominal; None means start from the
    power flow at the initial setpoints.
    """

    feeder: object
    config: object
    kind: str
    gains: object
    loads: dict = field(default_factory=dict)
    v_ref: float = 1.0
    delta_ref_deg: float = 0.0
    v_init: float = None
    delta_init_deg: float = None
    horizon: int = 50
    solver: str = "linear"
    step_period_s: float = 1.0
    divergence_threshold: float = 0.5


@dataclass
class Trajectory:
    times: np.ndarray
    vmag: np.ndarray
    angle_deg: np.ndarray
    p_inv: np.ndarray
    q_inv: np.ndarray
    node_ids: tuple
    active: np.ndarray
    divergence_step: int = None
    reason: str = None
    step_period_s: float = 1.0

    @property
    def steps(self):
        return len(self.times) - 1

    @property
    def divergence_time_s(self):
        return None if self.divergence_step is None else self.divergence_step * self.step_period_s


def step_control(kind, gains, e_v, e_delta, q_prev, p_prev):
    """One control update; droop is absolute in e_v, PBC is incremental."""
    if kind == "droop":
        q_sp = -(gains.f11 @ e_v)
        p_sp = -(gains.f21 @ e_v)
    else:
        u_q = -(gains.f11 @ e_v + gains.f12 @ e_delta)
        u_p = -(gains.f21 @ e_v + gains.f22 @ e_delta)
        q_sp = q_prev + u_q
        p_sp = p_prev + u_p
    return q_sp, p_sp


def _load_vectors(sens, loads):
    p = np.zeros(sens.n_states)
    q = np.zeros(sens.n_states)
    feeder = sens.feeder
    for nid, val in loads.items():
        if nid not in sens.index:
            raise ParseError("load on unknown node %r" % nid)
        val = np.asarray(val, dtype=float)
        for i in feeder.nodes[nid].indices():
            pq = val if val.ndim == 1 else val[i]
            p[sens.index[nid] + i] -= pq[0]
            q[sens.index[nid] + i] -= pq[1]
    return p, q


def run(scn):
    """Simulate the scenario and return a Trajectory."""
    sens = build_sensitivity(scn.feeder)
    system = build_closed_loop(sens, scn.config, scn.gains)
    act = sens.active
    n = sens.n_states
    p_other, q_other = _load_vectors(sens, scn.loads)
    v_ref_sq = np.ones(n) * float(scn.v_ref) ** 2
    d_ref = np.ones(n) * np.deg2rad(scn.delta_ref_deg)

    if scn.solver == "exact_two_bus":
        load_nodes = [nid for nid in scn.feeder.node_ids()]
        if len(load_nodes) != 1:
            raise ParseError("exact_two_bus solver needs a two-node feeder")
        rows = sens.rows_of(load_nodes[0])
        zblk = scn.feeder.lines[0].imp.z[np.ix_(
            scn.feeder.nodes[load_nodes[0]].indices(), scn.feeder.nodes[load_nodes[0]].indices()
        )]
    elif scn.solver != "linear":
        raise ParseError("unknown solver %r" % scn.solver)

    q_sp = np.zeros(n)
    p_sp = np.zeros(n)
    v_warm = None

    def solve(p_net, q_net):
        nonlocal v_warm
        if scn.solver == "linear":
            return solve_linear_flow(sens, p_net, q_net)
        s = p_net[rows] + 1j * q_net[rows]
        if len(rows) == 1:
            vc = np.array([solve_exact_two_bus(complex(zblk[0, 0]), s.real[0], s.imag[0])])
        else:
            vc = solve_two_node_block(zblk, s, v_start=v_warm)
        v_warm = vc
        v = np.ones(n)
        delta = np.zeros(n)
        v[rows] = np.abs(vc) ** 2
        delta[rows] = np.angle(vc)
        return v, delta

    if scn.v_init is None:
        v, delta = solve(p_sp + p_other, q_sp + q_other)
    else:
        v = np.ones(n)
        v[act] = float(scn.v_init) ** 2
        delta = np.zeros(n)
        if scn.delta_init_deg is not None:
            delta[act] = np.deg2rad(float(scn.delta_init_deg))

    vmag = [np.sqrt(np.abs(v))]
    angs = [np.rad2deg(delta)]
    qs, ps = [q_sp.copy()], [p_sp.copy()]
    div_step, reason = None, None

    for k in range(scn.horizon):
        q_sp, p_sp = step_control(scn.kind, scn.gains, v - v_ref_sq, delta - d_ref, q_sp, p_sp)
        try:
            v, delta = solve(p_sp + p_other, q_sp + q_other)
        except NoRealSolution as exc:
            div_step, reason = k + 1, "collapse: %s" % exc
            break
        vmag.append(np.sqrt(np.abs(v)))
        angs.append(np.rad2deg(delta))
        qs.append(q_sp.copy())
        ps.append(p_sp.copy())
        vm = np.sqrt(np.abs(v[act]))
        if div_step is None and np.max(np.abs(vm - 1.0)) > scn.divergence_threshold:
            div_step, reason = k + 1, "threshold"
            break

    steps = len(vmag)
    offsets = np.tile(NOMINAL_DEG, n // 3)
    return Trajectory(
        times=np.arange(steps) * scn.step_period_s,
        vmag=np.array(vmag),
        angle_deg=np.array(angs) + offsets,
        p_inv=np.array(ps),
        q_inv=np.array(qs),
        node_ids=sens.node_ids,
        active=act,
        divergence_step=div_step,
        reason=reason,
        step_period_s=scn.step_period_s,
    )
