"""Closed-loop models for droop and phasor-based control (PBC).

Both controllers are linear state feedback on the linearized feeder model.
With e^v the squared-magnitude voltage error and e^delta the angle error,

  droop (volt-var + volt-watt, absolute setpoints):
      e^v_{k+1} = -(X F11 + R F21) e^v_k + d_k            A = 0   (3n states)

  PBC (incremental phasor tracking):
      e_{k+1} = (I - B F) e_k,  e = (e^v, e^delta)        A = I   (6n states)
      B = [[X, R], [-R/2, X/2]],  F = [[F11, 0], [0, F22]]

Gain matrices follow the actuator/performance-node-pair (APNP) structure:
rows live on actuator phases, columns on performance-node phases, and every
3x3 block of a three-phase node is diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMatrix, StructureError, UnknownNode
from .feeder import PhaseSet

KINDS = ("droop", "pbc")


@dataclass(frozen=True)
class APNP:
    """Actuator/performance node pair; co-located when both ids match."""

    actuator: str
    performance: str
    phases: PhaseSet

    @property
    def colocated(self):
        return self.actuator == self.performance


@dataclass
class Configuration:
    """A set of APNPs on a feeder. Actuator nodes must be distinct."""

    apnps: list

    def __post_init__(self):
        acts = [p.actuator for p in self.apnps]
        if len(set(acts)) != len(acts):
            raise StructureError("duplicate actuator nodes in configuration")

    def validate(self, feeder):
        for p in self.apnps:
            for nid in (p.actuator, p.performance):
                if nid not in feeder.nodes:
                    raise UnknownNode("configuration references unknown node %r" % nid)
                if nid == feeder.substation:
                    raise StructureError("substation cannot host an APNP")
                if not p.phases.issubset(feeder.nodes[nid]):
                    raise StructureError(
                        "APNP phases %s not available at node %s"
                        % (p.phases.to_string(), nid)
                    )
        return self

    @property
    def nodes(self):
        out = []
        for p in self.apnps:
            for nid in (p.actuator, p.performance):
                if nid not in out:
                    out.append(nid)
        return out


def colocated_config(node_ids, feeder):
    """Co-located APNPs on the given nodes, using each node's full phase set."""
    for n in node_ids:
        if n not in feeder.nodes:
            raise UnknownNode("no node %r" % n)
    return Configuration(
        [APNP(n, n, feeder.nodes[n]) for n in node_ids]
    ).validate(feeder)


@dataclass
class GainMatrix:
    """Four 3n x 3n gain blocks; unused channels stay zero.

    droop uses F11 (volt-var) and F21 (volt-watt); PBC uses F11 (reactive
    from voltage error) and F22 (real from angle error) with F12 = F21 = 0.
    """

    kind: str
    f11: np.ndarray
    f12: np.ndarray
    f21: np.ndarray
    f22: np.ndarray
    values: dict = field(default_factory=dict)  # (apnp_idx, phase_idx, channel) -> gain


def _fill(sens, cfg, channels):
    n = sens.n_states
    mats = {ch: np.zeros((n, n)) for ch in channels}
    values = {}
    for k, pair in enumerate(cfg.apnps):
        for ch, per_phase in channels.items():
            g = np.asarray(per_phase[k], dtype=float)
            if g.shape != (3,):
                raise StructureError("per-APNP gains must have three phase entries")
            for i in range(3):
                if i not in pair.phases.indices():
                    if g[i] != 0.0:
                        raise StructureError(
                            "gain on absent phase %s of pair %s" % ("ABC"[i], pair.actuator)
                        )
                    continue
                row = sens.index[pair.actuator] + i
                col = sens.index[pair.performance] + i
                mats[ch][row, col] = g[i]
                values[(k, i, ch)] = float(g[i])
    return mats, values


def droop_gains(sens, cfg, f11, f21):
    """Droop gain matrix from per-APNP per-phase slopes (shape m x 3 each)."""
    mats, values = _fill(sens, cfg, {"f11": f11, "f21": f21})
    n = sens.n_states
    return GainMatrix("droop", mats["f11"], np.zeros((n, n)), mats["f21"], np.zeros((n, n)), values)


def pbc_gains(sens, cfg, f11, f22):
    """PBC gain matrix; F12 = F21 = 0 by construction."""
    mats, values = _fill(sens, cfg, {"f11": f11, "f22": f22})
    n = sens.n_states
    return GainMatrix("pbc", mats["f11"], np.zeros((n, n)), np.zeros((n, n)), mats["f22"], values)


def uniform_gains(sens, cfg, kind, a):
    """Same scalar gain on every actuated phase; PBC ties F22 = 2a."""
    m = len(cfg.apnps)
    g = np.zeros((m, 3))
    for k, pair in enumerate(cfg.apnps):
        g[k, list(pair.phases.indices())] = a
    if kind == "droop":
        return droop_gains(sens, cfg, g, g)
    if kind == "pbc":
        return pbc_gains(sens, cfg, g, 2.0 * g)
    raise ValueError("kind must be one of %s" % (KINDS,))


def validate_structure(gains, sens, cfg):
    """Reject gain matrices with entries outside the APNP structure."""
    n = sens.n_states
    allowed = np.zeros((n, n), dtype=bool)
    for pair in cfg.apnps:
        for i in pair.phases.indices():
            allowed[sens.index[pair.actuator] + i, sens.index[pair.performance] + i] = True
    for name in ("f11", "f12", "f21", "f22"):
        m = getattr(gains, name)
        if m.shape != (n, n):
            raise StructureError("%s has shape %s, expected %s" % (name, m.shape, (n, n)))
        if name in ("f12", "f21") and gains.kind == "pbc":
            if np.any(m != 0.0):
                raise StructureError("PBC requires %s = 0" % name)
            continue
        if name in ("f12", "f22") and gains.kind == "droop":
            if np.any(m != 0.0):
                raise StructureError("droop does not use %s" % name)
            continue
        if np.any(m[~allowed] != 0.0):
            raise StructureError("%s has entries outside the APNP structure" % name)
    return gains


@dataclass
class ClosedLoopSystem:
    """State-space closed loop e_{k+1} = (A - B F) e_k (+ exogenous terms).

    active_mask flags structurally present phase rows. loop_mask flags the
    feedback-coupled rows (performance-node phases, both channels for PBC);
    the dynamics restricted to loop_mask are autonomous and carry every mode
    the feedback can move, while rows outside it are deadbeat (droop, A = 0)
    or pure accumulators (PBC, A = I).
    """

    kind: str
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    gains: GainMatrix
    dynamics: np.ndarray
    active_mask: np.ndarray
    loop_mask: np.ndarray
    sens: object = None
    config: Configuration = None

    @property
    def n_states(self):
        return self.A.shape[0]


def _loop_mask(sens, cfg):
    mask = np.zeros(sens.n_states, dtype=bool)
    for pair in cfg.apnps:
        for i in pair.phases.indices():
            mask[sens.index[pair.performance] + i] = True
    return mask


def build_droop(sens, cfg, gains):
    """Closed droop loop: A = 0 (3n), B = [X R], F = [F11; F21]."""
    if gains.kind != "droop":
        raise StructureError("expected droop gains")
    if sens.feeder is not None:
        cfg.validate(sens.feeder)
    validate_structure(gains, sens, cfg)
    n = sens.n_states
    A = np.zeros((n, n))
    B = np.hstack([sens.X, sens.R])
    F = np.vstack([gains.f11, gains.f21])
    dynamics = -(sens.X @ gains.f11 + sens.R @ gains.f21)
    return ClosedLoopSystem(
        kind="droop",
        A=A,
        B=B,
        F=F,
        gains=gains,
        dynamics=dynamics,
        active_mask=sens.active.copy(),
        loop_mask=_loop_mask(sens, cfg) & sens.active,
        sens=sens,
        config=cfg,
    )


def build_pbc(sens, cfg, gains):
    """Closed PBC loop: A = I (6n), B = [[X, R], [-R/2, X/2]]."""
    if gains.kind != "pbc":
        raise StructureError("expected PBC gains")
    if sens.feeder is not None:
        cfg.validate(sens.feeder)
    validate_structure(gains, sens, cfg)
    n = sens.n_states
    A = np.eye(2 * n)
    B = np.block([[sens.X, sens.R], [-0.5 * sens.R, 0.5 * sens.X]])
    F = np.block(
        [[gains.f11, np.zeros((n, n))], [np.zeros((n, n)), gains.f22]]
    )
    dynamics = A - B @ F
    vloop = _loop_mask(sens, cfg) & sens.active
    return ClosedLoopSystem(
        kind="pbc",
        A=A,
        B=B,
        F=F,
        gains=gains,
        dynamics=dynamics,
        active_mask=np.concatenate([sens.active, sens.active]),
        loop_mask=np.concatenate([vloop, vloop]),
        sens=sens,
        config=cfg,
    )


def build_closed_loop(sens, cfg, gains):
    return build_droop(sens, cfg, gains) if gains.kind == "droop" else build_pbc(sens, cfg, gains)


def disturbance_response(system, dv):
    """Steady-state voltage error dSS = (I + B F)^-1 dV^d for a droop loop.

    dv may be a scalar (applied to every active phase) or a length-3n vector.
    """
    if system.kind != "droop":
        raise StructureError("disturbance_response applies to droop loops")
    n = system.n_states
    dvec = np.zeros(n)
    dvec[system.active_mask] = dv if np.isscalar(dv) else np.asarray(dv)[system.active_mask]
    idx = np.where(system.active_mask)[0]
    M = (np.eye(n) - system.dynamics)[np.ix_(idx, idx)]  # I + BF on active rows
    try:
        sol = np.linalg.solve(M, dvec[idx])
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("I + BF is singular") from exc
    out = np.zeros(n)
    out[idx] = sol
    return out
