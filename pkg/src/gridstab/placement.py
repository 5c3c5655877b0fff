"""DER placement studies: gain sampling, candidate heatmaps, cross-application.

The candidate placement procedure (CPP) walks every empty node, adds a
co-located actuator/performance pair there, samples gain matrices, and
colors the node by the fraction of samples that give a good configuration:

    blue   good fraction >= 0.07
    yellow 0 < good fraction < 0.07
    red    no good sample

Closed-loop evaluation uses the fact that with k actuated phases the
feedback couples only a k-dimensional (droop) or 2k-dimensional (PBC)
subspace; eigenvalues and the disturbance response are computed there and
checked against the dense route in the tests.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .control import APNP, Configuration, colocated_config, droop_gains, pbc_gains
from .errors import GridStabError, NoGoodConfigurationFound
from .feeder import build_sensitivity
from .metrics import path_cumulative_metrics, scale_feeder_ratios
from .stability import DEFAULT_CONTRACTION, DEFAULT_DV

GOOD_FRACTION_BLUE = 0.07


@dataclass(frozen=True)
class SamplingSpec:
    """How to draw random gain matrices. The seed is mandatory."""

    num_samples: int
    seed: int
    gain_range: tuple = (1e-2, 5e1)
    distribution: str = "log_uniform"
    pbc_f22_tie: float = 2.0  # None -> sample F22 independently

    def __post_init__(self):
        if self.distribution != "log_uniform":
            raise ValueError("only log_uniform sampling is implemented")
        if self.num_samples < 1:
            raise ValueError("num_samples must be positive")
        if self.seed is None:
            raise ValueError("a seed is required for reproducibility")


def _draw(spec, rng, m):
    """One sample: two (m, 3) gain tables (second tied for PBC if configured)."""
    lo, hi = np.log(spec.gain_range[0]), np.log(spec.gain_range[1])
    g1 = np.exp(rng.uniform(lo, hi, size=(m, 3)))
    if spec.pbc_f22_tie is None:
        g2 = np.exp(rng.uniform(lo, hi, size=(m, 3)))
    else:
        g2 = None
    return g1, g2


def _draw_for_kind(spec, rng, m, kind):
    g1, g2 = _draw(spec, rng, m)
    if kind == "droop":
        if g2 is None:
            lo, hi = np.log(spec.gain_range[0]), np.log(spec.gain_range[1])
            g2 = np.exp(rng.uniform(lo, hi, size=(m, 3)))
    else:
        if g2 is None:
            g2 = spec.pbc_f22_tie * g1
    return g1, g2


def sample_gains(spec, sens, cfg, kind, rng=None):
    """Materialized GainMatrix list (small systems; studies draw lazily)."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    m = len(cfg.apnps)
    mask = _phase_table(cfg)
    out = []
    for _ in range(spec.num_samples):
        g1, g2 = _draw_for_kind(spec, rng, m, kind)
        g1, g2 = g1 * mask, g2 * mask
        out.append(
            droop_gains(sens, cfg, g1, g2) if kind == "droop" else pbc_gains(sens, cfg, g1, g2)
        )
    return out


def _phase_table(cfg):
    mask = np.zeros((len(cfg.apnps), 3))
    for k, pair in enumerate(cfg.apnps):
        mask[k, list(pair.phases.indices())] = 1.0
    return mask


class _LoopEvaluator:
    """Low-rank closed-loop evaluation for one (sens, cfg, kind)."""

    def __init__(self, sens, cfg, kind):
        self.kind = kind
        act, perf, slots = [], [], []
        for k, pair in enumerate(cfg.apnps):
            for i in pair.phases.indices():
                act.append(sens.index[pair.actuator] + i)
                perf.append(sens.index[pair.performance] + i)
                slots.append((k, i))
        self.act = np.array(act, dtype=int)
        self.perf = np.array(perf, dtype=int)
        self.slots = slots
        self.X_pa = sens.X[np.ix_(self.perf, self.act)]
        self.R_pa = sens.R[np.ix_(self.perf, self.act)]
        self.X_cols = sens.X[:, self.act][sens.active]
        self.R_cols = sens.R[:, self.act][sens.active]
        self.n_active = int(sens.active.sum())

    def _flat(self, table):
        return np.array([table[k, i] for (k, i) in self.slots])

    def rho(self, g1, g2):
        a, b = self._flat(g1), self._flat(g2)
        if self.kind == "droop":
            loop = -(self.X_pa * a + self.R_pa * b)
            eig = np.linalg.eigvals(loop)
        else:
            k = len(a)
            sc = np.block(
                [
                    [self.X_pa * a, self.R_pa * b],
                    [-0.5 * self.R_pa * a, 0.5 * self.X_pa * b],
                ]
            )
            eig = np.linalg.eigvals(np.eye(2 * k) - sc)
        return float(np.max(np.abs(eig))) if eig.size else 0.0

    def goodness(self, g1, g2, dv=DEFAULT_DV, min_contraction=DEFAULT_CONTRACTION):
        """(rho, good). Droop adds the mean-contraction requirement."""
        rho = self.rho(g1, g2)
        if rho >= 1.0:
            return rho, False
        if self.kind == "pbc":
            return rho, True
        a, b = self._flat(g1), self._flat(g2)
        M = self.X_pa * a + self.R_pa * b
        try:
            y = np.linalg.solve(np.eye(len(a)) + M, np.full(len(a), dv))
        except np.linalg.LinAlgError:
            return rho, False
        dss = np.full(self.n_active, dv) - (self.X_cols * a + self.R_cols * b) @ y
        mean_c = float(np.mean(1.0 - np.abs(dss) / dv))
        return rho, mean_c >= min_contraction


@dataclass
class NodeVerdict:
    node: str
    color: str
    good_fraction: float
    best_rho: float = None
    best_gains: dict = None
    error: str = None


@dataclass
class HeatmapResult:
    kind: str
    base_nodes: tuple
    spec: SamplingSpec
    verdicts: list
    counts: dict


def _candidate_seed(seed, node_id):
    return np.random.SeedSequence((seed, zlib.crc32(node_id.encode())))


def _evaluate_config(sens, cfg, kind, spec, rng):
    """Sample gains for one configuration; returns (good_count, best) where
    best = (rho, g1, g2) preferring good samples, then smallest rho."""
    ev = _LoopEvaluator(sens, cfg, kind)
    mask = _phase_table(cfg)
    m = len(cfg.apnps)
    good_count = 0
    best = None  # (is_good, rho, g1, g2)
    for _ in range(spec.num_samples):
        g1, g2 = _draw_for_kind(spec, rng, m, kind)
        g1, g2 = g1 * mask, g2 * mask
        rho, good = ev.goodness(g1, g2)
        if good:
            good_count += 1
        key = (not good, rho)
        if best is None or key < (not best[0], best[1]):
            best = (good, rho, g1, g2)
    return good_count, best


def cpp(feeder, base_cfg, kind, spec, sens=None):
    """Candidate placement procedure over all empty nodes."""
    if sens is None:
        sens = build_sensitivity(feeder)
    base_nodes = set()
    for pair in base_cfg.apnps:
        base_nodes.add(pair.actuator)
        base_nodes.add(pair.performance)
    candidates = sorted(n for n in feeder.node_ids() if n not in base_nodes)
    verdicts = []
    counts = {"blue": 0, "yellow": 0, "red": 0, "error": 0}
    for nid in candidates:
        cfg_c = Configuration(
            base_cfg.apnps + [APNP(nid, nid, feeder.nodes[nid])]
        ).validate(feeder)
        rng = np.random.default_rng(_candidate_seed(spec.seed, nid))
        try:
            good_count, best = _evaluate_config(sens, cfg_c, kind, spec, rng)
        except GridStabError as exc:
            verdicts.append(NodeVerdict(nid, "error", 0.0, error=str(exc)))
            counts["error"] += 1
            continue
        gf = good_count / spec.num_samples
        color = "blue" if gf >= GOOD_FRACTION_BLUE else ("yellow" if gf > 0.0 else "red")
        counts[color] += 1
        verdicts.append(
            NodeVerdict(
                nid,
                color,
                gf,
                best_rho=best[1],
                best_gains={
                    "f11": best[2].tolist(),
                    "f21" if kind == "droop" else "f22": best[3].tolist(),
                    "nodes": [p.actuator for p in cfg_c.apnps],
                },
            )
        )
    return HeatmapResult(kind, tuple(sorted(base_nodes)), spec, verdicts, counts)


@dataclass
class CrossApplyResult:
    kind: str
    ratio: str
    factor: float
    m: int
    trials: int
    support: int
    contradict: int
    inconclusive: int
    not_found: int

    @property
    def status(self):
        return "N/A" if self.support + self.contradict + self.inconclusive == 0 else "ok"


def _find_good_config(sens, feeder, kind, m, spec, rng, budget):
    """Random m-node co-located configurations until one has a good sample."""
    ids = feeder.node_ids()
    for _ in range(budget):
        chosen = list(rng.choice(len(ids), size=m, replace=False))
        cfg = colocated_config([ids[i] for i in chosen], feeder)
        good_count, best = _evaluate_config(sens, cfg, kind, spec, rng)
        if good_count > 0:
            return cfg, best
    raise NoGoodConfigurationFound("no good %d-node configuration within budget %d" % (m, budget))


def cross_apply_experiment(
    feeder, kind, m, ratio="rx", factor=1.5, trials=10, spec=None, budget=500
):
    """Cross-apply best gains between a feeder and its ratio-scaled copy.

    Per trial: find a good m-node configuration on the original feeder A and
    apply its best F to the identical configuration on the scaled feeder B,
    and symmetrically from B back to A. Goodness lost only in A->B counts as
    support (higher ratios are harder), lost only in B->A as contradict,
    both-or-neither as inconclusive. Trials where either search exhausts its
    budget count as not_found; a cell with no completed trials is N/A.
    """
    if spec is None:
        spec = SamplingSpec(num_samples=40, seed=0)
    feeder_b = scale_feeder_ratios(feeder, ratio, factor)
    sens_a = build_sensitivity(feeder)
    sens_b = build_sensitivity(feeder_b)
    support = contradict = inconclusive = not_found = 0
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence((spec.seed, m, t)))
        try:
            cfg_a, best_a = _find_good_config(sens_a, feeder, kind, m, spec, rng, budget)
            cfg_b, best_b = _find_good_config(sens_b, feeder_b, kind, m, spec, rng, budget)
        except NoGoodConfigurationFound:
            not_found += 1
            continue
        lost_ab = not _apply(sens_b, cfg_a, kind, best_a)
        lost_ba = not _apply(sens_a, cfg_b, kind, best_b)
        if lost_ab and not lost_ba:
            support += 1
        elif lost_ba and not lost_ab:
            contradict += 1
        else:
            inconclusive += 1
    return CrossApplyResult(
        kind, ratio, factor, m, trials, support, contradict, inconclusive, not_found
    )


def _apply(sens, cfg, kind, best):
    _, _, g1, g2 = best
    ev = _LoopEvaluator(sens, cfg, kind)
    _, good = ev.goodness(g1, g2)
    return good


def branch_metrics_ranking(feeder):
    """Nodes ranked by path-cumulative R/X ratio and by phase ratio."""
    records = path_cumulative_metrics(feeder)
    for rec in records:
        up = feeder.line_up.get(rec["node"])
        rec["branch"] = [up.from_id, up.to_id] if up else None
    by_rx = sorted(records, key=lambda r: -r["d_mean"])
    by_phase = sorted(records, key=lambda r: -r["c_x_mean"])
    return {"by_rx": by_rx, "by_phase": by_phase}
