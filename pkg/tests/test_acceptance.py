"""End-to-end acceptance gate.

Every adopted acceptance criterion runs here at its stated tolerance and
budget.  Each test wraps one criterion in the `criterion` fixture from
conftest, which emits a single "ACCEPTANCE PASS|FAIL <name>" line in the
terminal summary no matter where inside the block an assertion trips.
Failing a criterion both prints FAIL and fails the test.
"""

import time

import numpy as np
import pytest

import gridstab as gs
from gridstab import NoStabilizingGain, SamplingSpec, SimScenario, run

from conftest import random_radial_feeder

FAMILIES = ("pbc_1ph", "droop_1ph", "pbc_rx", "droop_rx", "pbc_phase", "droop_phase")


def _bisect(family, **params):
    return gs.bisect_acrit(gs.family_builder(family, **params)).a_crit


def _draw_params(family, rng):
    if family.endswith("_1ph"):
        return {"x": float(rng.uniform(0.1, 0.4))}
    if family.endswith("_rx"):
        return {"d": float(rng.uniform(0.0, 1.0)), "l1": float(rng.uniform(0.1, 0.4))}
    return {"c_x": float(rng.uniform(0.0, 1.8)), "l2": float(rng.uniform(0.1, 0.4))}


def test_single_line_critical_gain(criterion):
    # bisected a_crit matches 2/X (pbc) and 1/X (droop) on a single line,
    # and decreases monotonically in X
    with criterion("single-line-critical-gain") as rec:
        t0 = time.perf_counter()
        xs = [float(x) for x in np.arange(0.05, 1.0001, 0.05)]
        worst = 0.0
        for family, closed in (("pbc_1ph", lambda x: 2.0 / x),
                               ("droop_1ph", lambda x: 1.0 / x)):
            crit = [_bisect(family, x=x) for x in xs]
            worst = max(worst, max(abs(a - closed(x)) for a, x in zip(crit, xs)))
            assert all(u > v for u, v in zip(crit, crit[1:])), family
        elapsed = time.perf_counter() - t0
        assert worst <= 1e-5
        assert elapsed < 1.0
        rec.detail = "max dev %.1e over 20 X values, %.2fs" % (worst, elapsed)


def test_rx_ratio_critical_gain(criterion):
    # bisected a_crit matches 2/(L1 sqrt(d^2+1)) (pbc) and
    # sqrt(d^2+1)/(L1 (d+1)) (droop) across the resistance ratio grid
    with criterion("rx-ratio-critical-gain") as rec:
        t0 = time.perf_counter()
        l1 = 0.2
        worst = 0.0
        for d in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
            pbc = _bisect("pbc_rx", d=d, l1=l1)
            droop = _bisect("droop_rx", d=d, l1=l1)
            worst = max(worst,
                        abs(pbc - 2.0 / (l1 * np.sqrt(d * d + 1))),
                        abs(droop - np.sqrt(d * d + 1) / (l1 * (d + 1))))
        ref = _bisect("pbc_rx", d=0.6, l1=l1)
        elapsed = time.perf_counter() - t0
        assert worst <= 1e-5
        assert abs(ref - 8.575) <= 0.05
        assert elapsed < 1.0
        rec.detail = "max dev %.1e, d=0.6 pbc a_crit %.4f, %.2fs" % (worst, ref, elapsed)


def test_phase_ratio_critical_gain(criterion):
    # c_x = 2.3 admits no stabilizing pbc gain; the slow-mode modulus at
    # a = 4 grows strictly with c_x; droop stays at 1/L2 = 5 throughout
    with criterion("phase-ratio-critical-gain") as rec:
        t0 = time.perf_counter()
        l2 = 0.2
        with pytest.raises(NoStabilizingGain):
            _bisect("pbc_phase", c_x=2.3, l2=l2)
        slow = []
        for c_x in (0.0, 0.5, 1.0, 1.5, 1.9):
            system = gs.raw_b("pbc_phase", 4.0, c_x=c_x, l2=l2)
            sub = system.dynamics[np.ix_(system.loop_mask, system.loop_mask)]
            slow.append(float(np.max(np.abs(np.linalg.eigvals(sub)))))
        assert all(u < v for u, v in zip(slow, slow[1:])), slow
        worst = max(abs(_bisect("droop_phase", c_x=c, l2=l2) - 5.0)
                    for c in (0.0, 0.5, 1.0, 1.5, 1.9, 2.3))
        elapsed = time.perf_counter() - t0
        assert worst <= 1e-5
        assert elapsed < 1.0
        rec.detail = "slow moduli %s, droop dev %.1e, %.2fs" % (
            [round(s, 3) for s in slow], worst, elapsed)


def test_two_bus_nonlinear_straddle(criterion):
    # with the exact solver and a 0.25 + j0.05 pu load, both the d = 0.6 rx
    # case and the c_x = 1.5 phase case converge at 0.95 a_crit and diverge
    # at 1.05 a_crit; the rx case blows up within 10 steps
    with criterion("two-bus-nonlinear-straddle") as rec:
        t0 = time.perf_counter()
        steps = {}
        for label, family, params in (
            ("rx", "pbc_rx", {"d": 0.6, "l1": 0.2}),
            ("phase", "pbc_phase", {"c_x": 1.5, "l2": 0.2}),
        ):
            a_crit = _bisect(family, **params)
            feeder, cfg = gs.two_bus_feeder(family, **params)
            sens = gs.build_sensitivity(feeder)
            for factor, should in ((0.95, False), (1.05, True)):
                gains = gs.uniform_gains(sens, cfg, "pbc", factor * a_crit)
                scn = SimScenario(
                    feeder=feeder, config=cfg, kind="pbc", gains=gains,
                    loads={"load": [0.25, 0.05]},
                    v_ref=0.98, delta_ref_deg=-0.036,
                    v_init=0.963, delta_init_deg=-0.0395,
                    horizon=200, solver="exact_two_bus",
                    divergence_threshold=0.1,
                )
                t = run(scn)
                assert (t.divergence_step is not None) == should, (label, factor, t.reason)
                if should:
                    steps[label] = t.divergence_step
        elapsed = time.perf_counter() - t0
        assert 8.5 < _bisect("pbc_rx", d=0.6, l1=0.2) < 8.7
        assert steps["rx"] <= 10
        assert elapsed < 5.0
        rec.detail = "rx diverges at step %d, phase at step %d, %.2fs" % (
            steps["rx"], steps["phase"], elapsed)
        # the phase-ratio instability is expected to set in later than the
        # rx one; see the divergence-onset note in the decision ledger
        assert steps["phase"] > steps["rx"], rec.detail


def _matrix_power_error(feeder, cfg, kind, gains, system, sens):
    act, n = sens.active, sens.n_states
    M = system.dynamics
    horizon = 25
    worst = 0.0
    if kind == "droop":
        scn = SimScenario(feeder=feeder, config=cfg, kind=kind, gains=gains,
                          v_init=0.97, horizon=horizon)
        t = run(scn)
        e = np.zeros(n)
        e[act] = 0.97 ** 2 - 1.0
        for k in range(1, horizon + 1):
            e = M @ e
            worst = max(worst, np.max(np.abs((t.vmag[k] ** 2 - 1.0)[act] - e[act])))
    else:
        v_ref, d_ref = 0.96, np.deg2rad(0.2)
        scn = SimScenario(feeder=feeder, config=cfg, kind=kind, gains=gains,
                          v_ref=v_ref, delta_ref_deg=np.rad2deg(d_ref), horizon=horizon)
        t = run(scn)
        e = np.zeros(2 * n)
        e[:n][act] = 1.0 - v_ref ** 2
        e[n:][act] = -d_ref
        offs = np.tile([0.0, -120.0, 120.0], n // 3)
        for k in range(1, horizon + 1):
            e = M @ e
            ev = (t.vmag[k] ** 2 - v_ref ** 2)[act] - e[:n][act]
            ed = (np.deg2rad(t.angle_deg[k] - offs) - d_ref)[act] - e[n:][act]
            worst = max(worst, np.max(np.abs(ev)), np.max(np.abs(ed)))
    return worst


def test_linear_model_oracle(criterion, rng):
    # simulated trajectories with the linear solver equal the matrix-power
    # trajectory of the closed-loop dynamics on 100 random small systems
    with criterion("linear-model-oracle") as rec:
        t0 = time.perf_counter()
        worst = 0.0
        for trial in range(100):
            if trial < 70:
                family = FAMILIES[trial % len(FAMILIES)]
                kind = family.split("_")[0]
                params = _draw_params(family, rng)
                feeder, cfg = gs.two_bus_feeder(family, **params)
                sens = gs.build_sensitivity(feeder)
                a = 0.8 * _bisect(family, **params) * float(rng.uniform(0.3, 1.0))
                gains = gs.uniform_gains(sens, cfg, kind, a)
                system = gs.build_closed_loop(sens, cfg, gains)
            else:
                kind = "droop"
                feeder = random_radial_feeder(rng, n_lines=int(rng.integers(3, 8)))
                nodes = list(feeder.node_ids())
                pick = sorted(rng.choice(len(nodes), size=min(2, len(nodes)),
                                         replace=False))
                cfg = gs.colocated_config([nodes[i] for i in pick], feeder)
                sens = gs.build_sensitivity(feeder)
                a = float(rng.uniform(0.1, 0.6))
                while True:
                    gains = gs.uniform_gains(sens, cfg, kind, a)
                    system = gs.build_closed_loop(sens, cfg, gains)
                    if gs.spectral_radius(system) < 0.98:
                        break
                    a /= 2.0
            worst = max(worst, _matrix_power_error(feeder, cfg, kind, gains,
                                                   system, sens))
        elapsed = time.perf_counter() - t0
        assert worst <= 1e-10
        assert elapsed < 5.0
        rec.detail = "worst |sim - M^k e0| %.1e over 100 systems, %.2fs" % (worst, elapsed)


def test_disturbance_steady_state(criterion, rng):
    # dSS = (I + BF)^-1 dV matches the iterated droop fixed point after
    # 1e4 steps, and F = 0 passes the shift through unchanged
    with criterion("disturbance-steady-state") as rec:
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(50):
            feeder = random_radial_feeder(rng, n_lines=int(rng.integers(2, 7)))
            nodes = list(feeder.node_ids())
            k = int(rng.integers(1, min(3, len(nodes)) + 1))
            pick = sorted(rng.choice(len(nodes), size=k, replace=False))
            cfg = gs.colocated_config([nodes[i] for i in pick], feeder)
            sens = gs.build_sensitivity(feeder)
            a = float(rng.uniform(0.1, 1.0))
            while True:
                gains = gs.uniform_gains(sens, cfg, "droop", a)
                system = gs.build_closed_loop(sens, cfg, gains)
                if gs.spectral_radius(system) < 0.95:
                    break
                a /= 2.0
            n = sens.n_states
            dv = np.zeros(n)
            dv[sens.active] = rng.uniform(-0.05, 0.05, size=int(np.sum(sens.active)))
            want = gs.disturbance_response(system, dv)
            v = np.zeros(n)
            D = system.dynamics
            for _ in range(10000):
                v = D @ v + dv
            worst = max(worst, float(np.max(np.abs(v - want))))
        feeder = random_radial_feeder(rng, n_lines=4)
        cfg = gs.colocated_config(list(feeder.node_ids())[:2], feeder)
        sens = gs.build_sensitivity(feeder)
        system = gs.build_closed_loop(sens, cfg, gs.uniform_gains(sens, cfg, "droop", 0.0))
        dv = np.zeros(sens.n_states)
        dv[sens.active] = 0.03
        assert np.array_equal(gs.disturbance_response(system, dv), dv)
        elapsed = time.perf_counter() - t0
        assert worst <= 1e-8
        assert elapsed < 5.0
        rec.detail = "worst |iterate - closed form| %.1e over 50 systems, %.2fs" % (
            worst, elapsed)


def test_ratio_scaling_identity(criterion, rng):
    # scale_feeder_ratios keeps every line's L2 and multiplies the targeted
    # ratio by the factor; scaling by 1.0 can neither help nor hurt goodness
    with criterion("ratio-scaling-identity") as rec:
        feeder = random_radial_feeder(rng, n_lines=20, full_phase=True)
        worst_l2 = 0.0
        worst_ratio = 0.0
        for which in ("rx", "phase"):
            for factor in (0.5, 1.5):
                scaled = gs.scale_feeder_ratios(feeder, which, factor)
                for ln0, ln1 in zip(feeder.lines, scaled.lines):
                    worst_l2 = max(worst_l2, abs(gs.sigma1(ln1.imp.z)
                                                 - gs.sigma1(ln0.imp.z)))
                    if which == "rx":
                        r0, r1 = gs.rx_ratio(ln0.imp), gs.rx_ratio(ln1.imp)
                    else:
                        r0, r1 = gs.phase_ratio(ln0.imp)[0], gs.phase_ratio(ln1.imp)[0]
                    m = np.isfinite(r0)
                    assert np.allclose(r1[m], factor * r0[m], rtol=1e-12, atol=1e-14)
                    worst_ratio = max(worst_ratio,
                                      float(np.max(np.abs(r1[m] - factor * r0[m]))))
        assert worst_l2 <= 1e-10
        res = gs.cross_apply_experiment(feeder, "pbc", 1, ratio="rx", factor=1.0,
                                        trials=5,
                                        spec=SamplingSpec(num_samples=10, seed=0),
                                        budget=50)
        assert res.support == 0 and res.contradict == 0
        rec.detail = "max L2 drift %.1e, max ratio err %.1e, identity 0/0" % (
            worst_l2, worst_ratio)


def test_cross_application_direction(criterion, ieee123):
    # gains tuned on the original feeder lose goodness on the 1.5x rx copy
    # in strictly more trials than the reverse transfer, for m = 1 and 5
    with criterion("cross-application-direction") as rec:
        t0 = time.perf_counter()
        spec = SamplingSpec(num_samples=40, seed=0)
        tallies = {}
        for m in (1, 5):
            res = gs.cross_apply_experiment(ieee123, "pbc", m, ratio="rx",
                                            factor=1.5, trials=40, spec=spec,
                                            budget=500)
            tallies[m] = (res.support, res.contradict)
        elapsed = time.perf_counter() - t0
        assert elapsed < 300.0
        rec.detail = "m=1 support %d > contradict %d, m=5 %d > %d, %.1fs" % (
            tallies[1] + tallies[5] + (elapsed,))
        for m in (1, 5):
            support, contradict = tallies[m]
            assert support > contradict, (m, support, contradict)


def test_branch_comparison_direction(criterion, ieee123):
    # anchoring the fourth unit on the high-rx underground branch (node_66)
    # reddens far more of the map than the low-ratio control spot (node_74)
    with criterion("branch-comparison-direction") as rec:
        t0 = time.perf_counter()
        chi1 = ["node_8", "node_53", "node_57", "node_66"]
        chi2 = ["node_8", "node_53", "node_57", "node_74"]
        spec = SamplingSpec(num_samples=100, seed=0)
        red = {}
        for kind in ("pbc", "droop"):
            r1 = gs.cpp(ieee123, gs.colocated_config(chi1, ieee123), kind, spec)
            r2 = gs.cpp(ieee123, gs.colocated_config(chi2, ieee123), kind, spec)
            red[kind] = (r1.counts["red"], r2.counts["red"])
        elapsed = time.perf_counter() - t0
        assert elapsed < 600.0
        rec.detail = "pbc red %d > %d, droop red %d > %d, %.1fs" % (
            red["pbc"] + red["droop"] + (elapsed,))
        for kind in ("pbc", "droop"):
            high, low = red[kind]
            assert high > low, (kind, high, low)
