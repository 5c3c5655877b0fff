"""Shared fixtures and helpers for the test suite."""

import contextlib

import numpy as np
import pytest

from gridstab import Feeder, Line, LineImpedance, PhaseSet, build_ieee123


PHASE_NAMES = "ABC"


def random_radial_feeder(rng, n_lines=12, full_phase=False):
    """Random radial feeder rooted at 'sub'.

    Each new node hangs off a uniformly chosen existing node; line phases are
    a random nonempty subset of what the parent can supply (or ABC everywhere
    when full_phase is set).  Impedances are symmetric with positive diagonal
    r and x restricted to the line's phases.
    """
    avail = {"sub": "ABC"}
    nodes = {"sub": "ABC"}
    lines = []
    order = ["sub"]
    for k in range(n_lines):
        parent = order[rng.integers(0, len(order))]
        sup = avail[parent]
        if full_phase:
            phs = "ABC"
            if sup != "ABC":
                parent, sup = "sub", "ABC"
        else:
            take = 1 + rng.integers(0, len(sup))
            idx = sorted(rng.choice(len(sup), size=take, replace=False))
            phs = "".join(sup[i] for i in idx)
        child = "n%d" % k
        z = np.zeros((3, 3), dtype=complex)
        pidx = [PHASE_NAMES.index(c) for c in phs]
        for i in pidx:
            x = rng.uniform(0.05, 0.3)
            d = rng.uniform(0.2, 1.0)
            z[i, i] = d * x + 1j * x
        for ai in range(len(pidx)):
            for bi in range(ai + 1, len(pidx)):
                i, j = pidx[ai], pidx[bi]
                xm = rng.uniform(0.0, 0.3) * min(z[i, i].imag, z[j, j].imag)
                rm = rng.uniform(0.0, 0.5) * xm
                z[i, j] = z[j, i] = rm + 1j * xm
        nodes[child] = phs
        avail[child] = phs
        order.append(child)
        lines.append(Line(parent, child, LineImpedance(z, PhaseSet.from_string(phs))))
    return Feeder(
        base_kv=4.16,
        base_mva=1.0,
        substation="sub",
        nodes={nid: PhaseSet.from_string(phs) for nid, phs in nodes.items()},
        lines=lines,
    )


@pytest.fixture(scope="session")
def ieee123():
    return build_ieee123()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# acceptance reporting: each criterion in test_acceptance.py runs inside a
# `criterion(...)` block, and the terminal summary prints one PASS/FAIL line
# per criterion regardless of where inside the block an assertion tripped.

ACCEPTANCE_RESULTS = []


class _CriterionRecord:
    def __init__(self, name):
        self.name = name
        self.detail = ""


@pytest.fixture
def criterion():
    @contextlib.contextmanager
    def gate(name):
        rec = _CriterionRecord(name)
        try:
            yield rec
        except BaseException as exc:
            text = str(exc).splitlines()
            note = rec.detail or (text[0] if text else repr(exc))
            ACCEPTANCE_RESULTS.append((name, False, note))
            raise
        ACCEPTANCE_RESULTS.append((name, True, rec.detail))

    return gate


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        line = "ACCEPTANCE %s %s" % ("PASS" if ok else "FAIL", name)
        if detail:
            line += "  [%s]" % detail
        terminalreporter.write_line(line)
