"""IEEE 123-node test feeder, converted to the package's feeder format.

The standard feeder description is embedded below: the line-segment table
(node pair, length in feet, configuration id), the twelve line
configurations as 3x3 phase impedance matrices in ohms per mile, and the
normally-closed switches. Configurations 2-6 share conductors and spacing
with configuration 1 and differ only in which phase hangs at which crossarm
position, so they are generated from the position data and the phasing
string. Closed switches become short resistive jumpers; the voltage
regulators and the 61-610 transformer are not modeled (lines carrying a
regulator are plain lines).

Per-unit conversion uses the declared bases (default 4.16 kV, 5 MVA).
"""

from __future__ import annotations

import numpy as np

from .feeder import Feeder, Line, LineImpedance, PhaseSet

# crossarm position data for the 336,400 26/7 ACSR + 4/0 neutral overhead
# configurations (ohms/mile): self impedance per position, mutual per pair
_POS_SELF = [0.4576 + 1.0780j, 0.4666 + 1.0482j, 0.4615 + 1.0651j]
_POS_MUT = {(0, 1): 0.1560 + 0.5017j, (1, 2): 0.1580 + 0.4236j, (0, 2): 0.1535 + 0.3849j}

_PH = {"A": 0, "B": 1, "C": 2}


def _overhead(phasing):
    z = np.zeros((3, 3), dtype=complex)
    for p, ph in enumerate(phasing):
        z[_PH[ph], _PH[ph]] = _POS_SELF[p]
    for (p, q), m in _POS_MUT.items():
        i, j = _PH[phasing[p]], _PH[phasing[q]]
        z[i, j] = z[j, i] = m
    return z


def _single(phase, zval=1.3368 + 1.3343j):
    z = np.zeros((3, 3), dtype=complex)
    z[_PH[phase], _PH[phase]] = zval
    return z


def _two_phase(pair):
    z = np.zeros((3, 3), dtype=complex)
    i, j = _PH[pair[0]], _PH[pair[1]]
    z[i, i] = _POS_SELF[0]
    z[j, j] = _POS_SELF[1] if pair == "AB" else _POS_SELF[2]
    z[i, j] = z[j, i] = 0.1535 + 0.3849j
    return z


_UNDERGROUND = np.array(
    [
        [1.5209 + 0.7521j, 0.5198 + 0.2775j, 0.4924 + 0.2157j],
        [0.5198 + 0.2775j, 1.5329 + 0.7162j, 0.5198 + 0.2775j],
        [0.4924 + 0.2157j, 0.5198 + 0.2775j, 1.5209 + 0.7521j],
    ]
)

CONFIGS = {
    1: ("ABC", _overhead("ABC")),
    2: ("ABC", _overhead("CAB")),
    3: ("ABC", _overhead("BCA")),
    4: ("ABC", _overhead("CBA")),
    5: ("ABC", _overhead("BAC")),
    6: ("ABC", _overhead("ACB")),
    7: ("AC", _two_phase("AC")),
    8: ("AB", _two_phase("AB")),
    9: ("A", _single("A")),
    10: ("B", _single("B")),
    11: ("C", _single("C")),
    12: ("ABC", _UNDERGROUND),
}

# from, to, length (ft), config
LINE_SEGMENTS = [
    (1, 2, 175, 10), (1, 3, 250, 11), (1, 7, 300, 1), (3, 4, 200, 11),
    (3, 5, 325, 11), (5, 6, 250, 11), (7, 8, 200, 1), (8, 12, 225, 10),
    (8, 9, 225, 9), (8, 13, 300, 1), (9, 14, 425, 9), (13, 34, 150, 11),
    (13, 18, 825, 2), (14, 11, 250, 9), (14, 10, 250, 9), (15, 16, 375, 11),
    (15, 17, 350, 11), (18, 19, 250, 9), (18, 21, 300, 2), (19, 20, 325, 9),
    (21, 22, 525, 10), (21, 23, 250, 2), (23, 24, 550, 11), (23, 25, 275, 2),
    (25, 26, 350, 7), (25, 28, 200, 2), (26, 27, 275, 7), (26, 31, 225, 11),
    (27, 33, 500, 9), (28, 29, 300, 2), (29, 30, 350, 2), (30, 250, 200, 2),
    (31, 32, 300, 11), (34, 15, 100, 11), (35, 36, 650, 8), (35, 40, 250, 1),
    (36, 37, 300, 9), (36, 38, 250, 10), (38, 39, 325, 10), (40, 41, 325, 11),
    (40, 42, 250, 1), (42, 43, 500, 10), (42, 44, 200, 1), (44, 45, 200, 9),
    (44, 47, 250, 1), (45, 46, 300, 9), (47, 48, 150, 4), (47, 49, 250, 4),
    (49, 50, 250, 4), (50, 51, 250, 4), (52, 53, 200, 1), (53, 54, 125, 1),
    (54, 55, 275, 1), (54, 57, 350, 3), (55, 56, 275, 1), (57, 58, 250, 10),
    (57, 60, 750, 3), (58, 59, 250, 10), (60, 61, 550, 5), (60, 62, 250, 12),
    (62, 63, 175, 12), (63, 64, 350, 12), (64, 65, 425, 12), (65, 66, 325, 12),
    (67, 68, 200, 9), (67, 72, 275, 3), (67, 97, 250, 3), (68, 69, 275, 9),
    (69, 70, 325, 9), (70, 71, 275, 9), (72, 73, 275, 11), (72, 76, 200, 3),
    (73, 74, 350, 11), (74, 75, 400, 11), (76, 77, 400, 6), (76, 86, 700, 3),
    (77, 78, 100, 6), (78, 79, 225, 6), (78, 80, 475, 6), (80, 81, 475, 6),
    (81, 82, 250, 6), (81, 84, 675, 11), (82, 83, 250, 6), (84, 85, 475, 11),
    (86, 87, 450, 6), (87, 88, 175, 9), (87, 89, 275, 6), (89, 90, 225, 10),
    (89, 91, 225, 6), (91, 92, 300, 11), (91, 93, 225, 6), (93, 94, 275, 9),
    (93, 95, 300, 6), (95, 96, 200, 10), (97, 98, 275, 3), (98, 99, 550, 3),
    (99, 100, 300, 3), (100, 450, 800, 3), (101, 102, 225, 11), (101, 105, 275, 3),
    (102, 103, 325, 11), (103, 104, 700, 11), (105, 106, 225, 10), (105, 108, 325, 3),
    (106, 107, 575, 10), (108, 109, 450, 9), (108, 300, 1000, 3), (109, 110, 300, 9),
    (110, 111, 575, 9), (110, 112, 125, 9), (112, 113, 525, 9), (113, 114, 325, 9),
    (135, 35, 375, 4), (149, 1, 400, 1), (152, 52, 400, 1), (160, 67, 350, 6),
    (197, 101, 250, 3),
]

# normally closed switches (parent side first); tiny symmetric jumpers
CLOSED_SWITCHES = [(150, 149), (13, 152), (18, 135), (60, 160), (97, 197)]

SUBSTATION = 150
SWITCH_Z_PU = 1e-4 + 1e-4j
FT_PER_MILE = 5280.0


def node_name(num):
    return "node_%d" % num


def build_ieee123(base_kv=4.16, base_mva=5.0):
    """Return the feeder in per-unit on the given bases."""
    z_base = base_kv * base_kv / base_mva

    phase_of = {SUBSTATION: PhaseSet.from_string("ABC")}
    lines = []
    for frm, to, length, cfg in LINE_SEGMENTS:
        phases_str, z_mile = CONFIGS[cfg]
        phases = PhaseSet.from_string(phases_str)
        z_pu = z_mile * (length / FT_PER_MILE) / z_base
        lines.append(Line(node_name(frm), node_name(to), LineImpedance(z_pu, phases)))
        phase_of[to] = phases
        phase_of.setdefault(frm, phases)
    for frm, to in CLOSED_SWITCHES:
        z = np.diag([SWITCH_Z_PU] * 3).astype(complex)
        lines.append(Line(node_name(frm), node_name(to), LineImpedance(z, PhaseSet.from_string("ABC"))))
        phase_of[to] = PhaseSet.from_string("ABC")
        phase_of.setdefault(frm, PhaseSet.from_string("ABC"))

    # a node's phase set is its supply line's; parent rows override defaults
    for frm, to, _, cfg in LINE_SEGMENTS:
        phase_of[to] = PhaseSet.from_string(CONFIGS[cfg][0])

    nodes = {node_name(k): phase_of[k] for k in sorted(phase_of)}
    # keep the substation first for readability
    ordered = {node_name(SUBSTATION): nodes.pop(node_name(SUBSTATION))}
    ordered.update(nodes)
    return Feeder(base_kv=base_kv, base_mva=base_mva, substation=node_name(SUBSTATION), nodes=ordered, lines=lines)
