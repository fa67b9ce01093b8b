"""Circuit IR: gates, the line-based text format, statistics, and seeded
random circuit generation.

Text format: a mandatory "qubits N" header followed by one gate per line,
"#" starting a comment line.  Angles are dyadic fractions of a full turn,
written "a/2^m" or "a/b" with b a power of two; canonical printing always
uses "a/2^m".
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass

from .algebra import Dyadic, HALF, QUARTER, EIGHTH, parse_dyadic
from .errors import CircuitSyntaxError, WidthError

# name -> qubit arity; None means variadic (>= 2: controls then target)
GATE_ARITY = {
    "x": 1, "z": 1, "s": 1, "sdg": 1, "t": 1, "tdg": 1, "h": 1,
    "cx": 2, "cz": 2, "swap": 2,
    "ccx": 3, "ccz": 3,
    "mcx": None,
    "rz": 1, "crz": 2, "mcrz": None,
    "gphase": 0,
}

ANGLED_GATES = frozenset({"rz", "crz", "mcrz", "gphase"})

#: Fixed rotation names and their angles, used for canonical gate naming.
_FIXED_ANGLE = {
    "z": HALF, "s": QUARTER, "sdg": Dyadic(3, 2), "t": EIGHTH, "tdg": Dyadic(7, 3),
    "cz": HALF, "ccz": HALF,
}


@dataclass(frozen=True, slots=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    angle: Dyadic | None = None

    def __post_init__(self):
        arity = GATE_ARITY.get(self.name)
        if self.name not in GATE_ARITY:
            raise ValueError(f"unknown gate {self.name!r}")
        if arity is None:
            if len(self.qubits) < 2:
                raise ValueError(f"{self.name} needs at least one control")
        elif len(self.qubits) != arity:
            raise ValueError(f"{self.name} takes {arity} qubits, got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.name} {self.qubits}")
        if (self.angle is not None) != (self.name in ANGLED_GATES):
            raise ValueError(f"angle mismatch for {self.name}")

    def dagger(self) -> "Gate":
        flip = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}
        if self.name in flip:
            return Gate(flip[self.name], self.qubits)
        if self.name in ANGLED_GATES:
            if self.name == "gphase":
                return Gate("gphase", (), -self.angle)
            return phase_gate(self.qubits, -self.angle)
        return self  # x, z, h, cx, cz, swap, ccx, ccz, mcx are self-adjoint

    def __str__(self) -> str:
        parts = [self.name]
        if self.angle is not None:
            parts.append(str(self.angle))
        parts.extend(str(q) for q in self.qubits)
        return " ".join(parts)


def phase_gate(qubits, angle: Dyadic) -> Gate:
    """A Z-rotation by `angle` turns controlled on all but the last qubit,
    under its canonical name (z/s/sdg/t/tdg, cz, ccz, else rz/crz/mcrz)."""
    qubits = tuple(qubits)
    if len(qubits) == 1:
        for name in ("z", "s", "sdg", "t", "tdg"):
            if _FIXED_ANGLE[name] == angle:
                return Gate(name, qubits)
        return Gate("rz", qubits, angle)
    if len(qubits) == 2:
        return Gate("cz", qubits) if angle == HALF else Gate("crz", qubits, angle)
    if len(qubits) == 3 and angle == HALF:
        return Gate("ccz", qubits)
    return Gate("mcrz", qubits, angle)


def controlled_x(controls, target: int) -> Gate:
    """An X on `target` controlled on `controls`, canonically named."""
    controls = tuple(controls)
    qubits = controls + (target,)
    if len(controls) == 0:
        return Gate("x", qubits)
    if len(controls) == 1:
        return Gate("cx", qubits)
    if len(controls) == 2:
        return Gate("ccx", qubits)
    return Gate("mcx", qubits)


def gate_angle(g: Gate) -> Dyadic | None:
    """The rotation angle of a diagonal gate, fixed names included."""
    if g.angle is not None:
        return g.angle
    return _FIXED_ANGLE.get(g.name)


@dataclass(frozen=True, slots=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.width:
                    raise WidthError(f"qubit {q} out of range in '{g}' (width {self.width})")

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.width != self.width:
            raise WidthError("cannot concatenate circuits of different widths")
        return Circuit(self.width, self.gates + other.gates)

    def dagger(self) -> "Circuit":
        return Circuit(self.width, tuple(g.dagger() for g in reversed(self.gates)))


def parse(text: str) -> Circuit:
    """Parse the circuit text format; raises CircuitSyntaxError / WidthError."""
    width = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if width is None:
            if tokens[0] != "qubits" or len(tokens) != 2 or not tokens[1].isdigit():
                raise CircuitSyntaxError("expected 'qubits N' header", lineno, 1)
            width = int(tokens[1])
            continue
        name = tokens[0]
        if name not in GATE_ARITY:
            raise CircuitSyntaxError(f"unknown gate {name!r}", lineno, 1)
        rest = tokens[1:]
        angle = None
        if name in ANGLED_GATES:
            if not rest:
                raise CircuitSyntaxError(f"{name} requires an angle", lineno, len(name) + 1)
            try:
                angle = parse_dyadic(rest[0])
            except ValueError as e:
                raise CircuitSyntaxError(str(e), lineno, len(name) + 2) from None
            rest = rest[1:]
        try:
            qubits = tuple(int(tok) for tok in rest)
        except ValueError:
            raise CircuitSyntaxError(f"bad qubit index in {line!r}", lineno, 1) from None
        try:
            g = Gate(name, qubits, angle)
        except ValueError as e:
            raise CircuitSyntaxError(str(e), lineno, 1) from None
        for q in qubits:
            if q >= width:
                raise WidthError(f"line {lineno}: qubit {q} exceeds width {width}")
        gates.append(g)
    if width is None:
        raise CircuitSyntaxError("missing 'qubits N' header", 1, 1)
    return Circuit(width, tuple(gates))


def to_text(c: Circuit) -> str:
    """Canonical text rendering; parse(to_text(c)) == c."""
    lines = [f"qubits {c.width}"]
    lines.extend(str(g) for g in c.gates)
    return "\n".join(lines) + "\n"


def random_circuit(kind: str, n: int, gates: int, seed: int) -> Circuit:
    """A seeded random circuit: gates drawn uniformly from {h, s, cx}
    ("clifford") or {h, s, cx, t} ("cliffordt"), qubits uniform without
    repetition."""
    kind = kind.lower()
    names = {"clifford": ("h", "s", "cx"), "cliffordt": ("h", "s", "cx", "t")}[kind]
    if n < 2:
        raise ValueError("need n >= 2")
    rng = random.Random(seed)
    out = []
    for _ in range(gates):
        name = rng.choice(names)
        arity = GATE_ARITY[name]
        out.append(Gate(name, tuple(rng.sample(range(n), arity))))
    return Circuit(n, tuple(out))


def stats(c: Circuit) -> dict:
    """Gate counts: total, per-name, T-count, and Hadamard layer count.

    H-layers are counted greedily: an H joins the open layer unless its
    qubit was already H'd in the layer or touched by a later gate.
    """
    names = Counter(g.name for g in c.gates)
    layers = 0
    open_qubits: set | None = None
    dirty: set = set()
    for g in c.gates:
        if g.name == "h":
            q = g.qubits[0]
            if open_qubits is None or q in open_qubits or q in dirty:
                layers += 1
                open_qubits = {q}
                dirty = set()
            else:
                open_qubits.add(q)
        elif open_qubits is not None:
            dirty.update(g.qubits)
    return {
        "total": len(c.gates),
        "counts": dict(names),
        "t_count": names.get("t", 0) + names.get("tdg", 0),
        "h_layers": layers,
    }
