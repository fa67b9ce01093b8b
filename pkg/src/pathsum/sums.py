"""The path-sum value type and its constructors.

A PathSum represents a linear operator C^{2^m} -> C^{2^n} symbolically as

    2^(-sqrt2/2) * sum over path variables y of e^{2*pi*i*phase(x,y)} |out(x,y)>

with multilinear Boolean outputs and a dyadic phase polynomial.  The global
scalar lives in sqrt2 together with the constant term of the phase.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .algebra import (
    BoolPoly,
    DYADIC_ZERO,
    Dyadic,
    HALF,
    Monomial,
    PATH,
    PhasePoly,
    Var,
    _expand_scaled,
    mono_sort_key,
    parse_var,
    var_index,
    var_kind,
    var_name,
    var_sort_key,
    xvar,
    yvar,
)
from .circuit import Circuit, Gate, gate_angle
from .errors import DimensionMismatch, ResourceLimit, SumFormatError

#: Default cap on total enumerated bits in the dense oracles.
DEFAULT_ORACLE_BITS = 22


@dataclass(frozen=True, slots=True)
class PathSum:
    inputs: int
    out: tuple[BoolPoly, ...]
    pathvars: tuple[Var, ...]
    sqrt2: int
    phase: PhasePoly

    def __post_init__(self):
        idx = [var_index(v) for v in self.pathvars]
        assert all(var_kind(v) == PATH for v in self.pathvars)
        assert idx == sorted(idx) and len(set(idx)) == len(idx)

    @property
    def m(self) -> int:
        return self.inputs

    @property
    def n(self) -> int:
        return len(self.out)

    @property
    def k(self) -> int:
        return len(self.pathvars)

    def validate(self) -> "PathSum":
        """Check the variable-closure invariant; used at API boundaries."""
        allowed = {xvar(i) for i in range(self.inputs)} | set(self.pathvars)
        used = self.phase.variables()
        for f in self.out:
            used |= f.variables()
        stray = used - allowed
        if stray:
            raise SumFormatError(f"stray variables {[var_name(v) for v in stray]}")
        return self

    def __str__(self) -> str:
        binder = ",".join(var_name(v) for v in self.pathvars)
        kets = ", ".join(str(f) for f in self.out)
        return (
            f"2^(-{self.sqrt2}/2)"
            + (f" Σ_{{{binder}}}" if binder else "")
            + f" e^2πi({self.phase}) |{kets}⟩"
        )


def identity(n: int) -> PathSum:
    return PathSum(n, tuple(BoolPoly.var(xvar(i)) for i in range(n)), (), 0, PhasePoly.zero())


def gate_sum(g: Gate) -> PathSum:
    """The defining path sum of a gate, over local variables x0..x(r-1)."""
    r = len(g.qubits)
    xs = [BoolPoly.var(xvar(i)) for i in range(r)]
    outs = list(xs)
    phase = PhasePoly.zero()
    paths: tuple[Var, ...] = ()
    s = 0
    name = g.name
    if name == "x":
        outs[0] = xs[0] ^ BoolPoly.one()
    elif name == "h":
        y = yvar(0)
        paths = (y,)
        s = 1
        phase = PhasePoly.of([(HALF, (xvar(0), y))])
        outs[0] = BoolPoly.var(y)
    elif name == "cx":
        outs[1] = xs[0] ^ xs[1]
    elif name == "swap":
        outs = [xs[1], xs[0]]
    elif name in ("ccx", "mcx"):
        controls = frozenset(xvar(i) for i in range(r - 1))
        outs[r - 1] = xs[r - 1] ^ BoolPoly(frozenset((controls,)))
    elif name == "gphase":
        phase = PhasePoly.constant(g.angle)
    else:
        # diagonal rotations: z, s, sdg, t, tdg, cz, ccz, rz, crz, mcrz
        theta = gate_angle(g)
        mono = frozenset(xvar(i) for i in range(r))
        phase = PhasePoly.of([(theta, mono)])
    return PathSum(r, tuple(outs), paths, s, phase)


def _fresh_base(p: PathSum) -> int:
    return var_index(p.pathvars[-1]) + 1 if p.pathvars else 0


def compose(after: PathSum, before: PathSum) -> PathSum:
    """Sequential composition: the operator `after` applied to the output of
    `before`.  `after`'s path variables are freshened, its inputs substituted
    by `before`'s outputs; phases add and prefactors multiply."""
    if before.n != after.inputs:
        raise DimensionMismatch(f"cannot compose: {before.n} outputs into {after.inputs} inputs")
    base = _fresh_base(before)
    mapping: dict[Var, BoolPoly] = {
        v: BoolPoly.var(yvar(base + r)) for r, v in enumerate(after.pathvars)
    }
    for i in range(after.inputs):
        mapping[xvar(i)] = before.out[i]
    pathvars = before.pathvars + tuple(yvar(base + r) for r in range(after.k))
    assert len(set(pathvars)) == len(pathvars)
    phase = before.phase + after.phase.subst_many(mapping)
    outs = tuple(f.subst_many(mapping) for f in after.out)
    return PathSum(before.inputs, outs, pathvars, before.sqrt2 + after.sqrt2, phase)


def tensor(a: PathSum, b: PathSum) -> PathSum:
    """Parallel composition; `a`'s qubits come first."""
    base = _fresh_base(a)
    mapping: dict[Var, BoolPoly] = {
        v: BoolPoly.var(yvar(base + r)) for r, v in enumerate(b.pathvars)
    }
    for i in range(b.inputs):
        mapping[xvar(i)] = BoolPoly.var(xvar(a.inputs + i))
    pathvars = a.pathvars + tuple(yvar(base + r) for r in range(b.k))
    phase = a.phase + b.phase.subst_many(mapping)
    outs = a.out + tuple(f.subst_many(mapping) for f in b.out)
    return PathSum(a.inputs + b.inputs, outs, pathvars, a.sqrt2 + b.sqrt2, phase)


def dagger(p: PathSum) -> PathSum:
    """The adjoint as a path sum: the old inputs become summed variables, and
    n fresh variables z force the old outputs onto the new inputs via
    (1/2) z_j (f_j + w_j) couplings; the phase is negated."""
    m, n, k = p.inputs, p.n, p.k
    rename: dict[Var, Var] = {xvar(i): yvar(i) for i in range(m)}
    for r, v in enumerate(p.pathvars):
        rename[v] = yvar(m + r)
    zs = [yvar(m + k + j) for j in range(n)]

    terms: dict = {}

    def add(mono: Monomial, c: Dyadic) -> None:
        cur = terms.get(mono, DYADIC_ZERO) + c
        if cur:
            terms[mono] = cur
        else:
            terms.pop(mono, None)

    for mono, c in p.phase.terms.items():
        add(frozenset(rename[v] for v in mono), -c)
    for j, f in enumerate(p.out):
        zj = zs[j]
        for mono in f.monomials:
            add(frozenset(rename[v] for v in mono) | {zj}, HALF)
        add(frozenset((zj, xvar(j))), HALF)

    outs = tuple(BoolPoly.var(yvar(i)) for i in range(m))
    pathvars = tuple(yvar(i) for i in range(m + k)) + tuple(zs)
    return PathSum(n, outs, pathvars, p.sqrt2 + 2 * n, PhasePoly(terms))


def rename_paths(p: PathSum) -> PathSum:
    """Renumber the summed variables to y0..y(k-1) in ascending order (bound
    variables are nameless; this is the canonical labelling)."""
    if all(var_index(v) == r for r, v in enumerate(p.pathvars)):
        return p
    rename = {v: yvar(r) for r, v in enumerate(p.pathvars)}

    def rn(mono: Monomial) -> Monomial:
        return frozenset(rename.get(v, v) for v in mono)

    return PathSum(
        p.inputs,
        tuple(BoolPoly(frozenset(rn(mo) for mo in f.monomials)) for f in p.out),
        tuple(yvar(r) for r in range(p.k)),
        p.sqrt2,
        PhasePoly({rn(mo): c for mo, c in p.phase.terms.items()}),
    )


# ---------------------------------------------------------------- oracles

def _bit_positions(p: PathSum) -> dict[Var, int]:
    """Input x_i sits above the path bits, MSB first; path rank r at bit k-1-r."""
    k = p.k
    pos = {xvar(i): k + (p.inputs - 1 - i) for i in range(p.inputs)}
    for r, v in enumerate(p.pathvars):
        pos[v] = k - 1 - r
    return pos


def _poly_values(f: BoolPoly, assign: np.ndarray, pos: dict[Var, int]) -> np.ndarray:
    val = np.zeros(assign.shape, dtype=bool)
    for mono in f.monomials:
        mask = 0
        for v in mono:
            mask |= 1 << pos[v]
        val ^= (assign & mask) == mask
    return val


def _phase_amplitudes(p: PathSum, assign: np.ndarray, pos: dict[Var, int]) -> np.ndarray:
    d = max((c.log2den for c in p.phase.terms.values()), default=0)
    num = np.zeros(assign.shape, dtype=np.int64)
    for mono, c in p.phase.terms.items():
        mask = 0
        for v in mono:
            mask |= 1 << pos[v]
        num += ((assign & mask) == mask) * (c.num << (d - c.log2den))
    return np.exp((2j * np.pi / (1 << d)) * (num % (1 << d))) * 2.0 ** (-p.sqrt2 / 2)


def evaluate(p: PathSum, in_bits, out_bits, max_bits: int = DEFAULT_ORACLE_BITS) -> complex:
    """The amplitude <out|Psi|in> by direct summation over path assignments."""
    if len(in_bits) != p.inputs or len(out_bits) != p.n:
        raise DimensionMismatch("bit vector lengths do not match the sum")
    if p.k > max_bits:
        raise ResourceLimit(f"{p.k} path variables exceeds oracle cap {max_bits}")
    pos = _bit_positions(p)
    assign = np.arange(1 << p.k, dtype=np.int64)
    for i, b in enumerate(in_bits):
        if b:
            assign |= 1 << pos[xvar(i)]
    match = np.ones(assign.shape, dtype=bool)
    for j, f in enumerate(p.out):
        match &= _poly_values(f, assign, pos) == bool(out_bits[j])
    amps = _phase_amplitudes(p, assign, pos)
    return complex(amps[match].sum())


def to_matrix(p: PathSum, max_bits: int = DEFAULT_ORACLE_BITS) -> np.ndarray:
    """The dense 2^n x 2^m matrix, column x = Psi|x>, by enumeration."""
    if p.inputs + p.k > max_bits:
        raise ResourceLimit(
            f"{p.inputs}+{p.k} enumerated bits exceeds oracle cap {max_bits}"
        )
    pos = _bit_positions(p)
    assign = np.arange(1 << (p.inputs + p.k), dtype=np.int64)
    rows = np.zeros(assign.shape, dtype=np.int64)
    for j, f in enumerate(p.out):
        rows |= _poly_values(f, assign, pos).astype(np.int64) << (p.n - 1 - j)
    cols = assign >> p.k
    amps = _phase_amplitudes(p, assign, pos)
    flat = rows << p.inputs | cols
    size = 1 << (p.n + p.inputs)
    re = np.bincount(flat, weights=amps.real, minlength=size)
    im = np.bincount(flat, weights=amps.imag, minlength=size)
    return (re + 1j * im).reshape(1 << p.n, 1 << p.inputs)


# -------------------------------------------------------------- simulation

def simulate(c: Circuit) -> PathSum:
    """Fold a circuit into a single path sum (tensor-padding each gate to the
    full width and composing left to right)."""
    width = c.width
    outs: list[BoolPoly] = [BoolPoly.var(xvar(i)) for i in range(width)]
    phase: dict = {}
    pathvars: list[Var] = []
    s = 0
    for g in c.gates:
        gs = gate_sum(g)
        mapping: dict[Var, BoolPoly] = {}
        for r, v in enumerate(gs.pathvars):
            fresh = yvar(len(pathvars) + r)
            mapping[v] = BoolPoly.var(fresh)
        for t, q in enumerate(g.qubits):
            mapping[xvar(t)] = outs[q]
        for mono, coeff in gs.phase.terms.items():
            base = []
            factors = []
            for v in mono:
                rep = mapping[v]
                w = rep.is_var()
                if w is not None:
                    base.append(w)
                else:
                    factors.append(rep)
            _expand_scaled(phase, coeff, frozenset(base), factors)
        new_outs = [f.subst_many(mapping) for f in gs.out]
        for t, q in enumerate(g.qubits):
            outs[q] = new_outs[t]
        pathvars.extend(yvar(len(pathvars) + r) for r in range(gs.k))
        s += gs.sqrt2
    return PathSum(width, tuple(outs), tuple(pathvars), s, PhasePoly(phase))


# ------------------------------------------------------------- file format

def to_json_dict(p: PathSum) -> dict:
    def mono_list(m: Monomial) -> list[str]:
        return [var_name(v) for v in sorted(m, key=var_sort_key)]

    ordered = sorted(p.phase.terms, key=mono_sort_key, reverse=True)
    return {
        "inputs": p.inputs,
        "outputs": p.n,
        "sqrt2": p.sqrt2,
        "phase": [
            {
                "num": p.phase.terms[m].num,
                "log2den": p.phase.terms[m].log2den,
                "mono": mono_list(m),
            }
            for m in ordered
        ],
        "out": [
            [mono_list(m) for m in sorted(f.monomials, key=mono_sort_key, reverse=True)]
            for f in p.out
        ],
    }


def to_json(p: PathSum) -> str:
    return json.dumps(to_json_dict(p), indent=2)


def _parse_mono(names, m: int) -> Monomial:
    vs = []
    for name in names:
        v = parse_var(name)
        if var_kind(v) not in (0, 1):
            raise SumFormatError(f"bad variable {name!r}")
        if var_kind(v) == 0 and var_index(v) >= m:
            raise SumFormatError(f"input {name!r} out of range")
        vs.append(v)
    mono = frozenset(vs)
    if len(mono) != len(vs):
        raise SumFormatError(f"repeated variable in monomial {names}")
    return mono


def from_json_dict(d: dict) -> PathSum:
    try:
        m = int(d["inputs"])
        n = int(d["outputs"])
        s = int(d["sqrt2"])
        phase_entries = d["phase"]
        out_entries = d["out"]
    except (KeyError, TypeError, ValueError) as e:
        raise SumFormatError(f"malformed path-sum JSON: {e}") from None
    if m < 0 or n < 0 or len(out_entries) != n:
        raise SumFormatError("inconsistent dimensions")
    terms: dict = {}
    for entry in phase_entries:
        c = Dyadic(int(entry["num"]), int(entry["log2den"]))
        if (c.num, c.log2den) != (int(entry["num"]), int(entry["log2den"])):
            raise SumFormatError(f"non-canonical coefficient {entry['num']}/2^{entry['log2den']}")
        mono = _parse_mono(entry["mono"], m)
        if mono in terms:
            raise SumFormatError(f"duplicate phase monomial {entry['mono']}")
        if c:
            terms[mono] = c
        else:
            raise SumFormatError("zero coefficient stored in phase")
    outs = []
    for monos in out_entries:
        parsed = [_parse_mono(names, m) for names in monos]
        if len(set(parsed)) != len(parsed):
            raise SumFormatError("duplicate monomial in an output")
        outs.append(BoolPoly(frozenset(parsed)))
    used = set()
    for mo in terms:
        used |= mo
    for f in outs:
        used |= f.variables()
    pathvars = tuple(sorted((v for v in used if var_kind(v) == PATH), key=var_index))
    return PathSum(m, tuple(outs), pathvars, s, PhasePoly(terms)).validate()


def from_json(text: str) -> PathSum:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SumFormatError(f"invalid JSON: {e}") from None
    return from_json_dict(d)
