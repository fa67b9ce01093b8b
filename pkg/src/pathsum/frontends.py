"""End-to-end pipelines: QFT specification sums, propositional-formula
encodings, tautology checking, equivalence verification, decompilation, and
the greedy Clifford re-synthesis pass."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .algebra import BoolPoly, Dyadic, HALF, PhasePoly, xvar, yvar
from .circuit import Circuit, Gate
from .clifford import synth_clifford
from .errors import DimensionMismatch, NonUnitary, PathsumError, ResourceLimit
from .extract import synthesize
from .rewrite import identity_phase, normalize
from .sums import (
    DEFAULT_ORACLE_BITS,
    PathSum,
    compose,
    dagger,
    simulate,
    to_matrix,
)

# ------------------------------------------------------------------- QFT

def qft_sum(n: int) -> PathSum:
    """The Fourier transform on n qubits as a specification sum:
    (1/sqrt(2^n)) sum_y e^{2 pi i x y / 2^n} |y>, with the integer product
    expanded multilinearly (MSB-first indexing)."""
    if n < 1:
        raise ValueError("n >= 1")
    terms = []
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            if j + k > n:
                terms.append((Dyadic(1, j + k - n), (xvar(j - 1), yvar(k - 1))))
    return PathSum(
        n,
        tuple(BoolPoly.var(yvar(k)) for k in range(n)),
        tuple(yvar(k) for k in range(n)),
        n,
        PhasePoly.of(terms),
    )


# ------------------------------------------------------------- formulas

class Formula:
    """Propositional formula over not/and/or with named variables."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class FVar(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


_TOKEN = re.compile(r"\s*([a-z][a-z0-9_]*|[!&|()])")


def parse_formula(text: str) -> Formula:
    """Grammar: phi := VAR | "!" phi | phi "&" phi | phi "|" phi | "(" phi ")"
    with precedence ! > & > |."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise ValueError(f"bad token at {text[pos:]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    it = iter(range(len(tokens)))
    idx = [0]

    def peek():
        return tokens[idx[0]] if idx[0] < len(tokens) else None

    def take():
        tok = peek()
        idx[0] += 1
        return tok

    def unit() -> Formula:
        tok = take()
        if tok == "(":
            f = ors()
            if take() != ")":
                raise ValueError("unbalanced parentheses")
            return f
        if tok == "!":
            return Not(unit())
        if tok is None or tok in "&|)":
            raise ValueError(f"unexpected token {tok!r}")
        return FVar(tok)

    def ands() -> Formula:
        f = unit()
        while peek() == "&":
            take()
            f = And(f, unit())
        return f

    def ors() -> Formula:
        f = ands()
        while peek() == "|":
            take()
            f = Or(f, ands())
        return f

    f = ors()
    if peek() is not None:
        raise ValueError(f"trailing input at {tokens[idx[0]]!r}")
    return f


def formula_vars(phi: Formula) -> list[str]:
    """Variable names in first-occurrence order."""
    seen: list[str] = []

    def walk(f: Formula) -> None:
        if isinstance(f, FVar):
            if f.name not in seen:
                seen.append(f.name)
        elif isinstance(f, Not):
            walk(f.arg)
        else:
            walk(f.left)
            walk(f.right)

    walk(phi)
    return seen


def eval_formula(phi: Formula, assign: dict) -> int:
    if isinstance(phi, FVar):
        return assign[phi.name]
    if isinstance(phi, Not):
        return 1 - eval_formula(phi.arg, assign)
    a, b = eval_formula(phi.left, assign), eval_formula(phi.right, assign)
    return a & b if isinstance(phi, And) else a | b


def tseytin_encode(phi: Formula) -> PathSum:
    """Encode phi as the diagonal operator |x> -> phi(x)|x> via its
    constant-depth clause decomposition: one fresh variable per connective
    (root first), each clause folded into a half-integer phase block, so the
    sum has 2k+1 summed variables and prefactor 2^-(k+1)."""
    names = formula_vars(phi)
    var_of = {name: xvar(i) for i, name in enumerate(names)}

    def count(f: Formula) -> int:
        if isinstance(f, FVar):
            return 0
        if isinstance(f, Not):
            return 1 + count(f.arg)
        return 1 + count(f.left) + count(f.right)

    k = count(phi)

    def zv(rank: int) -> int:
        # summed variables: the outer y at index 0, clause selectors
        # y_1..y_k, clause values z_1..z_k at indices k+1..2k
        return yvar(1 + k + rank)

    clauses: list[BoolPoly] = []  # clause i: the lifted connective c_i

    def value(f: Formula) -> BoolPoly:
        """The Z2 polynomial standing for a node's value: an input for a
        leaf, the clause variable z_i for a connective."""
        if isinstance(f, FVar):
            return BoolPoly.var(var_of[f.name])
        rank = len(clauses)
        clauses.append(BoolPoly.zero())  # reserve root-first index
        if isinstance(f, Not):
            clauses[rank] = value(f.arg) ^ BoolPoly.one()
        else:
            a = value(f.left)
            b = value(f.right)
            ab = a * b
            clauses[rank] = ab if isinstance(f, And) else a ^ b ^ ab
        return BoolPoly.var(zv(rank))

    root = value(phi)
    assert len(clauses) == k

    body = BoolPoly.var(yvar(0)) * (BoolPoly.one() ^ root)
    for i, c in enumerate(clauses):
        body = body ^ BoolPoly.var(yvar(1 + i)) * (BoolPoly.var(zv(i)) ^ c)
    phase = PhasePoly.of((HALF, mono) for mono in body.monomials)
    n = len(names)
    return PathSum(
        n,
        tuple(BoolPoly.var(xvar(i)) for i in range(n)),
        tuple(yvar(i) for i in range(2 * k + 1)),
        2 * (k + 1),
        phase,
    )


def taut_check(phi: Formula, max_vars: int = 20, oracle_bits: int = DEFAULT_ORACLE_BITS) -> bool:
    """Decide tautology by enumeration, cross-checking the encoded sum's
    matrix against diag(phi) when it fits under the oracle cap."""
    names = formula_vars(phi)
    if len(names) > max_vars:
        raise ResourceLimit(f"{len(names)} variables exceeds cap {max_vars}")
    n = len(names)
    taut = True
    values = []
    for bits in range(1 << n):
        assign = {name: bits >> (n - 1 - i) & 1 for i, name in enumerate(names)}
        val = eval_formula(phi, assign)
        values.append(val)
        taut = taut and val == 1
    enc = tseytin_encode(phi)
    if enc.inputs + enc.k <= oracle_bits:
        mat = to_matrix(enc, oracle_bits)
        expected = np.diag(np.array(values, dtype=complex))
        if not np.allclose(mat, expected, atol=1e-9):
            raise PathsumError("encoding disagrees with direct evaluation")
    return taut


# ---------------------------------------------------------- equivalence

@dataclass(frozen=True)
class Equivalence:
    verdict: str  # "equal" | "equal_up_to_phase" | "not_equal" | "inconclusive"
    phase: Dyadic | None = None

    def __str__(self) -> str:
        if self.verdict == "equal_up_to_phase":
            return f"equal_up_to_phase({self.phase})"
        return self.verdict


def _as_sum(x) -> PathSum:
    return simulate(x) if isinstance(x, Circuit) else x


def verify_equiv(a, b, oracle_bits: int = DEFAULT_ORACLE_BITS) -> Equivalence:
    """Check two circuits/sums by normalizing a^dag b; falls back to the
    matrix oracle at desk scale when the rewrite engine gets stuck."""
    pa, pb = _as_sum(a), _as_sum(b)
    if (pa.inputs, pa.n) != (pb.inputs, pb.n):
        raise DimensionMismatch(
            f"{pa.inputs}->{pa.n} versus {pb.inputs}->{pb.n}"
        )
    combo, _ = normalize(compose(dagger(pa), pb))
    c = identity_phase(combo)
    if c is not None:
        return Equivalence("equal") if not c else Equivalence("equal_up_to_phase", c)
    if combo.k == 0:
        return Equivalence("not_equal")
    na, _ = normalize(pa)
    nb, _ = normalize(pb)
    if max(na.inputs + na.k, nb.inputs + nb.k) <= oracle_bits:
        ma, mb = to_matrix(na, oracle_bits), to_matrix(nb, oracle_bits)
        if np.allclose(ma, mb, atol=1e-9):
            return Equivalence("equal")
        inner = np.vdot(ma, mb)
        norm = np.vdot(ma, ma).real
        if norm > 0:
            scale = inner / norm
            if abs(abs(scale) - 1) < 1e-9 and np.allclose(ma * scale, mb, atol=1e-9):
                turns = float(np.angle(scale) / (2 * np.pi) % 1.0)
                return Equivalence("equal_up_to_phase", _nearest_dyadic(turns))
        return Equivalence("not_equal")
    return Equivalence("inconclusive")


def _nearest_dyadic(turns: float, max_log2den: int = 8) -> Dyadic | None:
    num = round(turns * (1 << max_log2den))
    d = Dyadic(num, max_log2den)
    if abs(float(d) - turns) < 1e-9 or abs(float(d) - turns + 1) < 1e-9:
        return d
    return None


# --------------------------------------------------------- decompilation

def decompile(c: Circuit, trace=None) -> Circuit:
    """Re-synthesize a circuit over the high-level gate set; the result is
    verified to not be NotEqual against the input."""
    p = simulate(c)
    out = synthesize(p, trace=trace)
    check = verify_equiv(c, out)
    if check.verdict == "not_equal":
        raise PathsumError("decompiled circuit failed verification")
    return out


_CLIFFORD_NAMES = frozenset({"h", "s", "sdg", "z", "x", "cx", "cz", "swap"})


def clifford_pass(c: Circuit, min_run: int = 4) -> Circuit:
    """Re-synthesize maximal runs of Clifford gates of length >= min_run
    through the exact normal-form synthesizer, splicing the replacements
    back in.  A run that fails to synthesize is left untouched."""
    gates: list[Gate] = []
    run: list[Gate] = []

    def flush() -> None:
        if len(run) >= min_run:
            sub = Circuit(c.width, tuple(run))
            try:
                new = synth_clifford(simulate(sub))
            except (NonUnitary, PathsumError):
                gates.extend(run)
                return
            gates.extend(new.gates)
        else:
            gates.extend(run)

    for g in c.gates:
        if g.name in _CLIFFORD_NAMES:
            run.append(g)
        else:
            flush()
            run = []
            gates.append(g)
    flush()
    result = Circuit(c.width, tuple(gates))
    check = verify_equiv(c, result)
    if check.verdict == "not_equal":
        return c
    return result
