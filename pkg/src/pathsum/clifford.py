"""Exact synthesis of Clifford path sums as 8-stage circuits.

A unitary Clifford sum in normal form splits into a diagonal acting on the
inputs, an invertible linear map, one layer of Hadamards, an affine update,
and a diagonal acting on the summed variables:

    omega^l * P V (H^k x I) U D

which emits, in application order, the stages
gphase, S, CZ, CX, H, CX, X, CZ, S, SWAP.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import (
    BoolPoly,
    Dyadic,
    HALF,
    INPUT,
    PATH,
    PhasePoly,
    Var,
    mono_sort_key,
    var_index,
    var_kind,
    xvar,
)
from .circuit import Circuit, Gate
from .errors import MalformedNormalForm, NonUnitary, NotClifford, NotIsometry
from .rewrite import CLIFFORD, classify, normal_form_clifford
from .sums import PathSum

_S_POWER = {1: "s", 2: "z", 3: "sdg"}


@dataclass(frozen=True)
class NormalFormParts:
    """The stage data of a normal-form Clifford sum.

    Reassembling phase = l/8 + (1/4)(lx+ly) + (1/2)(qx+qy+sum_i y_i r_i) and
    outputs = owned bare variables / fx+fy+b reproduces the sum exactly.
    """

    inputs: int
    outputs: int
    pathvars: tuple[Var, ...]
    l: int                      # global phase index in Z8
    lx: dict                    # input var -> Z4 exponent of i
    ly: dict                    # path var -> Z4
    qx: frozenset               # pairs (frozensets) of input vars at 1/2
    qy: frozenset               # pairs of path vars at 1/2
    r: tuple[BoolPoly, ...]     # per path var: the linear input form it multiplies
    fx: tuple[BoolPoly, ...]    # per output: input part
    fy: tuple[BoolPoly, ...]    # per output: path part
    b: tuple[int, ...]          # per output: constant bit
    perm: dict                  # path var -> owned output position

    def to_pathsum(self) -> PathSum:
        terms = []
        if self.l:
            terms.append((Dyadic(self.l, 3), ()))
        for v, a in self.lx.items():
            terms.append((Dyadic(a, 2), (v,)))
        for v, a in self.ly.items():
            terms.append((Dyadic(a, 2), (v,)))
        for pair in self.qx | self.qy:
            terms.append((HALF, pair))
        for i, v in enumerate(self.pathvars):
            for mono in self.r[i].monomials:
                terms.append((HALF, set(mono) | {v}))
        owned = {j: v for v, j in self.perm.items()}
        outs = []
        for j in range(self.outputs):
            if j in owned:
                outs.append(BoolPoly.var(owned[j]))
            else:
                f = self.fx[j] ^ self.fy[j]
                if self.b[j]:
                    f = f ^ BoolPoly.one()
                outs.append(f)
        return PathSum(
            self.inputs, tuple(outs), self.pathvars, len(self.pathvars),
            PhasePoly.of(terms),
        )


def decompose(p: PathSum) -> NormalFormParts:
    """Split a normal-form Clifford sum into its stage data (lossless)."""
    k = p.k
    rank = {v: i for i, v in enumerate(p.pathvars)}
    l = 0
    lx: dict = {}
    ly: dict = {}
    qx: set = set()
    qy: set = set()
    r: list[set] = [set() for _ in range(k)]
    for mono, c in p.phase.terms.items():
        deg, d = len(mono), c.log2den
        if deg == 0:
            if d > 3:
                raise MalformedNormalForm(f"constant {c} finer than omega")
            l = c.num << (3 - d)
        elif deg == 1:
            if d > 2:
                raise MalformedNormalForm(f"linear coefficient {c}")
            (v,) = mono
            (lx if var_kind(v) == INPUT else ly)[v] = c.num << (2 - d)
        elif deg == 2:
            if d != 1:
                raise MalformedNormalForm(f"quadratic coefficient {c}")
            u, v = sorted(mono, key=var_index)
            ku, kv = var_kind(u), var_kind(v)
            if ku == kv == INPUT:
                qx.add(frozenset(mono))
            elif ku == kv == PATH:
                qy.add(frozenset(mono))
            else:
                y = u if ku == PATH else v
                x = v if ku == PATH else u
                r[rank[y]].add(frozenset((x,)))
        else:
            raise MalformedNormalForm(f"degree-{deg} phase term")
    perm: dict = {}
    used: set = set()
    for v in p.pathvars:
        bare = BoolPoly.var(v)
        owner = next(
            (j for j, f in enumerate(p.out) if j not in used and f == bare), None
        )
        if owner is None:
            raise MalformedNormalForm(f"path variable owns no output")
        perm[v] = owner
        used.add(owner)
    fx: list[BoolPoly] = []
    fy: list[BoolPoly] = []
    b: list[int] = []
    for j, f in enumerate(p.out):
        xs, ys, const = set(), set(), 0
        if j not in used:
            for mono in f.monomials:
                if len(mono) == 0:
                    const = 1
                elif len(mono) == 1:
                    (v,) = mono
                    (xs if var_kind(v) == INPUT else ys).add(mono)
                else:
                    raise MalformedNormalForm(f"nonlinear output {f}")
        fx.append(BoolPoly(frozenset(xs)))
        fy.append(BoolPoly(frozenset(ys)))
        b.append(const)
    return NormalFormParts(
        p.inputs, p.n, p.pathvars, l, lx, ly, frozenset(qx), frozenset(qy),
        tuple(BoolPoly(frozenset(mo)) for mo in r), tuple(fx), tuple(fy),
        tuple(b), perm,
    )


def _gauss_cnots(rows: list[int], n: int) -> list[Gate]:
    """CNOTs realizing the invertible linear map with the given bit rows.

    Reduces to the identity (pivot fixed from the first nonzero row below
    the diagonal, eliminating downward then upward) and replays the row
    operations in reverse.  Raises NonUnitary on a singular matrix.
    """
    a = list(rows)
    ops: list[tuple[int, int]] = []  # (src, dst): row_dst ^= row_src
    for c in range(n):
        if not a[c] >> c & 1:
            rr = next((r for r in range(c + 1, n) if a[r] >> c & 1), None)
            if rr is None:
                raise NonUnitary("singular linear stage")
            a[c] ^= a[rr]
            ops.append((rr, c))
        for rr in range(c + 1, n):
            if a[rr] >> c & 1:
                a[rr] ^= a[c]
                ops.append((c, rr))
    for c in reversed(range(n)):
        for rr in range(c):
            if a[rr] >> c & 1:
                a[rr] ^= a[c]
                ops.append((c, rr))
    return [Gate("cx", (src, dst)) for src, dst in reversed(ops)]


def _complete_columns(rows_m: list[int], m: int, n: int) -> list[int]:
    """Extend an n x m full-column-rank bit matrix to an invertible n x n one
    by appending unit columns; raises NotIsometry if the rank is below m."""
    basis: list[int] = []  # column vectors over rows, reduced

    def reduce(vec: int) -> int:
        for bv in basis:
            if vec and bv.bit_length() == vec.bit_length():
                vec ^= bv
        return vec

    def insert(vec: int) -> bool:
        red = reduce(vec)
        if not red:
            return False
        basis.append(red)
        basis.sort(key=int.bit_length, reverse=True)
        return True

    for c in range(m):
        col = 0
        for rr in range(n):
            col |= (rows_m[rr] >> c & 1) << rr
        if not insert(col):
            raise NotIsometry("fewer than m independent rows in the linear stage")
    rows = list(rows_m)
    t = m
    for j in range(n):
        if t == n:
            break
        if insert(1 << j):
            rows[j] |= 1 << t
            t += 1
    assert t == n
    return rows


def _stage_gates(parts: NormalFormParts, isometry: bool, include_gphase: bool) -> list[Gate]:
    m, n, k = parts.inputs, parts.outputs, len(parts.pathvars)
    rank = {v: i for i, v in enumerate(parts.pathvars)}
    non_owned = [j for j in range(n) if j not in parts.perm.values()]
    gates: list[Gate] = []
    if include_gphase and parts.l:
        gates.append(Gate("gphase", (), Dyadic(parts.l, 3)))
    # D: diagonal on the inputs
    for i in range(m):
        a = parts.lx.get(xvar(i), 0)
        if a:
            gates.append(Gate(_S_POWER[a], (i,)))
    for pair in sorted((tuple(sorted(var_index(v) for v in pr)) for pr in parts.qx)):
        gates.append(Gate("cz", pair))
    # U: wires 0..k-1 <- r rows, wires k.. <- fx of non-owned outputs
    def row_bits(f: BoolPoly) -> int:
        bits = 0
        for mono in f.monomials:
            (v,) = mono
            bits |= 1 << var_index(v)
        return bits

    rows = [row_bits(parts.r[i]) for i in range(k)]
    rows += [row_bits(parts.fx[j]) for j in non_owned]
    if isometry:
        rows = _complete_columns(rows, m, n)
    gates.extend(_gauss_cnots(rows, n))
    # H layer on the path wires
    gates.extend(Gate("h", (i,)) for i in range(k))
    # V: affine update of the non-owned wires from the path wires
    for t, j in enumerate(non_owned):
        for mono in sorted(parts.fy[j].monomials, key=mono_sort_key):
            (v,) = mono
            gates.append(Gate("cx", (rank[v], k + t)))
    for t, j in enumerate(non_owned):
        if parts.b[j]:
            gates.append(Gate("x", (k + t,)))
    # P: diagonal on the path wires
    for pair in sorted(
        (tuple(sorted(rank[v] for v in pr)) for pr in parts.qy)
    ):
        gates.append(Gate("cz", pair))
    for i, v in enumerate(parts.pathvars):
        a = parts.ly.get(v, 0)
        if a:
            gates.append(Gate(_S_POWER[a], (i,)))
    return gates


def _wire_targets(parts: NormalFormParts) -> list[int]:
    """Final output position of each wire after the stage gates."""
    k = len(parts.pathvars)
    non_owned = [j for j in range(parts.outputs) if j not in parts.perm.values()]
    targets = [parts.perm[v] for v in parts.pathvars]
    targets += non_owned
    return targets


def _swap_gates(targets: list[int]) -> list[Gate]:
    cur = list(targets)
    gates = []
    for pos in range(len(cur)):
        if cur[pos] == pos:
            continue
        w = cur.index(pos, pos + 1)
        gates.append(Gate("swap", (pos, w)))
        cur[pos], cur[w] = cur[w], cur[pos]
    return gates


def _normal_parts(p: PathSum) -> tuple[NormalFormParts, PathSum]:
    nf, _ = normal_form_clifford(p)
    return decompose(nf), nf


def synth_clifford(
    p: PathSum, relabel: bool = False, include_gphase: bool = True
) -> Circuit:
    """Synthesize an exact circuit for a unitary Clifford sum (scalar
    included).  Raises NonUnitary when the sum is not unitary."""
    if p.inputs != p.n:
        raise NotClifford(f"not square: {p.inputs} inputs, {p.n} outputs")
    if classify(p) != CLIFFORD:
        raise NotClifford("not a Clifford path sum")
    parts, nf = _normal_parts(p)
    if nf.sqrt2 != nf.k:
        raise NonUnitary(f"prefactor 2^(-{nf.sqrt2}/2) does not balance {nf.k} path variables")
    gates = _stage_gates(parts, isometry=False, include_gphase=include_gphase)
    if not relabel:
        gates.extend(_swap_gates(_wire_targets(parts)))
    return Circuit(p.n, tuple(gates))


def synth_isometry(
    p: PathSum, relabel: bool = False, include_gphase: bool = True
) -> Circuit:
    """Synthesize a circuit preparing a Clifford isometry (m <= n); the
    n - m extra wires are |0>-initialized ancillas."""
    if p.inputs > p.n:
        raise NotIsometry(f"{p.inputs} inputs exceed {p.n} outputs")
    if classify(p) != CLIFFORD:
        raise NotClifford("not a Clifford path sum")
    parts, nf = _normal_parts(p)
    if nf.sqrt2 != nf.k:
        raise NotIsometry(
            f"prefactor 2^(-{nf.sqrt2}/2) does not balance {nf.k} path variables"
        )
    gates = _stage_gates(parts, isometry=True, include_gphase=include_gphase)
    if not relabel:
        gates.extend(_swap_gates(_wire_targets(parts)))
    return Circuit(p.n, tuple(gates))


_STAGE_ORDER = (
    "gphase", "s_pre", "cz_pre", "cx_pre", "h", "cx_post", "x", "cz_post",
    "s_post", "swap",
)
_STAGE_SLOTS = {
    "gphase": (0,),
    "s": (1, 8), "sdg": (1, 8), "z": (1, 8),
    "cz": (2, 7),
    "cx": (3, 5),
    "h": (4,),
    "x": (6,),
    "swap": (9,),
}


def stage_profile(c: Circuit) -> dict:
    """Check the gphase?, S*, CZ*, CX*, H*, CX*, X*, CZ*, S*, SWAP* stage
    discipline and count gates per stage."""
    counts = {name: 0 for name in _STAGE_ORDER}
    current = 0
    conforming = True
    for g in c.gates:
        slots = _STAGE_SLOTS.get(g.name)
        if slots is None:
            conforming = False
            continue
        slot = next((s for s in slots if s >= current), None)
        if slot is None:
            conforming = False
            slot = slots[0]
        else:
            current = slot
        counts[_STAGE_ORDER[slot]] += 1
    return {"stages": counts, "conforming": conforming}
