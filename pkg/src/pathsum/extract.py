"""Heuristic synthesis of general path sums.

The loop alternates normalization with symbolic simplification: whenever a
path variable sits bare on an output with a half-integer quotient, one
Hadamard strips it (h_reduce); otherwise affine, phase and nonlinear
simplification stages apply generalized-permutation gates to expose one,
falling back to quotient-degree reduction by variable substitution.  Gates
are recorded as applied to the symbolic state; the final circuit is the
reversed, daggered log with the residual permutation synthesized first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import (
    BoolPoly,
    DYADIC_ZERO,
    FRAME,
    PATH,
    PhasePoly,
    Var,
    mono_sort_key,
    var_index,
    var_kind,
    xvar,
    zvar,
)
from .circuit import Circuit, Gate, controlled_x, phase_gate
from .errors import (
    DimensionMismatch,
    NotHalfInteger,
    ResidualNotPermutation,
    SynthesisIncomplete,
)
from .rewrite import normalize, rule_subst
from .sums import PathSum

#: Cap on degree-reduction branches explored before giving up.
BRANCH_LIMIT = 32


@dataclass
class SynthState:
    """A sum being synthesized plus the gates applied to it so far.

    `applied` is in application order; the assembled circuit is its reverse
    with every gate daggered (followed first by the residual gates, which
    are discovered last but act first on the inputs).
    """

    sum: PathSum
    applied: list = field(default_factory=list)

    def emit(self, gate: Gate) -> None:
        self.applied.append(gate)


def find_reducible(p: PathSum) -> tuple[Var, int, BoolPoly] | None:
    """The smallest-index path variable sitting bare on exactly one output
    with a half-integer phase quotient, plus that output position and the
    quotient's Z2 polynomial."""
    for z in p.pathvars:
        hits = [j for j, f in enumerate(p.out) if z in f.variables()]
        if len(hits) != 1:
            continue
        j = hits[0]
        if p.out[j] != BoolPoly.var(z):
            continue
        qp, _ = p.phase.quotient(z)
        try:
            q = qp.half_part()
        except NotHalfInteger:
            continue
        return z, j, q
    return None


def h_reduce(p: PathSum, y: Var, qubit: int, q: BoolPoly) -> PathSum:
    """Strip a reducible variable with one Hadamard: output <- quotient,
    variable and its phase block removed, prefactor gains sqrt(2).  The
    caller records the H gate."""
    _, rest = p.phase.quotient(y)
    outs = list(p.out)
    outs[qubit] = q
    pathvars = tuple(v for v in p.pathvars if v != y)
    return PathSum(p.inputs, tuple(outs), pathvars, p.sqrt2 - 1, rest)


# ------------------------------------------------------- simplification

def affine_simplify(st: SynthState) -> SynthState:
    """Reduce the outputs-by-monomials Z2 matrix to reduced echelon form,
    emitting one CX per row operation and one X per constant-column clear.

    Columns are ordered reverse-lexicographically with higher degree first
    (so duplicated high-degree monomials are cancelled preferentially) and
    the constant column last; the pivot is the candidate row with the
    fewest monomials.
    """
    p = st.sum
    n = p.n
    columns = sorted(
        {m for f in p.out for m in f.monomials}, key=mono_sort_key, reverse=True
    )
    if not columns:
        return st
    colpos = {m: i for i, m in enumerate(columns)}
    rows = [0] * n
    for j, f in enumerate(p.out):
        for m in f.monomials:
            rows[j] |= 1 << colpos[m]
    ops: list[Gate] = []
    used: set[int] = set()
    for c, mono in enumerate(columns):
        if not mono:
            continue  # the constant column never pivots
        cands = [r for r in range(n) if r not in used and rows[r] >> c & 1]
        if not cands:
            continue
        pivot = min(cands, key=lambda r: (rows[r].bit_count(), r))
        used.add(pivot)
        for r in range(n):
            if r != pivot and rows[r] >> c & 1:
                rows[r] ^= rows[pivot]
                ops.append(Gate("cx", (pivot, r)))
    cbit = colpos.get(frozenset())
    if cbit is not None:
        for r in range(n):
            if rows[r] >> cbit & 1:
                rows[r] ^= 1 << cbit
                ops.append(Gate("x", (r,)))
    if not ops:
        return st
    outs = tuple(
        BoolPoly(frozenset(columns[c] for c in range(len(columns)) if row >> c & 1))
        for row in rows
    )
    st.sum = PathSum(p.inputs, outs, p.pathvars, p.sqrt2, p.phase)
    st.applied.extend(ops)
    return st


def phase_simplify(st: SynthState) -> SynthState:
    """Temporarily rename each output to a frame variable z_i (substituting
    its largest monomial, left to right), strip every phase monomial living
    entirely on frame variables with a rotation gate on the corresponding
    qubits, then roll the frame back in reverse order.

    Rewrites whose source is a bare variable are plain renames; consecutive
    runs of them are applied as one simultaneous substitution, which agrees
    with the left-to-right semantics because their sources are distinct and
    their replacements are fresh.
    """
    p = st.sum
    phase = p.phase
    outs = list(p.out)
    pushed: list[tuple[int, BoolPoly]] = []
    pending: dict = {}

    def flush():
        nonlocal phase, outs
        if pending:
            phase = phase.subst_many(pending)
            outs = [g.subst_many(pending) for g in outs]
            pending.clear()

    for i in range(len(outs)):
        f = outs[i].subst_many(pending) if pending else outs[i]
        nonconst = [m for m in f.monomials if m]
        if not nonconst:
            continue
        l = max(nonconst, key=mono_sort_key)
        v = f.is_var()
        if v is not None and var_kind(v) != FRAME and v not in pending:
            pushed.append((i, f))
            pending[v] = BoolPoly.var(zvar(i))
            continue
        flush()
        f = outs[i]
        nonconst = [m for m in f.monomials if m]
        l = max(nonconst, key=mono_sort_key)
        repl = BoolPoly.var(zvar(i)) ^ BoolPoly(f.monomials - {l})
        pushed.append((i, f))
        phase = phase.mono_subst(l, repl)
        outs = [g.mono_subst(l, repl) for g in outs]
    flush()

    gates: list[Gate] = []
    removed = []
    for mono in sorted(phase.terms, key=mono_sort_key, reverse=True):
        if mono and all(var_kind(v) == FRAME for v in mono):
            theta = phase.terms[mono]
            qubits = sorted(var_index(v) for v in mono)
            gates.append(phase_gate(qubits, -theta))
            removed.append(mono)
    if removed:
        phase = PhasePoly({m: c for m, c in phase.terms.items() if m not in set(removed)})

    back: dict = {}

    def unflush():
        nonlocal phase, outs
        if back:
            phase = phase.subst_many(back)
            outs = [g.subst_many(back) for g in outs]
            back.clear()

    for i, f_push in reversed(pushed):
        w = f_push.is_var()
        if w is not None and var_kind(w) != FRAME:
            back[zvar(i)] = f_push
        else:
            unflush()
            phase = phase.subst(zvar(i), f_push)
            outs = [g.subst(zvar(i), f_push) for g in outs]
    unflush()

    if not gates:
        return st
    st.sum = PathSum(p.inputs, tuple(outs), p.pathvars, p.sqrt2, phase)
    st.applied.extend(gates)
    return st


def nonlinear_simplify(st: SynthState) -> SynthState:
    """Strip output monomials whose variables are all exposed bare on other
    wires, one multiply-controlled X each."""
    p = st.sum
    exposed: dict[Var, int] = {}
    for j, f in enumerate(p.out):
        v = f.is_var()
        if v is not None and v not in exposed:
            exposed[v] = j
    outs = list(p.out)
    gates: list[Gate] = []
    for j in range(p.n):
        for mono in sorted(outs[j].monomials, key=mono_sort_key, reverse=True):
            if (
                len(mono) >= 2
                and all(v in exposed for v in mono)
                and all(exposed[v] != j for v in mono)
            ):
                gates.append(controlled_x(sorted(exposed[v] for v in mono), j))
                outs[j] = outs[j] ^ BoolPoly(frozenset((mono,)))
    if not gates:
        return st
    st.sum = PathSum(p.inputs, tuple(outs), p.pathvars, p.sqrt2, p.phase)
    st.applied.extend(gates)
    return st


def _run_stages(st: SynthState) -> SynthState:
    affine_simplify(st)
    phase_simplify(st)
    nonlinear_simplify(st)
    phase_simplify(st)
    return st


# ------------------------------------------------------ degree reduction

def _blocking(mono, c) -> bool:
    return c.log2den >= 2 and any(var_kind(v) == PATH for v in mono)


def _blocking_score(p: PathSum) -> int:
    return sum(1 for mono, c in p.phase.terms.items() if _blocking(mono, c))


def _score_after_subst(terms: dict, x: Var, y: Var) -> int:
    """The blocking score after x <- x + y, from the x-slice alone."""
    staged: dict = {}
    xm = frozenset((x,))
    for mono, c in terms.items():
        if x not in mono:
            continue
        rest = mono - xm
        for u in (rest | {x}, rest | {y}):
            cur = staged.get(u)
            cur = cur + c if cur is not None else c
            if cur:
                staged[u] = cur
            else:
                staged.pop(u, None)
        if c.log2den >= 2:
            u = rest | {x, y}
            add = c.times(-2)
            cur = staged.get(u)
            cur = cur + add if cur is not None else add
            if cur:
                staged[u] = cur
            else:
                staged.pop(u, None)
    score = 0
    for mono, c in terms.items():
        if x in mono or mono in staged:
            continue
        if _blocking(mono, c):
            score += 1
    for mono, add in staged.items():
        base = DYADIC_ZERO if x in mono else terms.get(mono, DYADIC_ZERO)
        c = base + add
        if c and _blocking(mono, c):
            score += 1
    return score


class _ReduceContext:
    """Shared per-sum data for degree reduction across all candidates."""

    def __init__(self, p: PathSum):
        self.p = p
        self.score = _blocking_score(p)
        self.quots: dict[Var, list] = {v: [] for v in p.pathvars}
        self.blocked: set = set()
        for mono, c in p.phase.terms.items():
            path_hits = [v for v in mono if var_kind(v) == PATH]
            for v in path_hits:
                self.quots[v].append((mono, c))
            if c.log2den >= 2 and path_hits:
                self.blocked.update(path_hits)

    def half_poly(self, v: Var) -> BoolPoly | None:
        monos = []
        for mono, c in self.quots[v]:
            if c.log2den > 1:
                return None
            monos.append(mono.difference((v,)))
        return BoolPoly(frozenset(monos))

    def reduce_at(self, y: Var) -> PathSum | None:
        p = self.p
        others = [x for x in p.pathvars if x != y]
        if not others or self.score == 0:
            return None
        target = self.half_poly(y)
        if target is not None and target:
            cands = []
            for x in others:
                hp = self.half_poly(x)
                if hp is not None:
                    cands.append((x, hp))
            solution = _solve_xor(cands, target)
            if solution:
                cur = p
                for x in solution:
                    cur = rule_subst(cur, x, BoolPoly.var(y))
                if not cur.phase.quotient(y)[0]:
                    return cur
        # greedy: only a substitution at a variable sitting in a blocking
        # term can lower the score (coarser terms cannot create fine ones)
        cur = p
        terms = p.phase.terms
        score = self.score
        improved = False
        for x in others:
            if x not in self.blocked:
                continue
            trial_score = _score_after_subst(terms, x, y)
            if trial_score < score:
                cur = rule_subst(cur, x, BoolPoly.var(y))
                terms = cur.phase.terms
                score, improved = trial_score, True
        return cur if improved else None


def degree_reduce(p: PathSum, y: Var) -> PathSum | None:
    """Try to clean the quotient at y by substituting x_i <- x_i + y into
    other path variables.

    First a Z2 linear system over candidate variables with half-integer
    quotients (a solution makes y's quotient vanish mod 1); if that is
    inapplicable, a greedy pass keeps any single substitution that strictly
    lowers the number of finer-than-half phase terms touching path
    variables.
    """
    return _ReduceContext(p).reduce_at(y)


def _solve_xor(cands: list[tuple[Var, BoolPoly]], target: BoolPoly) -> list[Var]:
    """A subset of candidates whose polynomials XOR to target, or []."""
    basis: list[tuple[frozenset, frozenset]] = []  # (monomial set, candidate set)

    def lead(vec: frozenset) -> tuple:
        return max((mono_sort_key(m) for m in vec), default=())

    def reduce(vec: frozenset, combo: frozenset):
        for bv, bc in basis:
            if vec and lead(bv) == lead(vec):
                vec, combo = vec ^ bv, combo ^ bc
        return vec, combo

    for x, f in cands:
        vec, combo = reduce(f.monomials, frozenset((x,)))
        if vec:
            basis.append((vec, combo))
            basis.sort(key=lambda e: lead(e[0]), reverse=True)
    vec, combo = reduce(target.monomials, frozenset())
    if vec:
        return []
    return sorted(combo, key=var_index)


# ------------------------------------------------------------- assembly

def _wire_permutation(p: PathSum) -> list[int] | None:
    """outs[j] = x_{sigma(j)} for a permutation sigma, else None."""
    sigma = []
    for f in p.out:
        v = f.is_var()
        if v is None or var_kind(v) != 0:
            return None
        sigma.append(var_index(v))
    if sorted(sigma) != list(range(p.n)):
        return None
    return sigma


def _apply_swaps(st: SynthState) -> None:
    sigma = _wire_permutation(st.sum)
    if sigma is None or sigma == list(range(st.sum.n)):
        return
    outs = list(st.sum.out)
    for j in range(len(sigma)):
        if sigma[j] == j:
            continue
        j2 = sigma.index(j, j + 1)
        st.emit(Gate("swap", (j, j2)))
        sigma[j], sigma[j2] = sigma[j2], sigma[j]
        outs[j], outs[j2] = outs[j2], outs[j]
    st.sum = PathSum(st.sum.inputs, tuple(outs), st.sum.pathvars, st.sum.sqrt2, st.sum.phase)


def _finish_residual(st: SynthState) -> None:
    """Reduce a path-variable-free sum to the identity, emitting the final
    permutation gates and the global phase."""
    idpoly = tuple(BoolPoly.var(xvar(i)) for i in range(st.sum.n))
    for _ in range(st.sum.n + 2):
        _run_stages(st)
        _apply_swaps(st)
        if st.sum.out == idpoly and st.sum.phase.is_constant():
            break
    if st.sum.out != idpoly or not st.sum.phase.is_constant():
        raise ResidualNotPermutation(
            "residual outputs are not a synthesizable permutation", residual=st.sum
        )
    if st.sum.sqrt2 != 0:
        raise ResidualNotPermutation(
            f"residual carries a scalar 2^(-{st.sum.sqrt2}/2)", residual=st.sum
        )
    c = st.sum.phase.constant_term()
    if c:
        st.emit(Gate("gphase", (), -c))
        st.sum = PathSum(st.sum.inputs, st.sum.out, (), 0, PhasePoly.zero())


def _assemble(applied: list[Gate], width: int) -> Circuit:
    return Circuit(width, tuple(g.dagger() for g in reversed(applied)))


def synthesize(p: PathSum, trace=None) -> Circuit:
    """Algorithm: normalize; strip reducible variables with Hadamards; run
    the simplification stages to expose more; branch over degree reductions
    when stuck.  Raises SynthesisIncomplete / ResidualNotPermutation with
    the residual sum attached when the heuristic gives up."""
    if p.inputs != p.n:
        raise DimensionMismatch(f"synthesis needs a square sum, got {p.inputs}->{p.n}")
    # one shared iteration budget across all degree-reduction branches
    budget = [max(24, 4 * p.k)]
    branches = [0]
    start, _ = normalize(p)
    st = _synth_branch(start, budget, branches, trace)
    return _assemble(st.applied, p.n)


def _synth_branch(cur: PathSum, budget: list[int], branches: list[int], trace) -> SynthState:
    st = SynthState(cur)
    while st.sum.pathvars:
        budget[0] -= 1
        if budget[0] < 0:
            raise SynthesisIncomplete("iteration budget exhausted", residual=st.sum)
        if trace:
            trace(f"[{budget[0]}] {st.sum}")
        red = find_reducible(st.sum)
        if red is not None:
            z, qubit, q = red
            st.sum = h_reduce(st.sum, z, qubit, q)
            st.emit(Gate("h", (qubit,)))
            st.sum = normalize(st.sum)[0]
            continue
        before_gates = len(st.applied)
        before_sum = st.sum
        _run_stages(st)
        if len(st.applied) != before_gates or st.sum != before_sum:
            st.sum = normalize(st.sum)[0]
            continue
        # stuck: branch over degree reductions, keep the best completion
        ctx = _ReduceContext(st.sum)
        options = []
        for y in st.sum.pathvars:
            r = ctx.reduce_at(y)
            if r is not None and all(r != o for o in options):
                options.append(r)
        options.sort(key=lambda o: (_blocking_score(o), len(o.phase.terms)))
        failure = SynthesisIncomplete("no applicable simplification", residual=st.sum)
        best = None
        for opt in options:
            if branches[0] >= BRANCH_LIMIT:
                break
            branches[0] += 1
            try:
                sub = _synth_branch(normalize(opt)[0], budget, branches, trace)
            except (SynthesisIncomplete, ResidualNotPermutation) as e:
                failure = e
                continue
            if best is None or len(sub.applied) < len(best.applied):
                best = sub
        if best is None:
            raise failure
        best.applied = st.applied + best.applied
        return best
    _finish_residual(st)
    return st
