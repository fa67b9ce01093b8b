"""The equational rewrite engine for path sums.

Four rules drive everything:

  elim    sum_y |Psi>                      = 2 |Psi>            (y unused)
  hh      sum_{x,y} (-1)^{y(x+f)} |Psi(x)> = 2 |Psi(f)>
  omega   sum_y i^y (-1)^{yf} |Psi>        = omega*sqrt2*(-i)^f |Psi>
  subst   sum_y |Psi(y)>                   = sum_y |Psi(y+f)>

normalize() grinds elim/hh/omega to a fixpoint, always attacking the
smallest-index applicable path variable with the rules tried in that order.
Internally the engine maps variables to bit slots so monomials are ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .algebra import (
    BoolPoly,
    Dyadic,
    EIGHTH,
    PhasePoly,
    Var,
    var_index,
    var_kind,
    var_name,
    xvar,
)
from .errors import NotApplicable, NotClifford, NotNormalizable
from .sums import PathSum, compose, dagger

CLIFFORD = "Clifford"
GENERAL = "General"

_OMEGA_PLUS = Dyadic(1, 2)   # quotient constant i^y
_OMEGA_MINUS = Dyadic(3, 2)  # quotient constant (-i)^y


@dataclass(frozen=True)
class RuleApplication:
    """One rewrite step; replaying the log reproduces the rewritten sum."""

    rule: str  # "elim" | "hh" | "omega" | "subst"
    variables: tuple[Var, ...]  # primary variable first
    substitution: tuple[Var, BoolPoly] | None = None

    def __str__(self) -> str:
        names = ",".join(var_name(v) for v in self.variables)
        if self.substitution is not None:
            tgt, f = self.substitution
            return f"{self.rule}({names}; {var_name(tgt)} <- {f})"
        return f"{self.rule}({names})"


class _Engine:
    """Mutable bitmask view of a path sum."""

    __slots__ = (
        "m", "sqrt2", "slot", "rev", "bit", "paths", "pathmask",
        "phase", "quot", "outs", "outmask",
    )

    def __init__(self, p: PathSum):
        self.m = p.inputs
        self.sqrt2 = p.sqrt2
        variables = sorted(
            {xvar(i) for i in range(p.inputs)} | set(p.pathvars)
            | p.phase.variables() | {v for f in p.out for v in f.variables()},
            key=lambda v: (var_kind(v), var_index(v)),
        )
        self.slot = {v: i for i, v in enumerate(variables)}
        self.rev = variables
        self.bit = {v: 1 << i for i, v in enumerate(variables)}
        self.paths = set(p.pathvars)
        self.pathmask = 0
        for v in p.pathvars:
            self.pathmask |= self.bit[v]
        self.phase: dict[int, Dyadic] = {}
        self.quot: dict[int, set[int]] = {self.bit[v]: set() for v in p.pathvars}
        for mono, c in p.phase.terms.items():
            self._phase_add(self._mask(mono), c)
        self.outs = [{self._mask(mo) for mo in f.monomials} for f in p.out]
        self.outmask = [self._union(o) for o in self.outs]

    # -- mask plumbing --------------------------------------------------

    def _mask(self, mono) -> int:
        mk = 0
        for v in mono:
            mk |= self.bit[v]
        return mk

    @staticmethod
    def _union(masks) -> int:
        u = 0
        for mk in masks:
            u |= mk
        return u

    def _mono(self, mask: int):
        out = []
        while mask:
            b = mask & -mask
            out.append(self.rev[b.bit_length() - 1])
            mask ^= b
        return frozenset(out)

    def _bool(self, masks) -> BoolPoly:
        return BoolPoly(frozenset(self._mono(mk) for mk in masks))

    def _path_bits(self, mask: int):
        mb = mask & self.pathmask
        while mb:
            b = mb & -mb
            yield b
            mb ^= b

    def _phase_add(self, mask: int, c: Dyadic) -> None:
        cur = self.phase.get(mask)
        new = cur + c if cur is not None else c
        if new:
            self.phase[mask] = new
            if cur is None:
                for b in self._path_bits(mask):
                    self.quot[b].add(mask ^ b)
        else:
            if cur is not None:
                del self.phase[mask]
                for b in self._path_bits(mask):
                    self.quot[b].discard(mask ^ b)

    def _phase_delete_var(self, b: int) -> None:
        """Drop every term containing path bit b."""
        for rest in list(self.quot[b]):
            mask = rest | b
            del self.phase[mask]
            for ob in self._path_bits(mask):
                self.quot[ob].discard(mask ^ ob)

    def _add_scaled_lift(self, coeff: Dyadic, rest: int, g_masks: list[int]) -> None:
        """Accumulate coeff * lift(g) * rest into the phase, mod 1."""
        num, d = coeff
        monos = sorted(g_masks)
        for size in range(1, min(len(monos), d) + 1):
            c = Dyadic(num * (-2) ** (size - 1), d)
            if not c:
                continue
            for subset in combinations(monos, size):
                u = rest
                for s in subset:
                    u |= s
                self._phase_add(u, c)

    def _subst_phase(self, vbit: int, g_masks: list[int]) -> None:
        """Replace path variable bit vbit by the Z2 polynomial g in the phase.

        All affected terms are removed before any expansion is added back, so
        expansion products cannot contaminate terms still awaiting
        substitution.
        """
        removed = []
        for rest in sorted(self.quot[vbit]):
            mask = rest | vbit
            removed.append((rest, self.phase.pop(mask)))
            for ob in self._path_bits(mask):
                self.quot[ob].discard(mask ^ ob)
        for rest, c in removed:
            self._add_scaled_lift(c, rest, g_masks)

    def _subst_outputs(self, vbit: int, g_masks: list[int]) -> None:
        for j, outset in enumerate(self.outs):
            if not self.outmask[j] & vbit:
                continue
            hit = [mk for mk in outset if mk & vbit]
            for mk in hit:
                outset.discard(mk)
                rest = mk ^ vbit
                for gm in g_masks:
                    u = rest | gm
                    if u in outset:
                        outset.discard(u)
                    else:
                        outset.add(u)
            self.outmask[j] = self._union(outset)

    # -- rule applicability ----------------------------------------------

    def _in_outputs(self, b: int) -> bool:
        return any(om & b for om in self.outmask)

    def _hh_match(self, b: int):
        """(xbit, f_masks) for the hh rule at path bit b, or None."""
        q = self.quot.get(b)
        if not q or self._in_outputs(b):
            return None
        for rest in q:
            if self.phase[rest | b].log2den != 1:
                return None
        singles = sorted(
            (mk for mk in q if mk & (mk - 1) == 0 and mk & self.pathmask and mk != b),
            key=lambda mk: var_index(self.rev[mk.bit_length() - 1]),
        )
        for xbit in singles:
            f_masks = [mk for mk in q if mk != xbit]
            if all(not mk & xbit for mk in f_masks):
                return xbit, f_masks
        return None

    def _omega_match(self, b: int):
        """f_masks plus orientation for the omega rule at b, or None."""
        q = self.quot.get(b)
        if not q or self._in_outputs(b):
            return None
        c0 = self.phase.get(b)  # constant of the quotient = term on b alone
        if c0 not in (_OMEGA_PLUS, _OMEGA_MINUS):
            return None
        f_masks = []
        for rest in q:
            if rest == 0:
                continue
            if self.phase[rest | b].log2den != 1:
                return None
            f_masks.append(rest)
        return c0, f_masks

    # -- rule application --------------------------------------------------

    def _drop_path(self, b: int) -> None:
        v = self.rev[b.bit_length() - 1]
        self.paths.discard(v)
        self.pathmask ^= b
        self.quot.pop(b, None)

    def apply_elim(self, b: int) -> None:
        self._drop_path(b)
        self.sqrt2 -= 2

    def apply_hh(self, b: int, xbit: int, f_masks: list[int]) -> None:
        self._phase_delete_var(b)
        self._subst_phase(xbit, f_masks)
        self._subst_outputs(xbit, f_masks)
        self._drop_path(b)
        self._drop_path(xbit)
        self.sqrt2 -= 2

    def apply_omega(self, b: int, c0: Dyadic, f_masks: list[int]) -> None:
        self._phase_delete_var(b)
        self._drop_path(b)
        self.sqrt2 -= 1
        if c0 == _OMEGA_PLUS:
            self._phase_add(0, EIGHTH)
            self._add_scaled_lift(Dyadic(3, 2), 0, f_masks)
        else:
            self._phase_add(0, Dyadic(7, 3))
            self._add_scaled_lift(Dyadic(1, 2), 0, f_masks)

    def apply_subst(self, b: int, f_masks: list[int]) -> None:
        g = [b] + list(f_masks)
        self._subst_phase(b, g)
        self._subst_outputs(b, g)
        # y stays bound: restore its quotient index
        self.quot[b] = {mk ^ b for mk in self.phase if mk & b}

    # -- conversion ---------------------------------------------------------

    def to_pathsum(self) -> PathSum:
        terms = {self._mono(mk): c for mk, c in self.phase.items()}
        outs = tuple(self._bool(o) for o in self.outs)
        pathvars = tuple(sorted(self.paths, key=var_index))
        return PathSum(self.m, outs, pathvars, self.sqrt2, PhasePoly(terms))


def _sorted_paths(eng: _Engine) -> list[Var]:
    return sorted(eng.paths, key=var_index)


def _try_variable(eng: _Engine, v: Var) -> RuleApplication | None:
    """Attempt elim, hh, omega on v in that order; apply the first match."""
    b = eng.bit[v]
    if not eng.quot.get(b) and not eng._in_outputs(b):
        eng.apply_elim(b)
        return RuleApplication("elim", (v,))
    hh = eng._hh_match(b)
    if hh is not None:
        xbit, f_masks = hh
        x = eng.rev[xbit.bit_length() - 1]
        f = eng._bool(f_masks)
        eng.apply_hh(b, xbit, f_masks)
        return RuleApplication("hh", (v, x), (x, f))
    om = eng._omega_match(b)
    if om is not None:
        c0, f_masks = om
        eng.apply_omega(b, c0, f_masks)
        return RuleApplication("omega", (v,))
    return None


# ----------------------------------------------------------- public rules

def rule_elim(p: PathSum, y: Var) -> PathSum:
    """Remove an unused summation variable (factor of 2 into the prefactor)."""
    eng = _Engine(p)
    if y not in eng.paths:
        raise NotApplicable(f"{var_name(y)} is not a path variable")
    b = eng.bit[y]
    if eng.quot.get(b) or eng._in_outputs(b):
        raise NotApplicable(f"{var_name(y)} occurs in the phase or outputs")
    eng.apply_elim(b)
    return eng.to_pathsum()


def rule_hh(p: PathSum, y: Var) -> PathSum:
    """Eliminate y and a partner path variable x via the interference rule:
    a phase block (1/2) y (x + f) forces x = f."""
    eng = _Engine(p)
    if y not in eng.paths:
        raise NotApplicable(f"{var_name(y)} is not a path variable")
    match = eng._hh_match(eng.bit[y])
    if match is None:
        raise NotApplicable(f"hh does not apply at {var_name(y)}")
    eng.apply_hh(eng.bit[y], *match)
    return eng.to_pathsum()


def rule_omega(p: PathSum, y: Var) -> PathSum:
    """Eliminate y from a block i^y (-1)^{yf}, leaving omega * (-i)^f."""
    eng = _Engine(p)
    if y not in eng.paths:
        raise NotApplicable(f"{var_name(y)} is not a path variable")
    match = eng._omega_match(eng.bit[y])
    if match is None:
        raise NotApplicable(f"omega does not apply at {var_name(y)}")
    eng.apply_omega(eng.bit[y], *match)
    return eng.to_pathsum()


def rule_subst(p: PathSum, y: Var, f: BoolPoly) -> PathSum:
    """Substitute y <- y + f under the summation (amplitude unchanged)."""
    if y not in p.pathvars:
        raise NotApplicable(f"{var_name(y)} is not a path variable")
    fv = f.variables()
    if y in fv:
        raise NotApplicable(f"{var_name(y)} occurs in the substituted expression")
    allowed = {xvar(i) for i in range(p.inputs)} | set(p.pathvars)
    if not fv <= allowed:
        raise NotApplicable("substitution mentions foreign variables")
    eng = _Engine(p)
    eng.apply_subst(eng.bit[y], [eng._mask(mo) for mo in f.monomials])
    return eng.to_pathsum()


def apply_rule(p: PathSum, app: RuleApplication) -> PathSum:
    """Replay one logged application."""
    y = app.variables[0]
    if app.rule == "elim":
        return rule_elim(p, y)
    if app.rule == "hh":
        return rule_hh(p, y)
    if app.rule == "omega":
        return rule_omega(p, y)
    if app.rule == "subst":
        tgt, f = app.substitution
        return rule_subst(p, tgt, f)
    raise ValueError(f"unknown rule {app.rule!r}")


def normalize(p: PathSum) -> tuple[PathSum, list[RuleApplication]]:
    """Apply elim/hh/omega greedily to a fixpoint.

    Deterministic: path variables are tried in ascending index with the rules
    in the order elim, hh, omega, restarting from the smallest variable after
    every application.  Each application removes at least one path variable.
    """
    eng = _Engine(p)
    log: list[RuleApplication] = []
    progress = True
    while progress:
        progress = False
        for v in _sorted_paths(eng):
            app = _try_variable(eng, v)
            if app is not None:
                log.append(app)
                progress = True
                break
    if not log:
        return p, log
    return eng.to_pathsum(), log


# ------------------------------------------------------- classification

def classify(p: PathSum) -> str:
    """CLIFFORD iff outputs are affine and the phase fits i^L (-1)^Q omega^l:
    degree <= 2 at 1/2, degree <= 1 at 1/4, constants only at 1/8."""
    for f in p.out:
        if f.degree() > 1:
            return GENERAL
    for mono, c in p.phase.terms.items():
        d, deg = c.log2den, len(mono)
        if d == 1:
            if deg > 2:
                return GENERAL
        elif d == 2:
            if deg > 1:
                return GENERAL
        elif d == 3:
            if deg > 0:
                return GENERAL
        elif d > 3:
            return GENERAL
    return CLIFFORD


def is_clifford(p: PathSum) -> bool:
    return classify(p) == CLIFFORD


def _pin_or_eliminate(eng: _Engine) -> dict:
    """For each path variable in turn: pin it verbatim onto an output via a
    subst application when it occurs there linearly with a variable-free
    rest, otherwise eliminate it with elim/hh/omega.  Returns the ownership
    map; raises NotNormalizable when a variable is stuck."""
    perm: dict[Var, int] = {}
    for v in list(_sorted_paths(eng)):
        if v not in eng.paths:
            continue  # eliminated as a partner of an earlier hh step
        b = eng.bit[v]
        owner = None
        rest = None
        for j, o in enumerate(eng.outs):
            if b in o:
                r = [mk for mk in o if mk != b]
                if not any(mk & b for mk in r):
                    owner, rest = j, r
                    break
        if owner is not None:
            if rest:
                eng.apply_subst(b, rest)
            perm[v] = owner
            continue
        app = _try_variable(eng, v)
        if app is None:
            stuck = tuple(sorted(eng.paths, key=var_index))
            raise NotNormalizable(
                f"no rule applies at {var_name(v)}; sum is not an isometry",
                stuck=stuck,
            )
        if app.rule == "hh":
            perm.pop(app.variables[1], None)
    assert set(perm) == eng.paths
    return perm


def identity_phase(p: PathSum) -> Dyadic | None:
    """The global phase if p rewrites to the identity up to one, else None.

    Runs the full pin-or-eliminate procedure, so sums whose variables sit
    inside outputs (as in p p^dag for Clifford p) still reduce.
    """
    nf, _ = normalize(p)
    if nf.inputs != nf.n:
        return None
    if nf.k:
        eng = _Engine(nf)
        try:
            _pin_or_eliminate(eng)
        except NotNormalizable:
            return None
        nf = eng.to_pathsum()
    if nf.k or nf.sqrt2:
        return None
    for i, f in enumerate(nf.out):
        if f != BoolPoly.var(xvar(i)):
            return None
    if not nf.phase.is_constant():
        return None
    return nf.phase.constant_term()


def is_identity(p: PathSum, strict: bool = False) -> bool:
    """True iff p normalizes to the identity (up to a global phase unless
    strict, in which case the constant must be 0)."""
    c = identity_phase(p)
    if c is None:
        return False
    return not (strict and c)


def clifford_unitarity(p: PathSum) -> bool:
    """Decide unitarity of a square Clifford sum by normalizing p p^dag and
    p^dag p; both must reach the identity."""
    if p.inputs != p.n:
        raise NotClifford(f"not square: {p.inputs} inputs, {p.n} outputs")
    if classify(p) != CLIFFORD:
        raise NotClifford("not a Clifford path sum")
    d = dagger(p)
    return identity_phase(compose(p, d)) is not None and \
        identity_phase(compose(d, p)) is not None


# ----------------------------------------------- Clifford normal form

def normal_form_clifford(p: PathSum) -> tuple[PathSum, dict[Var, int]]:
    """Rewrite a Clifford sum so every surviving path variable appears
    verbatim as one output qubit.

    For each path variable in turn: if an output contains it linearly, a
    subst application pins that output to the bare variable; otherwise one of
    elim/hh/omega must eliminate it.  Returns the sum and the map from
    surviving variables to the output position they own.

    Raises NotNormalizable when a variable is stuck, which certifies the sum
    is not an isometry.
    """
    if classify(p) != CLIFFORD:
        raise NotClifford("not a Clifford path sum")
    eng = _Engine(p)
    perm = _pin_or_eliminate(eng)
    assert len(set(perm.values())) == len(perm)
    return eng.to_pathsum(), perm
