"""Exact symbolic arithmetic for Boolean and phase polynomials.

Boolean polynomials are multilinear over Z2: a set of monomials combined by
XOR, where each monomial is a set of variables (so x*x = x holds by
construction).  Phase polynomials carry dyadic-rational coefficients taken
mod 1; a term c*m stands for the operator phase e^{2*pi*i*c*m}.

Variables come in three kinds: inputs ("x<i>"), summed path variables
("y<j>") and transient frame variables ("z<i>") used during synthesis.  A
variable is packed into a single int, (index << 2) | kind, so that monomials
are plain frozensets of ints and hash fast.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from .errors import NotHalfInteger, ResourceLimit

INPUT, PATH, FRAME = 0, 1, 2
_KIND_LETTER = ("x", "y", "z")

Var = int
Monomial = frozenset  # frozenset[Var]; the empty set is the constant monomial 1

MONO_ONE: Monomial = frozenset()

_VAR_RE = re.compile(r"^([xyz])([0-9]+)$")

#: Term-count ceiling for exact lifting (worst-case exponential expansion).
LIFT_TERM_LIMIT = 1 << 20


def xvar(index: int) -> Var:
    return (index << 2) | INPUT


def yvar(index: int) -> Var:
    return (index << 2) | PATH


def zvar(index: int) -> Var:
    return (index << 2) | FRAME


def var_kind(v: Var) -> int:
    return v & 3


def var_index(v: Var) -> int:
    return v >> 2


def var_name(v: Var) -> str:
    return f"{_KIND_LETTER[v & 3]}{v >> 2}"


def parse_var(name: str) -> Var:
    m = _VAR_RE.match(name)
    if m is None:
        raise ValueError(f"bad variable name {name!r}")
    return (int(m.group(2)) << 2) | _KIND_LETTER.index(m.group(1))


def var_sort_key(v: Var) -> tuple[int, int]:
    return (v & 3, v >> 2)


def mono_sort_key(m: Monomial) -> tuple:
    """Key ordering monomials reverse-lexicographically, higher degree first
    (sort with reverse=True).  The constant monomial sorts last."""
    return (len(m), tuple(sorted((var_sort_key(v) for v in m), reverse=True)))


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    return "".join(var_name(v) for v in sorted(m, key=var_sort_key))


class Dyadic(tuple):
    """A dyadic rational num / 2^log2den taken mod 1, always canonical:
    0 <= num < 2^log2den and num odd unless the value is zero."""

    __slots__ = ()

    def __new__(cls, num: int = 0, log2den: int = 0):
        if log2den < 0:
            raise ValueError("negative denominator exponent")
        num %= 1 << log2den
        while log2den > 0 and num & 1 == 0:
            num >>= 1
            log2den -= 1
        if num == 0:
            log2den = 0
        return tuple.__new__(cls, (num, log2den))

    @property
    def num(self) -> int:
        return self[0]

    @property
    def log2den(self) -> int:
        return self[1]

    def __bool__(self) -> bool:
        return self[0] != 0

    def __add__(self, other: "Dyadic") -> "Dyadic":
        a, da = self
        b, db = other
        d = max(da, db)
        return Dyadic((a << (d - da)) + (b << (d - db)), d)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self[0], self[1])

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        return self + (-other)

    def times(self, k: int) -> "Dyadic":
        return Dyadic(self[0] * k, self[1])

    def __float__(self) -> float:
        return self[0] / (1 << self[1])

    def __str__(self) -> str:
        return f"{self[0]}/2^{self[1]}"

    def __repr__(self) -> str:
        return f"Dyadic({self[0]}, {self[1]})"


DYADIC_ZERO = Dyadic(0, 0)
HALF = Dyadic(1, 1)
QUARTER = Dyadic(1, 2)
EIGHTH = Dyadic(1, 3)


def parse_dyadic(text: str) -> Dyadic:
    """Parse an angle written as "a/2^m" or "a/b" with b a power of two."""
    m = re.match(r"^([0-9]+)/(?:2\^([0-9]+)|([0-9]+))$", text)
    if m is None:
        raise ValueError(f"bad dyadic fraction {text!r}")
    num = int(m.group(1))
    if m.group(2) is not None:
        return Dyadic(num, int(m.group(2)))
    den = int(m.group(3))
    if den <= 0 or den & (den - 1):
        raise ValueError(f"denominator of {text!r} is not a power of two")
    return Dyadic(num, den.bit_length() - 1)


def _parity_reduce(monomials: Iterable[Monomial]) -> frozenset:
    seen: set = set()
    for m in monomials:
        if m in seen:
            seen.discard(m)
        else:
            seen.add(m)
    return frozenset(seen)


@dataclass(frozen=True, slots=True)
class BoolPoly:
    """Multilinear polynomial over Z2: an XOR of monomials."""

    monomials: frozenset = frozenset()

    @staticmethod
    def zero() -> "BoolPoly":
        return _BP_ZERO

    @staticmethod
    def one() -> "BoolPoly":
        return _BP_ONE

    @staticmethod
    def var(v: Var) -> "BoolPoly":
        return BoolPoly(frozenset((frozenset((v,)),)))

    @staticmethod
    def of(monomials: Iterable[Iterable[Var]]) -> "BoolPoly":
        return BoolPoly(_parity_reduce(frozenset(m) for m in monomials))

    def __bool__(self) -> bool:
        return bool(self.monomials)

    def __xor__(self, other: "BoolPoly") -> "BoolPoly":
        return BoolPoly(self.monomials ^ other.monomials)

    def __mul__(self, other: "BoolPoly") -> "BoolPoly":
        counts: dict = {}
        for a in self.monomials:
            for b in other.monomials:
                m = a | b
                counts[m] = counts.get(m, 0) ^ 1
        return BoolPoly(frozenset(m for m, c in counts.items() if c))

    def variables(self) -> set:
        out: set = set()
        for m in self.monomials:
            out |= m
        return out

    def degree(self) -> int:
        return max((len(m) for m in self.monomials), default=0)

    def is_var(self) -> Var | None:
        """The bare variable this polynomial equals, if any."""
        if len(self.monomials) == 1:
            (m,) = self.monomials
            if len(m) == 1:
                (v,) = m
                return v
        return None

    def evaluate(self, assign: Mapping[Var, int]) -> int:
        acc = 0
        for m in self.monomials:
            if all(assign[v] for v in m):
                acc ^= 1
        return acc

    def subst(self, v: Var, g: "BoolPoly") -> "BoolPoly":
        return self.subst_many({v: g})

    def mono_subst(self, l: Monomial, repl: "BoolPoly") -> "BoolPoly":
        """Replace the monomial l, wherever it divides a term, by repl."""
        counts: dict = {}
        for m in self.monomials:
            if l <= m:
                base = m - l
                for rm in repl.monomials:
                    u = base | rm
                    counts[u] = counts.get(u, 0) ^ 1
            else:
                counts[m] = counts.get(m, 0) ^ 1
        return BoolPoly(frozenset(m for m, c in counts.items() if c))

    def subst_many(self, mapping: Mapping[Var, "BoolPoly"]) -> "BoolPoly":
        rename = _as_rename(mapping)
        if rename is not None:
            return BoolPoly(
                _parity_reduce(
                    frozenset(rename.get(v, v) for v in m) for m in self.monomials
                )
            )
        counts: dict = {}
        for m in self.monomials:
            fixed = [v for v in m if v not in mapping]
            acc = {frozenset(fixed): 1}
            for v in m:
                g = mapping.get(v)
                if g is None:
                    continue
                nxt: dict = {}
                for base in acc:
                    for gm in g.monomials:
                        u = base | gm
                        nxt[u] = nxt.get(u, 0) ^ 1
                acc = {k: 1 for k, c in nxt.items() if c}
                if not acc:
                    break
            for u in acc:
                counts[u] = counts.get(u, 0) ^ 1
        return BoolPoly(frozenset(m for m, c in counts.items() if c))

    def __str__(self) -> str:
        if not self.monomials:
            return "0"
        ordered = sorted(self.monomials, key=mono_sort_key, reverse=True)
        return " + ".join(mono_str(m) for m in ordered)


_BP_ZERO = BoolPoly(frozenset())
_BP_ONE = BoolPoly(frozenset((MONO_ONE,)))


def _as_rename(mapping: Mapping) -> dict | None:
    """The variable->variable dict when every replacement is a bare variable
    (the common frame-rewrite case), else None."""
    rename = {}
    for v, g in mapping.items():
        w = g.is_var()
        if w is None:
            return None
        rename[v] = w
    return rename


def bool_mul(a: BoolPoly, b: BoolPoly) -> BoolPoly:
    """Boolean product with multilinear reduction (x^2 = x)."""
    return a * b


def subst_bool(f: BoolPoly, v: Var, g: BoolPoly) -> BoolPoly:
    """Substitute variable v by g in f; capture avoidance is the caller's duty."""
    return f.subst(v, g)


def lift(f: BoolPoly, max_terms: int = LIFT_TERM_LIMIT) -> dict:
    """Embed a Z2 polynomial into the integers, the multilinear polynomial
    agreeing with f on {0,1} assignments.

    XOR lifts as f + g - 2fg, so the expansion over t monomials has up to
    2^t - 1 terms.  Raises ResourceLimit past max_terms.

    Returns:
        dict mapping Monomial -> int coefficient.
    """
    acc: dict = {}
    for m in sorted(f.monomials, key=mono_sort_key):
        # acc' = acc + m - 2*acc*m
        delta: dict = {m: 1}
        for mm, c in acc.items():
            u = mm | m
            delta[u] = delta.get(u, 0) - 2 * c
        for mm, c in delta.items():
            nc = acc.get(mm, 0) + c
            if nc:
                acc[mm] = nc
            else:
                acc.pop(mm, None)
        if len(acc) > max_terms:
            raise ResourceLimit(f"lift expansion exceeded {max_terms} terms")
    return acc


def _expand_scaled(
    out: dict, coeff: Dyadic, base: Monomial, factors: list[BoolPoly]
) -> None:
    """Accumulate coeff * base * prod(lift(f) for f in factors) into out, mod 1.

    Subsets of each factor's monomials carry weight (-2)^(|S|-1); any term
    whose total 2-adic weight reaches coeff.log2den vanishes mod 1, so the
    expansion is truncated there.
    """
    num, d = coeff
    if d == 0:
        return
    terms = {base: num}
    for f in factors:
        monos = sorted(f.monomials, key=mono_sort_key)
        nxt: dict = {}
        for mono, c in terms.items():
            # subsets of size > d - nu_2(c) contribute 0 mod 1
            budget = d - _two_adic(c)
            for size in range(1, min(len(monos), budget) + 1):
                w = (-2) ** (size - 1)
                for subset in combinations(monos, size):
                    u = mono
                    for s in subset:
                        u |= s
                    nc = (nxt.get(u, 0) + c * w) % (1 << d)
                    if nc:
                        nxt[u] = nc
                    else:
                        nxt.pop(u, None)
        terms = nxt
        if not terms:
            break
    for mono, c in terms.items():
        cur = out.get(mono, DYADIC_ZERO) + Dyadic(c, d)
        if cur:
            out[mono] = cur
        else:
            out.pop(mono, None)


def _two_adic(n: int) -> int:
    return (n & -n).bit_length() - 1 if n else 0


@dataclass(frozen=True, eq=True)
class PhasePoly:
    """Multilinear polynomial with dyadic coefficients mod 1.

    The terms dict is treated as immutable after construction; no zero
    coefficients are stored.
    """

    terms: dict

    @staticmethod
    def zero() -> "PhasePoly":
        return PhasePoly({})

    @staticmethod
    def constant(c: Dyadic) -> "PhasePoly":
        return PhasePoly({MONO_ONE: c} if c else {})

    @staticmethod
    def of(terms: Iterable[tuple[Dyadic, Iterable[Var]]]) -> "PhasePoly":
        acc: dict = {}
        for c, m in terms:
            mono = frozenset(m)
            cur = acc.get(mono, DYADIC_ZERO) + c
            if cur:
                acc[mono] = cur
            else:
                acc.pop(mono, None)
        return PhasePoly(acc)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "PhasePoly") -> "PhasePoly":
        if not self.terms:
            return other
        acc = dict(self.terms)
        for m, c in other.terms.items():
            cur = acc.get(m, DYADIC_ZERO) + c
            if cur:
                acc[m] = cur
            else:
                acc.pop(m, None)
        return PhasePoly(acc)

    def __neg__(self) -> "PhasePoly":
        return PhasePoly({m: -c for m, c in self.terms.items()})

    def plus_term(self, coeff: Dyadic, mono: Monomial) -> "PhasePoly":
        acc = dict(self.terms)
        cur = acc.get(mono, DYADIC_ZERO) + coeff
        if cur:
            acc[mono] = cur
        else:
            acc.pop(mono, None)
        return PhasePoly(acc)

    def plus_scaled(self, coeff: Dyadic, f: BoolPoly) -> "PhasePoly":
        """Add coeff * lift(f), reduced mod 1."""
        acc = dict(self.terms)
        _expand_scaled(acc, coeff, MONO_ONE, [f])
        return PhasePoly(acc)

    def variables(self) -> set:
        out: set = set()
        for m in self.terms:
            out |= m
        return out

    def constant_term(self) -> Dyadic:
        return self.terms.get(MONO_ONE, DYADIC_ZERO)

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def subst(self, v: Var, g: BoolPoly) -> "PhasePoly":
        return self.subst_many({v: g})

    def subst_many(self, mapping: Mapping[Var, BoolPoly]) -> "PhasePoly":
        rename = _as_rename(mapping)
        if rename is not None:
            acc: dict = {}
            for m, c in self.terms.items():
                u = frozenset(rename.get(v, v) for v in m)
                cur = acc.get(u, DYADIC_ZERO) + c
                if cur:
                    acc[u] = cur
                else:
                    acc.pop(u, None)
            return PhasePoly(acc)
        acc = {}
        for m, c in self.terms.items():
            hit = [v for v in m if v in mapping]
            if not hit:
                cur = acc.get(m, DYADIC_ZERO) + c
                if cur:
                    acc[m] = cur
                else:
                    acc.pop(m, None)
                continue
            base = frozenset(v for v in m if v not in mapping)
            _expand_scaled(acc, c, base, [mapping[v] for v in hit])
        return PhasePoly(acc)

    def mono_subst(self, l: Monomial, repl: BoolPoly) -> "PhasePoly":
        """Replace the monomial l, wherever it divides a term, by repl."""
        acc: dict = {}
        for m, c in self.terms.items():
            if l <= m:
                _expand_scaled(acc, c, m - l, [repl])
            else:
                cur = acc.get(m, DYADIC_ZERO) + c
                if cur:
                    acc[m] = cur
                else:
                    acc.pop(m, None)
        return PhasePoly(acc)

    def quotient(self, v: Var) -> tuple["PhasePoly", "PhasePoly"]:
        """Split P as v*Q + R with v absent from both parts."""
        q: dict = {}
        r: dict = {}
        single = frozenset((v,))
        for m, c in self.terms.items():
            if v in m:
                q[m - single] = c
            else:
                r[m] = c
        return PhasePoly(q), PhasePoly(r)

    def half_part(self) -> BoolPoly:
        """The Z2 polynomial of monomials carrying coefficient 1/2.

        Raises NotHalfInteger if any coefficient is finer than 1/2.
        """
        monos = []
        for m, c in self.terms.items():
            if c.log2den > 1:
                raise NotHalfInteger(f"coefficient {c} on {mono_str(m)}")
            monos.append(m)
        return BoolPoly(frozenset(monos))

    def evaluate(self, assign: Mapping[Var, int]) -> Dyadic:
        acc = DYADIC_ZERO
        for m, c in self.terms.items():
            if all(assign[v] for v in m):
                acc = acc + c
        return acc

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        ordered = sorted(self.terms, key=mono_sort_key, reverse=True)
        return " + ".join(f"{self.terms[m]}·{mono_str(m)}" for m in ordered)

    __hash__ = None  # dict field; phase polynomials are not hashable


def subst_phase(p: PhasePoly, v: Var, g: BoolPoly) -> PhasePoly:
    """Substitute v by g inside the phase, re-expanding multilinearly mod 1."""
    return p.subst(v, g)


def quotient(p: PhasePoly, v: Var) -> tuple[PhasePoly, PhasePoly]:
    return p.quotient(v)


def half_part(p: PhasePoly) -> BoolPoly:
    return p.half_part()
