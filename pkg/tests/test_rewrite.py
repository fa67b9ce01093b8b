"""The rewrite rules: every application must preserve the operator exactly,
scalar included."""

import pytest

from conftest import assert_close, random_sum
from pathsum.algebra import BoolPoly, Dyadic, PhasePoly, xvar, yvar
from pathsum.circuit import Gate, parse
from pathsum.errors import NotApplicable, NotClifford
from pathsum.rewrite import (
    CLIFFORD,
    GENERAL,
    apply_rule,
    classify,
    clifford_unitarity,
    identity_phase,
    is_identity,
    normal_form_clifford,
    normalize,
    rule_elim,
    rule_hh,
    rule_omega,
    rule_subst,
)
from pathsum.sums import (
    PathSum,
    compose,
    dagger,
    gate_sum,
    simulate,
    to_matrix,
)

x0, x1 = xvar(0), xvar(1)
y0, y1, y2 = yvar(0), yvar(1), yvar(2)


def bp(*monos):
    return BoolPoly.of(monos)


def test_rule_elim():
    p = PathSum(1, (BoolPoly.var(x0),), (y0,), 0, PhasePoly.zero())
    out = rule_elim(p, y0)
    assert out.k == 0 and out.sqrt2 == -2
    assert_close(to_matrix(out), to_matrix(p))

    busy = PathSum(1, (BoolPoly.var(x0),), (y0,), 0,
                   PhasePoly.of([(Dyadic(1, 1), (y0,))]))
    with pytest.raises(NotApplicable):
        rule_elim(busy, y0)

    two = PathSum(1, (BoolPoly.var(y1),), (y0, y1), 0, PhasePoly.zero())
    out2 = rule_elim(two, y0)
    assert out2.pathvars == (y1,) and out2.sqrt2 == -2


def test_rule_hh():
    hh = compose(gate_sum(Gate("h", (0,))), gate_sum(Gate("h", (0,))))
    assert hh.phase == PhasePoly.of(
        [(Dyadic(1, 1), (x0, y0)), (Dyadic(1, 1), (y0, y1))]
    )
    out = rule_hh(hh, y0)
    assert out.k == 0 and out.sqrt2 == 0
    assert out.out == (BoolPoly.var(x0),)
    assert out.phase == PhasePoly.zero()

    # no linear path variable in the quotient
    stuck = PathSum(1, (), (y0,), 0, PhasePoly.of([(Dyadic(1, 1), (x0, y0))]))
    with pytest.raises(NotApplicable):
        rule_hh(stuck, y0)


def test_rule_hh_inner_derivation_step():
    # sum_{x,z} (-1)^{z(x + (y + f))} |y> with f = x1: eliminating z also
    # consumes x (substituted by y + x1), leaving sum_y |y>
    z, x, y = yvar(0), yvar(1), yvar(2)
    p = PathSum(
        2, (BoolPoly.var(y),), (z, x, y), 2,
        PhasePoly.of([(Dyadic(1, 1), (z, x)), (Dyadic(1, 1), (z, y)), (Dyadic(1, 1), (z, x1))]),
    )
    out = rule_hh(p, z)
    assert set(out.pathvars) == {y}
    assert out.sqrt2 == 0
    assert out.out == (BoolPoly.var(y),)
    assert_close(to_matrix(out), to_matrix(p))


def test_rule_omega():
    # dimensionless: (1/sqrt2) sum_y i^y = omega
    p = PathSum(0, (), (y0,), 1, PhasePoly.of([(Dyadic(1, 2), (y0,))]))
    out = rule_omega(p, y0)
    assert out.k == 0 and out.sqrt2 == 0
    assert out.phase == PhasePoly.constant(Dyadic(1, 3))
    assert_close(to_matrix(out), to_matrix(p))

    # Q = 1/4 + (1/2) x0: gains 1/8 + (3/4) x0
    q = PathSum(
        1, (BoolPoly.var(x0),), (y0,), 1,
        PhasePoly.of([(Dyadic(1, 2), (y0,)), (Dyadic(1, 1), (y0, x0))]),
    )
    out2 = rule_omega(q, y0)
    assert out2.phase == PhasePoly.of(
        [(Dyadic(1, 3), ()), (Dyadic(3, 2), (x0,))]
    )
    assert_close(to_matrix(out2), to_matrix(q))

    # conjugate orientation
    qc = PathSum(
        1, (BoolPoly.var(x0),), (y0,), 1,
        PhasePoly.of([(Dyadic(3, 2), (y0,)), (Dyadic(1, 1), (y0, x0))]),
    )
    out3 = rule_omega(qc, y0)
    assert out3.phase == PhasePoly.of(
        [(Dyadic(7, 3), ()), (Dyadic(1, 2), (x0,))]
    )
    assert_close(to_matrix(out3), to_matrix(qc))

    halfonly = PathSum(1, (BoolPoly.var(x0),), (y0,), 0,
                       PhasePoly.of([(Dyadic(1, 1), (y0, x0))]))
    with pytest.raises(NotApplicable):
        rule_omega(halfonly, y0)


def test_rule_subst():
    p = PathSum(
        2, (BoolPoly.var(y0), BoolPoly.var(y1)), (y0, y1), 2,
        PhasePoly.of(
            [
                (Dyadic(1, 2), (x1, y0)),
                (Dyadic(3, 2), (x1, y1)),
                (Dyadic(1, 1), (x0, y0)),
                (Dyadic(1, 1), (x0, y1)),
                (Dyadic(1, 1), (x1, y0, y1)),
            ]
        ),
    )
    out = rule_subst(p, y0, bp((y1,)))
    assert out.out == (bp((y0,), (y1,)), BoolPoly.var(y1))
    assert out.phase == PhasePoly.of(
        [
            (Dyadic(1, 2), (x1, y0)),
            (Dyadic(1, 1), (x0, y0)),
            (Dyadic(1, 1), (x1, y1)),
        ]
    )
    assert_close(to_matrix(out), to_matrix(p))
    assert rule_subst(p, y0, BoolPoly.zero()) == p
    with pytest.raises(NotApplicable):
        rule_subst(p, y0, bp((y0,)))


def test_normalize_examples():
    hh = compose(gate_sum(Gate("h", (0,))), gate_sum(Gate("h", (0,))))
    nf, log = normalize(hh)
    assert is_identity(hh)
    assert [a.rule for a in log] == ["hh"]

    ththth = simulate(parse("qubits 1\nt 0\nh 0\nt 0\nh 0\nt 0\nh 0\n"))
    nf2, _ = normalize(ththth)
    assert nf2.k <= 3
    assert_close(to_matrix(nf2), to_matrix(ththth))

    stable, log3 = normalize(nf2)
    assert stable == nf2 and log3 == []


def test_normalize_replay(rng):
    for _ in range(60):
        p = random_sum(rng)
        nf, log = normalize(p)
        replayed = p
        for app in log:
            replayed = apply_rule(replayed, app)
        assert replayed == nf


def test_normalize_terminates_and_shrinks(rng):
    for _ in range(60):
        p = random_sum(rng)
        nf, log = normalize(p)
        assert len(log) <= p.k
        assert nf.k <= p.k


def test_rules_preserve_matrix(rng):
    checked = 0
    for _ in range(150):
        p = random_sum(rng, max_qubits=3, max_paths=4)
        if p.inputs + p.k > 12:
            continue
        m = to_matrix(p)
        for y in p.pathvars:
            for rule in (rule_elim, rule_hh, rule_omega):
                try:
                    out = rule(p, y)
                except NotApplicable:
                    continue
                assert_close(to_matrix(out), m)
                checked += 1
    assert checked > 50


def test_confluence_at_matrix_level(rng):
    # applying applicable rules in a scrambled order agrees with normalize
    for _ in range(30):
        p = random_sum(rng, max_qubits=3, max_paths=4)
        if p.inputs + p.k > 10:
            continue
        nf, _ = normalize(p)
        cur = p
        progress = True
        while progress:
            progress = False
            for y in sorted(cur.pathvars, key=lambda v: -v):
                for rule in (rule_omega, rule_hh, rule_elim):
                    try:
                        cur = rule(cur, y)
                        progress = True
                        break
                    except NotApplicable:
                        continue
                if progress:
                    break
        assert_close(to_matrix(cur), to_matrix(nf))


def test_classify():
    assert classify(gate_sum(Gate("cx", (0, 1)))) == CLIFFORD
    assert classify(gate_sum(Gate("t", (0,)))) == GENERAL
    assert classify(gate_sum(Gate("ccx", (0, 1, 2)))) == GENERAL
    for text in ("h 0", "s 0", "x 0", "z 1", "cz 0 1", "cx 1 0"):
        c = parse(f"qubits 2\n{text}\n")
        assert classify(simulate(c)) == CLIFFORD


def test_classify_clifford_circuits(rng):
    from pathsum.circuit import random_circuit

    for seed in range(10):
        c = random_circuit("clifford", 4, 30, seed)
        assert classify(simulate(c)) == CLIFFORD


def test_is_identity():
    h, cx = gate_sum(Gate("h", (0,))), gate_sum(Gate("cx", (0, 1)))
    assert is_identity(compose(h, h))
    assert is_identity(compose(dagger(cx), cx))
    assert not is_identity(gate_sum(Gate("s", (0,))))
    gp = simulate(parse("qubits 1\ngphase 1/2^1\n"))
    assert is_identity(gp) and not is_identity(gp, strict=True)
    assert identity_phase(gp) == Dyadic(1, 1)


def test_normal_form_clifford():
    h = gate_sum(Gate("h", (0,)))
    nf, perm = normal_form_clifford(h)
    assert perm == {y0: 0} and nf == h

    bell = simulate(parse("qubits 2\nh 0\ncx 0 1\n"))
    nf2, perm2 = normal_form_clifford(bell)
    assert list(perm2.values()) == [0]
    (owner,) = perm2
    assert nf2.out == (BoolPoly.var(owner), bp((x1,), (owner,)))
    assert_close(to_matrix(nf2), to_matrix(bell))

    # sum_y |x0> is 2I: elim applies, no variable left
    scaled = PathSum(1, (BoolPoly.var(x0),), (y0,), 0, PhasePoly.zero())
    nf3, perm3 = normal_form_clifford(scaled)
    assert perm3 == {} and nf3.k == 0


def test_clifford_unitarity():
    from pathsum.circuit import random_circuit

    for seed in range(6):
        c = random_circuit("clifford", 5, 60, seed)
        assert clifford_unitarity(simulate(c))

    # sum_y |x0> with unbalanced scalar is 2I: not unitary
    scaled = PathSum(1, (BoolPoly.var(x0),), (y0,), 0, PhasePoly.zero())
    assert not clifford_unitarity(scaled)

    eps = PathSum(2, (), (y0,), 2,
                  PhasePoly.of([(Dyadic(1, 1), (x0, y0)), (Dyadic(1, 1), (x1, y0))]))
    with pytest.raises(NotClifford):
        clifford_unitarity(eps)
    with pytest.raises(NotClifford):
        clifford_unitarity(gate_sum(Gate("t", (0,))))
