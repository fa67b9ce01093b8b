"""General synthesis: reduction steps, the simplification stages, degree
reduction, and full extraction on the worked examples."""

import numpy as np
import pytest

from conftest import assert_close
from pathsum.algebra import BoolPoly, Dyadic, PhasePoly, xvar, yvar
from pathsum.circuit import Gate, random_circuit
from pathsum.clifford import synth_clifford
from pathsum.dense import unitary
from pathsum.errors import DimensionMismatch
from pathsum.extract import (
    SynthState,
    affine_simplify,
    degree_reduce,
    find_reducible,
    h_reduce,
    nonlinear_simplify,
    phase_simplify,
    synthesize,
)
from pathsum.frontends import qft_sum
from pathsum.rewrite import normalize
from pathsum.sums import PathSum, gate_sum, identity, simulate, to_matrix

x0, x1, x2, x3 = xvar(0), xvar(1), xvar(2), xvar(3)
y0, y1, y2 = yvar(0), yvar(1), yvar(2)


def bp(*monos):
    return BoolPoly.of(monos)


def appendix_phase_example():
    """(1/sqrt2) sum_y0 w^{-x0} i^{x0 y0 - x1 y0} (-1)^{x0 x1 y0} |x0+x1>|y0>"""
    return PathSum(
        2,
        (bp((x0,), (x1,)), BoolPoly.var(y0)),
        (y0,),
        1,
        PhasePoly.of(
            [
                (Dyadic(7, 3), (x0,)),
                (Dyadic(1, 2), (x0, y0)),
                (Dyadic(3, 2), (x1, y0)),
                (Dyadic(1, 1), (x0, x1, y0)),
            ]
        ),
    )


def appendix_degree_example():
    """(1/2) sum i^{x1 y0 - x1 y1} (-1)^{x0 y0 + x0 y1 + x1 y0 y1} |y0>|y1>"""
    return PathSum(
        2,
        (BoolPoly.var(y0), BoolPoly.var(y1)),
        (y0, y1),
        2,
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


# --------------------------------------------------------------- reduction

def test_find_reducible_qft3():
    got = find_reducible(qft_sum(3))
    assert got is not None
    z, qubit, q = got
    assert (z, qubit) == (y0, 0)
    assert q == BoolPoly.var(x2)


def test_find_reducible_negatives():
    assert find_reducible(gate_sum(Gate("t", (0,)))) is None
    p = PathSum(1, (bp((y0,), (x0,)),), (y0,), 0, PhasePoly.zero())
    assert find_reducible(p) is None


def test_h_reduce_qft3():
    p = qft_sum(3)
    z, qubit, q = find_reducible(p)
    out = h_reduce(p, z, qubit, q)
    assert out.out == (BoolPoly.var(x2), BoolPoly.var(y1), BoolPoly.var(y2))
    assert out.sqrt2 == 2
    # w^{x2 y1} i^{x2 y0' + x1 y1'} ... in zero-based naming:
    assert out.phase == PhasePoly.of(
        [
            (Dyadic(1, 3), (x2, y2)),
            (Dyadic(1, 2), (x2, y1)),
            (Dyadic(1, 2), (x1, y2)),
            (Dyadic(1, 1), (x1, y1)),
            (Dyadic(1, 1), (x0, y2)),
        ]
    )


def test_h_reduce_h_gate():
    h = gate_sum(Gate("h", (0,)))
    z, qubit, q = find_reducible(h)
    out = h_reduce(h, z, qubit, q)
    assert out == identity(1)


# ------------------------------------------------------------------ stages

def test_affine_simplify_paper_example():
    p = PathSum(
        4,
        (
            BoolPoly.var(x0),
            BoolPoly.var(x1),
            bp((x2,), (x0, x1)),
            bp((x3,), (x0, x1)),
        ),
        (),
        0,
        PhasePoly.zero(),
    )
    st = affine_simplify(SynthState(p))
    assert [str(g) for g in st.applied] == ["cx 2 3"]
    assert st.sum.out == (
        BoolPoly.var(x0),
        BoolPoly.var(x1),
        bp((x2,), (x0, x1)),
        bp((x3,), (x2,)),
    )


def test_affine_simplify_echelon_no_gates():
    p = identity(3)
    st = affine_simplify(SynthState(p))
    assert st.applied == []


def test_affine_simplify_constant_column():
    p = PathSum(2, (bp((x0,), ()), BoolPoly.var(x1)), (), 0, PhasePoly.zero())
    st = affine_simplify(SynthState(p))
    assert [str(g) for g in st.applied] == ["x 0"]
    assert st.sum.out == (BoolPoly.var(x0), BoolPoly.var(x1))


def test_phase_simplify_appendix_example():
    st = phase_simplify(SynthState(appendix_phase_example()))
    # one controlled rotation strips i^{-z0 z1}; the applied gate is its
    # negative, a controlled S
    assert [str(g) for g in st.applied] == ["crz 1/2^2 0 1"]
    assert st.sum.phase == PhasePoly.of(
        [(Dyadic(7, 3), (x0,)), (Dyadic(1, 1), (x0, y0))]
    )
    assert st.sum.out == appendix_phase_example().out


def test_phase_simplify_high_degree_frame():
    # w^{x2 + x0 x1} i^{-x0 x1 x2} |x0, x1, x2+x0x1>: a single rotation after
    # framing the top monomial of the third output
    p = PathSum(
        3,
        (BoolPoly.var(x0), BoolPoly.var(x1), bp((x2,), (x0, x1))),
        (),
        0,
        PhasePoly.of(
            [
                (Dyadic(1, 3), (x2,)),
                (Dyadic(1, 3), (x0, x1)),
                (Dyadic(3, 2), (x0, x1, x2)),
            ]
        ),
    )
    st = phase_simplify(SynthState(p))
    assert [str(g) for g in st.applied] == ["tdg 2"]
    assert st.sum.phase == PhasePoly.zero()
    assert st.sum.out == p.out


def test_phase_simplify_no_frame_monomials():
    p = PathSum(
        2, (BoolPoly.var(y0), BoolPoly.var(x1)), (y0,), 0,
        PhasePoly.of([(Dyadic(1, 2), (x0, y0))]),
    )
    st = phase_simplify(SynthState(p))
    assert st.applied == []
    assert st.sum == p


def test_nonlinear_simplify():
    p = PathSum(
        3,
        (BoolPoly.var(x0), BoolPoly.var(x1), bp((x2,), (x0, x1))),
        (),
        0,
        PhasePoly.zero(),
    )
    st = nonlinear_simplify(SynthState(p))
    assert [str(g) for g in st.applied] == ["ccx 0 1 2"]
    assert st.sum.out == identity(3).out

    hidden = PathSum(
        3,
        (bp((x0, x1)), BoolPoly.var(x1), BoolPoly.var(x2)),
        (),
        0,
        PhasePoly.zero(),
    )
    st2 = nonlinear_simplify(SynthState(hidden))
    assert st2.applied == []  # x0 is not exposed on any wire


def test_nonlinear_then_affine_full_example():
    p = PathSum(
        4,
        (
            BoolPoly.var(x0),
            BoolPoly.var(x1),
            bp((x2,), (x0, x1)),
            bp((x3,), (x2,)),
        ),
        (),
        0,
        PhasePoly.zero(),
    )
    st = nonlinear_simplify(SynthState(p))
    assert [str(g) for g in st.applied] == ["ccx 0 1 2"]
    st = affine_simplify(st)
    assert [str(g) for g in st.applied] == ["ccx 0 1 2", "cx 2 3"]
    assert st.sum.out == identity(4).out


# --------------------------------------------------------- degree reduction

def test_degree_reduce_appendix():
    p = appendix_degree_example()
    got = degree_reduce(p, y1)
    assert got is not None
    assert got.out == (bp((y0,), (y1,)), BoolPoly.var(y1))
    assert got.phase == PhasePoly.of(
        [
            (Dyadic(1, 2), (x1, y0)),
            (Dyadic(1, 1), (x1, y1)),
            (Dyadic(1, 1), (x0, y0)),
        ]
    )
    assert_close(to_matrix(got), to_matrix(p))


def test_degree_reduce_noop_when_nothing_blocks():
    p = PathSum(
        1, (BoolPoly.var(y0), BoolPoly.var(y1))[:1], (y0, y1), 0,
        PhasePoly.of([(Dyadic(1, 1), (x0, y0)), (Dyadic(1, 1), (y0, y1))]),
    )
    assert degree_reduce(p, y0) is None


def test_degree_reduce_linear_system():
    # y0's half-integer quotient is covered by y1's: substituting
    # y1 <- y1 + y0 clears every y0 occurrence from the phase
    p = PathSum(
        2,
        (BoolPoly.var(y0), BoolPoly.var(y1), BoolPoly.var(y2))[:2],
        (y0, y1, y2),
        2,
        PhasePoly.of(
            [
                (Dyadic(1, 1), (x0, y0)),
                (Dyadic(1, 1), (x0, y1)),
                (Dyadic(1, 2), (x1, y2)),  # unrelated blocked term
            ]
        ),
    )
    got = degree_reduce(p, y0)
    assert got is not None
    q, _ = got.phase.quotient(y0)
    assert q == PhasePoly.zero()
    assert q.half_part() == BoolPoly.zero()
    assert_close(to_matrix(got), to_matrix(p))


# ----------------------------------------------------------- full synthesis

def test_synthesize_identity():
    out = synthesize(identity(3))
    assert out.gates == ()


def test_synthesize_qft3_structure():
    out = synthesize(qft_sum(3))
    names = [g.name for g in out.gates]
    assert names.count("h") == 3
    assert sum(1 for g in out.gates if g.name in ("crz", "cz")) == 3
    assert names.count("swap") == 1
    n = 8
    dft = np.array(
        [[np.exp(2j * np.pi * j * k / n) for k in range(n)] for j in range(n)]
    ) / np.sqrt(n)
    assert_close(unitary(out), dft)


def test_synthesize_appendix_phase_example():
    p = appendix_phase_example()
    out = synthesize(p)
    assert [str(g) for g in out.gates] == [
        "swap 0 1", "tdg 1", "cx 1 0", "h 1", "crz 3/2^2 0 1",
    ]
    assert_close(unitary(out), to_matrix(p))


def test_synthesize_appendix_degree_example():
    p = appendix_degree_example()
    out = synthesize(p)
    assert [str(g) for g in out.gates] == [
        "h 0", "crz 1/2^2 0 1", "h 1", "cx 1 0",
    ]
    assert_close(unitary(out), to_matrix(p))


def test_synthesize_requires_square():
    eta = PathSum(0, (BoolPoly.var(y0), BoolPoly.var(y0)), (y0,), 1, PhasePoly.zero())
    with pytest.raises(DimensionMismatch):
        synthesize(eta)


def test_synthesize_step_soundness():
    for seed in range(10):
        c = random_circuit("cliffordt", 4, 30, seed)
        p = simulate(c)
        out = synthesize(p)
        assert_close(unitary(out), unitary(c))


def test_stage_invariant_applied_gates_track_the_sum():
    # after every stage, M(current) == M(applied as a circuit) @ M(original);
    # in particular rolling back a frame leaves the sum equal to the original
    # composed with the stripped rotations
    from pathsum.circuit import Circuit
    from pathsum.rewrite import normalize

    for seed in range(12):
        c = random_circuit("cliffordt", 3, 18, seed)
        p, _ = normalize(simulate(c))
        m0 = to_matrix(p)
        st = SynthState(p)
        for stage in (affine_simplify, phase_simplify, nonlinear_simplify, phase_simplify):
            stage(st)
            applied = unitary(Circuit(p.n, tuple(st.applied)))
            assert_close(to_matrix(st.sum), applied @ m0)


def test_synthesize_matches_clifford_route():
    for seed in range(10):
        c = random_circuit("clifford", 5, 60, seed)
        p = simulate(c)
        general = synthesize(p)
        exact = synth_clifford(p)
        assert_close(unitary(general), unitary(exact))


def test_bell_state_flow():
    # f = [y0, y0] with phase (1/2) x0 y0: affine exposes y0, one Hadamard
    # strips it, and the reversed log is the Bell-pair circuit
    p = PathSum(
        1, (BoolPoly.var(y0), BoolPoly.var(y0)), (y0,), 1,
        PhasePoly.of([(Dyadic(1, 1), (x0, y0))]),
    )
    st = affine_simplify(SynthState(p))
    assert [str(g) for g in st.applied] == ["cx 0 1"]
    z, qubit, q = find_reducible(st.sum)
    st.sum = h_reduce(st.sum, z, qubit, q)
    st.applied.append(Gate("h", (qubit,)))
    assert st.sum.out == (BoolPoly.var(x0), BoolPoly.zero())
    circuit = [str(g.dagger()) for g in reversed(st.applied)]
    assert circuit == ["h 0", "cx 0 1"]
