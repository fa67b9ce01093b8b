"""CLI surface: subcommand dispatch, exit codes, and determinism."""

import json

from pathsum.cli import main
from pathsum import circuit as circ
from pathsum import sums
from pathsum.frontends import qft_sum


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_random_deterministic(capsys, tmp_path):
    code1, out1, _ = run(capsys, "random", "clifford", "4", "20", "--seed", "9")
    code2, out2, _ = run(capsys, "random", "clifford", "4", "20", "--seed", "9")
    assert code1 == code2 == 0
    assert out1 == out2
    assert circ.parse(out1).width == 4


def test_simulate_and_synth_round_trip(capsys, tmp_path):
    src = tmp_path / "c.qc"
    src.write_text("qubits 2\nh 0\ncx 0 1\ns 1\n")
    code, out, _ = run(capsys, "simulate", str(src))
    assert code == 0
    p = sums.from_json(out)
    assert p.inputs == 2

    sumfile = tmp_path / "c.pss"
    sumfile.write_text(out)
    code2, out2, _ = run(capsys, "synth", str(sumfile))
    assert code2 == 0
    assert circ.parse(out2).width == 2
    other = tmp_path / "r.qc"
    other.write_text(out2)
    code3, _, _ = run(capsys, "verify", str(src), str(other))
    assert code3 == 0


def test_verify_exit_codes(capsys, tmp_path):
    a = tmp_path / "a.qc"
    b = tmp_path / "b.qc"
    a.write_text("qubits 1\nt 0\n")
    b.write_text("qubits 1\ntdg 0\n")
    code, out, _ = run(capsys, "verify", str(a), str(b))
    assert code == 1 and "not_equal" in out

    b.write_text("qubits 1\nt 0\n")
    code2, out2, _ = run(capsys, "verify", str(a), str(b))
    assert code2 == 0 and "equal" in out2

    # global phase: accepted unless strict
    b.write_text("qubits 1\ngphase 1/2^3\nt 0\n")
    code3, _, _ = run(capsys, "verify", str(a), str(b))
    assert code3 == 0
    code4, _, _ = run(capsys, "verify", "--strict-phase", str(a), str(b))
    assert code4 == 1


def test_verify_sum_against_circuit(capsys, tmp_path):
    a = tmp_path / "h.pss"
    a.write_text(sums.to_json(sums.gate_sum(circ.Gate("h", (0,)))))
    b = tmp_path / "h.qc"
    b.write_text("qubits 1\nh 0\n")
    code, out, _ = run(capsys, "verify", str(a), str(b))
    assert code == 0 and out.strip() == "equal"


def test_qft_circuit(capsys):
    code, out, _ = run(capsys, "qft", "3", "--circuit")
    assert code == 0
    c = circ.parse(out)
    from pathsum.frontends import verify_equiv

    assert verify_equiv(qft_sum(3), c).verdict == "equal"


def test_qft_sum_output(capsys):
    code, out, _ = run(capsys, "qft", "3")
    assert code == 0
    assert sums.from_json(out) == qft_sum(3)


def test_taut(capsys):
    code, out, _ = run(capsys, "taut", "x | !x")
    assert code == 0 and out.strip() == "Tautology"
    code2, out2, _ = run(capsys, "taut", "x | y")
    assert code2 == 0 and out2.strip() == "NotTautology"


def test_parse_error_exit(capsys, tmp_path):
    bad = tmp_path / "bad.qc"
    bad.write_text("qubits 1\nfoo 0\n")
    code, _, err = run(capsys, "simulate", str(bad))
    assert code == 65 and "error" in err


def test_usage_error(capsys):
    assert main(["frobnicate"]) == 64


def test_bench_json(capsys):
    code, out, _ = run(
        capsys, "bench", "clifford", "4", "30", "5", "--seed", "3", "--json",
        "--workers", "2",
    )
    assert code == 0
    report = json.loads(out)
    assert [r["seed"] for r in report["rows"]] == [3, 4, 5, 6, 7]
    assert report["aggregate"]["success_rate"] == 1.0
    assert all(set(r) == {"seed", "success", "in_gates", "out_gates", "ms"}
               for r in report["rows"])


def test_bench_cliffordt(capsys):
    code, out, _ = run(
        capsys, "bench", "cliffordt", "4", "20", "4", "--seed", "1", "--json"
    )
    assert code == 0
    report = json.loads(out)
    assert report["aggregate"]["count"] == 4


def test_bench_deterministic_modulo_timing(capsys):
    def strip(report):
        rows = [{k: v for k, v in r.items() if k != "ms"} for r in report["rows"]]
        agg = {k: v for k, v in report["aggregate"].items() if k != "avg_ms"}
        return rows, agg

    _, out1, _ = run(capsys, "bench", "clifford", "4", "30", "5", "--seed", "2", "--json")
    _, out2, _ = run(capsys, "bench", "clifford", "4", "30", "5", "--seed", "2", "--json")
    assert strip(json.loads(out1)) == strip(json.loads(out2))


def test_resynth_and_decompile(capsys, tmp_path):
    src = tmp_path / "c.qc"
    src.write_text("qubits 1\nt 0\nt 0\n")
    code, out, _ = run(capsys, "decompile", str(src))
    assert code == 0
    assert circ.parse(out).gates == (circ.Gate("s", (0,)),)
    code2, out2, _ = run(capsys, "resynth", str(src))
    assert code2 == 0


def test_opt_clifford(capsys, tmp_path):
    src = tmp_path / "c.qc"
    src.write_text("qubits 1\nh 0\nh 0\nt 0\n")
    code, out, err = run(capsys, "opt-clifford", "--min-run", "2", str(src))
    assert code == 0
    assert circ.parse(out).gates == (circ.Gate("t", (0,)),)
    assert "gates" in err


def test_output_file(capsys, tmp_path):
    dest = tmp_path / "out.qc"
    code, out, _ = run(capsys, "-o", str(dest), "random", "clifford", "3", "5")
    assert code == 0 and out == ""
    assert circ.parse(dest.read_text()).width == 3
