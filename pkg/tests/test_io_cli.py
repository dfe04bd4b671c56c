import json
import os
import subprocess
import sys
from fractions import Fraction

import pytest

from blowup.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, build_instance, main
from blowup.errors import FormatError, InvariantError
from blowup.io import instance_from_dict, instance_to_dict, load_embedding, load_instance, save_instance


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["gen", "--pattern", "hampath", "--N", "100", "--delta", "1/2", "--seed", "3",
                 "--out", str(path)]) == EXIT_OK
    return path


def test_instance_round_trip_is_lossless():
    inst = build_instance("sqhamcycle", 12, Fraction(1, 2), 4, restrict=0)
    again = instance_from_dict(json.loads(json.dumps(instance_to_dict(inst))))
    assert again.host.graph == inst.host.graph
    assert again.pattern.assignment == inst.pattern.assignment
    assert again.params == inst.params
    assert instance_to_dict(again) == instance_to_dict(inst)


def test_restrictions_survive_the_file_format(tmp_path):
    inst = build_instance("hampath", 100, Fraction(1, 2), 1, restrict=1)
    save_instance(inst, tmp_path / "r.json")
    again = load_instance(tmp_path / "r.json")
    assert again.restriction_map() == inst.restriction_map()


def test_gen_is_deterministic(tmp_path, instance_file):
    other = tmp_path / "again.json"
    main(["gen", "--pattern", "hampath", "--N", "100", "--delta", "1/2", "--seed", "3", "--out", str(other)])
    assert other.read_bytes() == instance_file.read_bytes()


def test_gen_reports_the_cascade(capsys, tmp_path):
    main(["gen", "--pattern", "matching", "--N", "5", "--delta", "1", "--out", str(tmp_path / "m.json")])
    out = capsys.readouterr().out
    assert "n=10" in out and "cascade" in out and "clamped: buffer-count, T1" in out


def test_embed_then_verify(tmp_path, instance_file, capsys):
    emb = tmp_path / "phi.json"
    report = tmp_path / "report.json"
    code = main(["embed", "--in", str(instance_file), "--out-embedding", str(emb), "--report", str(report)])
    assert code == EXIT_OK
    assert json.loads(report.read_text())["outcome"] == "success"
    assert main(["verify", "--in", str(instance_file), "--embedding", str(emb)]) == EXIT_OK
    assert "verify ok" in capsys.readouterr().out


def test_verify_reports_violations(tmp_path, instance_file, capsys):
    emb = tmp_path / "phi.json"
    main(["embed", "--in", str(instance_file), "--out-embedding", str(emb)])
    phi = load_embedding(emb)
    phi[0] = phi[2]
    emb.write_text(json.dumps(phi))
    capsys.readouterr()
    assert main(["verify", "--in", str(instance_file), "--embedding", str(emb)]) == EXIT_FAIL
    out = capsys.readouterr().out
    assert "injectivity: vertices 0 and 2 both map to" in out
    assert "verify FAIL" in out


def test_hand_permuted_embedding_breaks_an_edge(tmp_path, instance_file, capsys):
    emb = tmp_path / "phi.json"
    main(["embed", "--in", str(instance_file), "--out-embedding", str(emb)])
    inst = load_instance(instance_file)
    phi = load_embedding(emb)
    g = inst.host.graph.matrix
    # swap images inside cluster 1 until some pattern edge lands on a non-edge
    odd = list(range(1, len(phi), 2))
    for a in odd:
        for b in odd:
            trial = list(phi)
            trial[a], trial[b] = phi[b], phi[a]
            if any(not g[trial[x], trial[x + 1]] for x in range(len(phi) - 1)):
                emb.write_text(json.dumps(trial))
                capsys.readouterr()
                assert main(["verify", "--in", str(instance_file), "--embedding", str(emb)]) == EXIT_FAIL
                assert "edge: {" in capsys.readouterr().out
                return
    pytest.fail("no swap broke an edge")


def test_corrupted_assignment_is_a_usage_error(tmp_path, instance_file, capsys):
    d = json.loads(instance_file.read_text())
    d["psi"][0] = 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    assert main(["embed", "--in", str(bad)]) == EXIT_USAGE
    assert "invariant" in capsys.readouterr().err
    with pytest.raises(InvariantError):
        load_instance(bad)


def test_malformed_files(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        load_instance(p)
    p.write_text(json.dumps({"format": "something-else"}))
    assert main(["embed", "--in", str(p)]) == EXIT_USAGE
    p.write_text(json.dumps([1, 2.5]))
    with pytest.raises(FormatError):
        load_embedding(p)


def test_recorded_density_must_match(tmp_path, instance_file):
    d = json.loads(instance_file.read_text())
    d["cluster_edges"][0]["density"] = "1/3"
    with pytest.raises(InvariantError):
        instance_from_dict(d)


def test_usage_errors_exit_2(tmp_path):
    assert main([]) == EXIT_USAGE
    assert main(["gen", "--pattern", "sqhamcycle", "--N", "5", "--delta", "1", "--r-graph", "K2"]) == EXIT_USAGE
    assert main(["gen", "--pattern", "nonsense", "--N", "5", "--delta", "1"]) == EXIT_USAGE
    assert main(["gen", "--pattern", "hampath", "--N", "5", "--delta", "x"]) == EXIT_USAGE
    assert main(["bench", "--sizes", "a,b"]) == EXIT_USAGE


def test_certify(instance_file, capsys):
    assert main(["certify", "--in", str(instance_file), "--pair", "0", "1", "--eps", "0.45"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "certificate: passes=" in out and "super-regular=" in out
    assert main(["certify", "--in", str(instance_file), "--pair", "0", "0", "--eps", "0.45"]) == EXIT_USAGE


def test_certify_small_pair_uses_the_exact_check(tmp_path, capsys):
    path = tmp_path / "s.json"
    main(["gen", "--pattern", "hampath", "--N", "8", "--delta", "1/2", "--out", str(path)])
    capsys.readouterr()
    assert main(["certify", "--in", str(path), "--pair", "0", "1", "--eps", "1/5"]) == EXIT_OK
    assert "exact: regular=" in capsys.readouterr().out


def test_embed_failure_exits_1_and_dumps_state(tmp_path, capsys):
    path = tmp_path / "f.json"
    main(["gen", "--pattern", "sqhamcycle", "--N", "60", "--delta", "1/2", "--seed", "0", "--out", str(path)])
    dump = tmp_path / "state.json"
    code = main(["embed", "--in", str(path), "--dump-state-on-failure", str(dump)])
    if code == EXIT_OK:
        pytest.skip("this seed happened to succeed")
    assert code == EXIT_FAIL
    assert json.loads(dump.read_text())["format"] == "blowup-state/1"
    assert "embed FAIL" in capsys.readouterr().out


def test_batched_mode_from_the_command_line(instance_file, capsys):
    assert main(["embed", "--in", str(instance_file), "--mode", "batched", "--tail", "0"]) == EXIT_OK
    assert "mode=batched" in capsys.readouterr().err


def test_bench_csv(capsys):
    assert main(["bench", "--sizes", "20,30", "--trials", "2", "--delta", "1"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("N,n,trials,success_rate")
    assert len(lines) == 3
    assert lines[1].split(",")[3] == "1.0"


def test_console_output_respects_no_color(instance_file, tmp_path):
    emb = tmp_path / "phi.json"
    main(["embed", "--in", str(instance_file), "--out-embedding", str(emb)])
    env = dict(os.environ, NO_COLOR="1")
    out = subprocess.run([sys.executable, "-m", "blowup.cli", "verify", "--in", str(instance_file),
                          "--embedding", str(emb)], capture_output=True, text=True, env=env)
    assert out.returncode == 0
    assert "\033[" not in out.stdout
    assert "verify ok" in out.stdout
