import json
import os
import subprocess
import sys

import pytest

from gentree.cli import RunConfig, dumps, run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _body(out):
    return json.loads(out)


def test_pat_example(capsys):
    code, out, _ = _run(capsys, "pat", "--family", "av1423-4123", "--jumps", "-2,+1B,+1B,+1T,+1T,-7")
    assert code == 0 and out == "421563\n"


def test_solve_pq_alpha(capsys):
    code, out, _ = _run(capsys, "solve-pq", "--family", "av123")
    d = _body(out)
    assert code == 0
    for y, a in d["alpha"]:
        assert a == pytest.approx(2.0 ** (y - 2), abs=1e-12)
    assert d["meta"]["version"] and len(d["meta"]["config_hash"]) == 16


def test_sample_size_one(capsys):
    code, out, _ = _run(capsys, "sample", "--family", "av123", "--n", "1", "--reps", "3", "--seed", "7")
    assert code == 0 and out == "1\n1\n1\n"


def test_exit_codes(capsys):
    code, out, err = _run(capsys, "sample", "--family", "nope", "--n", "3")
    assert code == 1 and out == "" and len(err.strip().splitlines()) == 1
    code, _, err = _run(capsys, "mu", "--family", "av123", "--pattern", "113")
    assert code == 1
    code, _, err = _run(capsys, "enumerate", "--family", "av123", "--n", "13")
    assert code == 2 and "resource" in err
    code, _, _ = _run(capsys, "sample", "--family", "famB", "--n", "3", "--seed", "-1")
    assert code == 1
    code, _, _ = _run(capsys, "frobnicate", "--family", "av123")
    assert code == 1
    code, _, _ = _run(capsys, "pat", "--family", "av123", "--jumps", "+1,+2,-1")
    assert code == 1


def test_seed_env_fallback(capsys, monkeypatch):
    _, a, _ = _run(capsys, "sample", "--family", "av132", "--n", "15", "--reps", "4", "--seed", "31")
    monkeypatch.setenv("GENTREE_SEED", "31")
    _, b, _ = _run(capsys, "sample", "--family", "av132", "--n", "15", "--reps", "4")
    assert a == b


def test_files_are_reproducible(tmp_path, capsys):
    outs = []
    path = tmp_path / "z.csv"
    for _ in range(2):
        code, _, _ = _run(capsys, "clt-check", "--family", "av123", "--pattern", "21", "--n", "60",
                          "--reps", "50", "--seed", "5", "--threads", "1", "--out", str(path))
        assert code == 0
        outs.append((path.read_bytes(), path.with_suffix(".report.json").read_bytes()))
    assert outs[0] == outs[1]
    text = outs[0][0].decode()
    assert text.startswith("# gentree ") and "config_hash=" in text.splitlines()[0]
    assert text.splitlines()[1] == "z" and len(text.splitlines()) == 52


def test_enumerate_and_verify(capsys):
    code, out, _ = _run(capsys, "enumerate", "--family", "av1234-2134", "--n", "4")
    d = _body(out)
    assert d["count"] == 22 and len(d["members"]) == 22
    code, out, _ = _run(capsys, "verify", "--family", "famA", "--n", "5", "--trials", "2000")
    d = _body(out)
    assert code == 0 and d["bijection"]["ok"] and d["sampler"]["p_value"] > 0.001


def test_mu_gamma_limit(capsys):
    code, out, _ = _run(capsys, "gamma", "--family", "famA", "--pattern", "21", "--truncation", "30")
    d = _body(out)
    assert d["gamma2"]["lo"] <= 1 / 18 <= d["gamma2"]["hi"]
    code, out, _ = _run(capsys, "mu", "--family", "av123", "--pattern", "21")
    assert _body(out)["mu"]["lo"] <= 0.75 <= _body(out)["mu"]["hi"]
    code, out, _ = _run(capsys, "limit-order", "--family", "av123", "--trials", "2000", "--seed", "2")
    lines = out.splitlines()
    assert lines[0].startswith("#") and lines[1] == "pattern,probability"
    assert sum(float(l.split(",")[1]) for l in lines[2:]) == pytest.approx(1.0)


def test_json_uses_17_digits():
    assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert dumps([1, 2.5]) == "[1, 2.5]"


def test_config_hash_ignores_output_path():
    a = RunConfig("mu", "av123", pattern="21", out="a.json")
    b = RunConfig("mu", "av123", pattern="21", out="b.json")
    c = RunConfig("mu", "av123", pattern="12")
    assert a.digest() == b.digest() != c.digest()


def test_pure_python_fallback():
    script = (
        "import numpy as np\n"
        "from gentree import kernels\n"
        "from gentree._jit import HAVE_NUMBA\n"
        "from gentree.families import get_family\n"
        "from gentree.tree import enumerate_level, decode_many\n"
        "assert not HAVE_NUMBA\n"
        "F = get_family('av1423-4123')\n"
        "seqs = enumerate_level(F, 6)\n"
        "lab = np.array([[x.value for x in s] for s in seqs])\n"
        "col = np.array([[x.color for x in s] for s in seqs])\n"
        "got = [tuple(r) for r in kernels.decode_array(F, lab, col).tolist()]\n"
        "assert got == decode_many(F, seqs)\n"
        "from gentree.cli import run\n"
        "raise SystemExit(run(['pat', '--family', 'av1423-4123', '--jumps', '-2,+1B,+1B,+1T,+1T,-7']))\n"
    )
    env = dict(os.environ, GENTREE_NO_NUMBA="1")
    r = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True,
                       timeout=300)
    assert r.returncode == 0, r.stderr
    assert r.stdout == "421563\n"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "gentree", "sample", "--family", "av123", "--n", "1",
                        "--reps", "3", "--seed", "7"], capture_output=True, text=True, timeout=300)
    assert r.returncode == 0 and r.stdout == "1\n1\n1\n"
