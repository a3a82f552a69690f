import json
import os
import subprocess
import sys

import pytest

from rackkex.cli import main
from rackkex.rackcore import canonical_descriptor_bytes, dihedral, trivial

import catalog


def write_rack(path, X):
    path.write_bytes(canonical_descriptor_bytes(X.descriptor()))
    return str(path)


@pytest.fixture
def r3(tmp_path):
    return write_rack(tmp_path / "r3.rack", dihedral(3))


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


def test_rack_check(capsys, r3, tmp_path):
    assert run(capsys, "rack", "check", r3) == (0, "A1 ok A2 ok A3 ok (quandle)\n", "")
    bad = tmp_path / "bad.rack"
    bad.write_text('{"type":"table","n":2,"table":[[0,0],[1,1]]}')
    rc, _, err = run(capsys, "rack", "check", bad)
    assert rc == 2 and "error" in err


def test_rack_inn(capsys, r3):
    rc, out, _ = run(capsys, "rack", "inn", r3)
    assert rc == 0 and out.splitlines()[0] == "order 6, connected"
    assert out.splitlines()[1] == "orbit sizes: 3"


def test_rack_env_from_table_and_presentation(capsys, r3, tmp_path):
    rc, out, _ = run(capsys, "rack", "env", r3)
    assert rc == 0 and out.startswith("< x0, x1, x2 | ") and out.count(",") == 2 + 5
    pres = tmp_path / "p.txt"
    pres.write_text("< a, b | (a, b) = (1, b) >\n")
    assert run(capsys, "rack", "env", pres)[1] == "< a, b | a*b*a^-1*b^-1 >\n"
    pres.write_text("< a | (b, a) = (1, a) >\n")
    rc, _, err = run(capsys, "rack", "env", pres)
    assert rc == 2 and "line 1, column 8" in err


def test_present_inn(capsys, tmp_path):
    path = write_rack(tmp_path / "t2.rack", trivial(2))
    rc, out, _ = run(capsys, "rack", "present-inn", path)
    assert rc == 0 and out.strip() == "< x0, x1 | x0, x1 >"


def test_ext_validate_and_reconstruct(capsys, tmp_path):
    E = catalog.extension_racks()["R3-twisted"]
    path = write_rack(tmp_path / "e.rack", E)
    assert run(capsys, "rack", "ext", "validate", path)[:2] == (0, "rack_valid=yes quandle_valid=no witness=(0, 0)\n")
    d = E.descriptor()
    d["alpha"][0][0][0] = [0, 0]
    bad = tmp_path / "bad.rack"
    bad.write_text(json.dumps(d))
    rc, out, _ = run(capsys, "rack", "ext", "validate", bad)
    assert rc == 1 and "rack_valid=no" in out

    x = write_rack(tmp_path / "r9.rack", dihedral(9))
    y = write_rack(tmp_path / "r3b.rack", dihedral(3))
    fmap = tmp_path / "map.json"
    fmap.write_text(json.dumps([i % 3 for i in range(9)]))
    rc, out, _ = run(capsys, "rack", "ext", "reconstruct", x, fmap, y)
    res = json.loads(out)
    assert rc == 0 and res["extension"]["fiber"] == 3 and len(res["iso"]) == 9
    fmap.write_text(json.dumps([0] * 8 + [1]))
    assert run(capsys, "rack", "ext", "reconstruct", x, fmap, y)[0] == 2


def test_fq_and_thompson(capsys):
    assert run(capsys, "thompson", "nf", "a0*a2*a0^-1") == (0, "a1\n", "")
    assert run(capsys, "fq", "canon", "(a1*a0*a0, a0)", "--embed") == (0, "(a1, a0)\na1*a0*a1^-1\n", "")
    assert run(capsys, "thompson", "nf", "a0**")[0] == 2


def test_kex_files_and_attack(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("RACKKEX_SEED", "3")
    s3 = write_rack(tmp_path / "s3.rack", catalog.s3_transpositions())
    params, seed, pub = tmp_path / "p.json", tmp_path / "ttp.seed", tmp_path / "ttp.pub"
    assert run(capsys, "kex", "ttp-keygen", seed, pub)[0] == 0
    assert len(bytes.fromhex(pub.read_text().strip())) == 32
    assert run(capsys, "kex", "params", s3, "--gen", "(0 1)", "--gen", "(1 2)", "-o", params)[0] == 0
    sec, img, cert = tmp_path / "a.json", tmp_path / "img.json", tmp_path / "cert.json"
    assert run(capsys, "kex", "keygen", params, "--secret-out", sec, "--images-out", img)[0] == 0
    assert run(capsys, "kex", "cert", "issue", params, img, "--ttp-seed", seed,
               "--identity", "alice", "-o", cert)[0] == 0
    assert run(capsys, "kex", "cert", "verify", params, cert, "--ttp-pub", pub) == (0, "certificate ok\n", "")
    c = json.loads(cert.read_text())
    c["identity"] = "mallory"
    cert.write_text(json.dumps(c))
    assert run(capsys, "kex", "cert", "verify", params, cert, "--ttp-pub", pub)[0] == 1
    rc, out, _ = run(capsys, "kex", "attack", params, img)
    assert rc == 0 and out.startswith("consistent secrets: 1\n")


def test_degenerate_params_warn(capsys, tmp_path):
    t3 = write_rack(tmp_path / "t3.rack", trivial(3))
    rc, _, err = run(capsys, "kex", "params", t3, "--gen", "0", "-o", tmp_path / "p.json")
    assert rc == 0 and "degenerate" in err


def test_serve_and_connect(tmp_path):
    env = dict(os.environ, RACKKEX_SEED="5")
    cli = [sys.executable, "-m", "rackkex.cli"]
    r7 = write_rack(tmp_path / "r7.rack", dihedral(7))
    p = tmp_path
    steps = [["kex", "ttp-keygen", p / "s", p / "pub"],
             ["kex", "params", r7, "--gen", "0", "--gen", "1", "-o", p / "params"],
             ["kex", "keygen", p / "params", "--secret-out", p / "a", "--images-out", p / "img"],
             ["kex", "cert", "issue", p / "params", p / "img", "--ttp-seed", p / "s", "--identity", "alice",
              "-o", p / "cert"]]
    for s in steps:
        subprocess.run(cli + [str(a) for a in s], check=True, env=env)
    server = subprocess.Popen(cli + ["kex", "serve", str(p / "params"), "--ttp-pub", str(p / "pub"),
                                     "--listen", "127.0.0.1:0", "--once"],
                              stdout=subprocess.PIPE, text=True, env=env)
    try:
        line = server.stdout.readline()
        assert line.startswith("listening on 127.0.0.1:")
        addr = line.split()[-1]
        client = subprocess.run(cli + ["kex", "connect", str(p / "params"), str(p / "a"), str(p / "cert"),
                                       "--addr", addr], capture_output=True, text=True, env=env, timeout=30)
        out, _ = server.communicate(timeout=30)
    finally:
        server.kill()
    assert client.returncode == 0 and server.returncode == 0
    fp_client = client.stdout.split()[-1]
    assert out.split()[-1] == fp_client and len(fp_client) == 8
