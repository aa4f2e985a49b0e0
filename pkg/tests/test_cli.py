import hashlib
import json
import shutil
import subprocess
import sys

import pytest

from usflab.cli import main
from usflab.graph import format_planenet, parse_planenet
from usflab.packing import format_dcp, parse_dcp
from usflab.forest import format_forest, parse_forest


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_unknown_subcommand_and_flag(capsys):
    assert run(["bogus"], capsys)[0] == 2
    assert run(["gen", "tess", "--nope", "1"], capsys)[0] == 2
    assert run([], capsys)[0] == 2


def test_selftest(capsys):
    code, out, _ = run(["selftest", "--n", "5000"], capsys)
    assert code == 0
    assert out.count("PASS") >= 6 and "FAIL" not in out


def test_gen_writes_file_and_manifest(tmp_path, capsys):
    f = tmp_path / "b.pnet"
    assert run(["gen", "tess", "--p", "3", "--q", "7", "--depth", "2", "-o", str(f)], capsys)[0] == 0
    man = json.loads((tmp_path / "b.pnet.manifest.json").read_text())
    assert man["outputs"][str(f)] == hashlib.sha256(f.read_bytes()).hexdigest()
    assert man["argv"][:2] == ["gen", "tess"] and man["seed"] == 0
    assert {"usflab", "numpy", "scipy", "networkx"} <= set(man["versions"])
    assert man["wall_time_s"] >= 0


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"depth": 3, "q": 8}))
    a, b = tmp_path / "a.pnet", tmp_path / "b.pnet"
    main(["--config", str(cfg), "gen", "tess", "-o", str(a)])
    main(["--config", str(cfg), "gen", "tess", "--depth", "1", "-o", str(b)])
    na, nb = parse_planenet(a.read_text()), parse_planenet(b.read_text())
    assert int(na.labels["layer"].max()) == 3 and na.degree(0) == 8
    assert int(nb.labels["layer"].max()) == 1 and nb.degree(0) == 8
    cfg.write_text(json.dumps({"colour": 1}))
    assert run(["--config", str(cfg), "gen", "tess"], capsys)[0] == 2


def test_malformed_file_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.pnet"
    bad.write_text("planenet v1\nv 0 1:x\n")
    code, _, err = run(["graph", "info", str(bad)], capsys)
    assert code == 2 and "bad.pnet:2:1" in err
    assert run(["graph", "info", str(tmp_path / "missing")], capsys)[0] == 2


def test_computation_error_exit_1(tmp_path, capsys):
    f = tmp_path / "c.pnet"
    main(["gen", "cycle", "--n", "5", "-o", str(f)])
    # 0 and 2 are not adjacent on the 5-cycle, so normalisation fails
    code, _, err = run(["pack", str(f), "--normalize", "0,2"], capsys)
    assert code == 1 and err.startswith("usf-lab:")


def test_pipeline_graph_elec_sample_pack_render(tmp_path, capsys):
    b = tmp_path / "b.pnet"
    main(["gen", "tess", "--depth", "3", "-o", str(b)])
    code, out, _ = run(["graph", "info", str(b)], capsys)
    info = json.loads(out)
    assert code == 0 and info["max_degree"] == 7 and info["packable"]
    d = tmp_path / "d.pnet"
    assert main(["graph", "dual", str(b), "-o", str(d)]) == 0
    code, out, _ = run(["elec", "reff", str(b), "--A", "0", "--B", "1"], capsys)
    free = float(out)
    code, out, _ = run(["elec", "reff", str(b), "--A", "0", "--B", "1", "--mode", "wired"], capsys)
    assert float(out) < free
    code, out, _ = run(["elec", "gap", str(b), "--A", "0", "--B", "1"], capsys)
    assert out.splitlines()[0] == "depth,r_free,r_wired"
    f = tmp_path / "f.txt"
    assert main(["--seed", "5", "sample", "wusf", str(b), "-o", str(f)]) == 0
    assert parse_forest(f.read_text())
    code, out, _ = run(["sample", "ust", str(b), "--n", "20"], capsys)
    assert out.startswith("edge_id,count,frequency")
    p = tmp_path / "b.dcp"
    assert main(["pack", str(b), "--model", "disc", "--normalize", "0,1", "-o", str(p)]) == 0
    s = tmp_path / "fig.svg"
    assert main(["render", str(p), "--forest", str(f), "-o", str(s)]) == 0
    assert s.read_text().startswith("<?xml")
    man = json.loads((tmp_path / "fig.svg.manifest.json").read_text())
    assert set(man["inputs"]) == {str(p), str(f)}


def test_exp_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    argv = ["--threads", "1", "exp", "free-length", "--depth", "4", "--n", "1600",
            "--n-boot", "5", "--seed", "3", "-o", str(out)]
    assert main(argv) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["fit.csv", "manifest.json", "samples.csv"]
    first = (out / "samples.csv").read_bytes()
    assert main(argv) == 0
    assert (out / "samples.csv").read_bytes() == first


def test_file_formats_round_trip_byte_identical(tmp_path):
    b = tmp_path / "b.pnet"
    main(["gen", "tess", "--p", "4", "--q", "5", "--depth", "2", "-o", str(b)])
    text = b.read_text()
    assert format_planenet(parse_planenet(text)) == text
    p = tmp_path / "b.dcp"
    main(["pack", str(b), "-o", str(p)])
    assert format_dcp(parse_dcp(p.read_text())) == p.read_text()
    f = tmp_path / "f.txt"
    main(["sample", "fusf", str(b), "-o", str(f)])
    assert format_forest(parse_forest(f.read_text())) == f.read_text()


@pytest.mark.skipif(shutil.which("usf-lab") is None, reason="console script not installed")
def test_console_script_pipe(tmp_path):
    gen = subprocess.run(["usf-lab", "gen", "tess", "--p", "3", "--q", "7", "--depth", "2"],
                         capture_output=True, check=True)
    pack = subprocess.run(["usf-lab", "pack", "--model", "disc"], input=gen.stdout,
                          capture_output=True, check=True)
    p = parse_dcp(pack.stdout.decode())
    assert p.model == "disc"
    man = json.loads(pack.stderr.decode().strip().splitlines()[-1])
    assert "<stdin>" in man["inputs"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "usflab.cli", "bogus"], capture_output=True)
    assert r.returncode == 2
