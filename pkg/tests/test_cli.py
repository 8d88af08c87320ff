import math

import pytest

from sphereig.cli import main

PI = math.pi


@pytest.fixture
def cap_spec_file(tmp_path):
    path = tmp_path / "cap.spec"
    path.write_text("kind = cap\ndim = 2\ngamma = pi/3\n")
    return path


def test_cap_spectrum_table(capsys):
    code = main(["cap-spectrum", "--dim", "2", "--gamma", "pi/2", "--kmax", "2"])
    out = capsys.readouterr().out
    assert code == 0
    lines = [ln for ln in out.splitlines() if ln and not ln.startswith("#")]
    table = {(int(p[0]), int(p[1])): float(p[2])
             for p in (ln.split() for ln in lines[1:])}
    assert abs(table[(0, 1)]) < 1e-12
    assert abs(table[(0, 2)] - 6.0) < 1e-7
    assert abs(table[(1, 1)] - 2.0) < 1e-8
    footer = [ln for ln in out.splitlines() if "mu1(D_gamma)" in ln][0]
    assert abs(float(footer.split("=")[1].split("(")[0]) - 2.0) < 1e-8


def test_solve_and_mesh_export(tmp_path, cap_spec_file, capsys):
    mesh_path = tmp_path / "mesh.txt"
    code = main(["solve", "--spec", str(cap_spec_file), "--h", "0.1",
                 "--count", "3", "--export-mesh", str(mesh_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert mesh_path.exists()
    assert mesh_path.read_text().startswith("mesh ")
    first = [ln for ln in out.splitlines() if ln.strip().startswith("0 ")][0]
    assert abs(float(first.split()[1])) < 1e-9


def test_verify_pass_and_csv(tmp_path, cap_spec_file, capsys):
    csv_path = tmp_path / "report.csv"
    code = main(["verify", "--spec", str(cap_spec_file), "--h", "0.08",
                 "--proof-steps", "--csv", str(csv_path)])
    out = capsys.readouterr().out
    assert code == 0
    kv = dict(ln.split(" = ") for ln in out.splitlines() if " = " in ln
              and not ln.startswith("trial_bound"))
    assert kv["pass"] == "true"
    assert abs(float(kv["margin"])) < float(kv["tolerance"])
    assert "ratio_excess" in kv
    header = csv_path.read_text().splitlines()[0]
    assert header.startswith("name,dim,h,")


def test_verify_input_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("kind = cap\ndim = 2\ngamma = 3.0\n")
    code = main(["verify", "--spec", str(bad), "--h", "0.1"])
    assert code == 2
    assert "input error" in capsys.readouterr().err

    code = main(["verify", "--spec", str(tmp_path / "missing.spec"),
                 "--h", "0.1"])
    assert code == 2


def test_verify_margin_failure_exit_code(tmp_path, cap_spec_file, monkeypatch):
    """Exit code 1 when the reported margin falls below the tolerance."""
    import sphereig.cli as cli

    real = cli.verify_domain

    def pessimist(spec, h, **kw):
        rep = real(spec, h, **kw)
        rep.margin = -1.0
        return rep

    monkeypatch.setattr(cli, "verify_domain", pessimist)
    code = main(["verify", "--spec", str(cap_spec_file), "--h", "0.1"])
    assert code == 1


def test_solver_failure_exit_code(cap_spec_file, monkeypatch):
    import sphereig.cli as cli
    from sphereig.errors import SolverError

    def boom(spec, h, **kw):
        raise SolverError("synthetic breakdown")

    monkeypatch.setattr(cli, "verify_domain", boom)
    code = main(["verify", "--spec", str(cap_spec_file), "--h", "0.1"])
    assert code == 3


def test_sweep_writes_csv(tmp_path, cap_spec_file, capsys):
    out_path = tmp_path / "sweep.csv"
    code = main(["sweep", "--template", str(cap_spec_file), "--param", "gamma",
                 "--from", "0.4", "--to", "1.2", "--steps", "4",
                 "--h", "0.1", "--cap-only", "--out", str(out_path)])
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert len(lines) == 5
    assert lines[0].startswith("name,")


def test_sweep_bit_identical_reruns(tmp_path, cap_spec_file):
    paths = []
    for tag in ("a", "b"):
        out_path = tmp_path / f"sweep_{tag}.csv"
        main(["sweep", "--template", str(cap_spec_file), "--param", "gamma",
              "--from", "0.5", "--to", "1.0", "--steps", "3",
              "--h", "0.12", "--out", str(out_path)])
        paths.append(out_path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sweep_bit_identical_across_processes(tmp_path, cap_spec_file):
    """Fresh interpreters must reproduce the CSV byte-for-byte."""
    import subprocess
    import sys

    paths = []
    for tag in ("p1", "p2"):
        out_path = tmp_path / f"sweep_{tag}.csv"
        cmd = [sys.executable, "-m", "sphereig.cli", "sweep",
               "--template", str(cap_spec_file), "--param", "gamma",
               "--from", "0.6", "--to", "1.0", "--steps", "2",
               "--h", "0.12", "--out", str(out_path)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        paths.append(out_path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
