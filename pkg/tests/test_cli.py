import subprocess
import sys

from roundbound.cli import main

from conftest import SCRIPTS, load


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_prove_default_subcommand(capsys):
    code, out, _ = run(capsys, str(SCRIPTS / "two_sequents.g"))
    assert code == 0
    assert "x + y in [3, 5]" in out


def test_prove_unproved(tmp_path, capsys):
    p = tmp_path / "s.g"
    p.write_text("{ x in [0,1] -> x * x in [0, 1b-1] }")
    cert = tmp_path / "c.cert"
    code, out, _ = run(capsys, "prove", str(p), "--cert", str(cert))
    assert code == 1
    assert "unproved" in out and not cert.exists()


def test_prove_input_errors(tmp_path, capsys):
    p = tmp_path / "s.g"
    p.write_text("{ 13/10 in [1.3,1.3] }")
    code, _, err = run(capsys, str(p))
    assert code == 2 and "no representable subset" in err
    p.write_text("{ x in [2, 1] }")
    code, _, err = run(capsys, str(p))
    assert code == 2 and f"{p}:1:" in err
    code, _, err = run(capsys, str(tmp_path / "missing.g"))
    assert code == 2
    assert run(capsys, str(p), "--precision", "1")[0] == 2
    assert run(capsys, str(p), "--budget", "0")[0] == 2


def test_quiet(capsys):
    code, out, _ = run(capsys, str(SCRIPTS / "small_integers.g"), "--quiet")
    assert code == 0 and out == ""


def test_cert_and_check(tmp_path, capsys):
    script = SCRIPTS / "cancellation.g"
    cert = tmp_path / "c.cert"
    assert run(capsys, str(script), "--cert", str(cert), "--quiet")[0] == 0
    code, out, _ = run(capsys, "check", str(cert), "--script", str(script))
    assert code == 0 and out.strip() == "valid"
    text = cert.read_text()

    bad = tmp_path / "bad.cert"
    # an invalid lemma: claim a rounding error of zero where it is not
    lines = text.splitlines()
    i = next(i for i, l in enumerate(lines) if l.startswith("lemma ") and " err_" in l)
    parts = lines[i].split()
    parts[5] = parts[6] = "0b0"
    lines[i] = " ".join(parts)
    bad.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "check", str(bad))
    assert code == 1 and out.startswith(f"invalid: lemma {parts[1]} ")

    bad.write_text(text.replace("roundbound-certificate 1", "roundbound-certificate 9"))
    code, out, _ = run(capsys, "check", str(bad))
    assert code == 2 and out.startswith("structural error")

    code, out, _ = run(capsys, "check", str(cert), "--script", str(SCRIPTS / "two_sequents.g"))
    assert code == 1


def test_budget_and_depth_flags(capsys):
    code, out, _ = run(capsys, str(SCRIPTS / "exponential.g"), "--budget", "1")
    assert code == 1 and "budget" in out
    code, _, _ = run(capsys, str(SCRIPTS / "cancellation.g"), "--depth", "1")
    assert code == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "roundbound", "-"], input=load("two_sequents.g"),
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert "sequent 2: proved" in proc.stdout
