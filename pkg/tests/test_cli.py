import json

import pytest

from kmnverify.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, main
from kmnverify.geometry import load_manifest


def write_manifest(tmp_path, data, name="manifest.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_verify_registry_entry(capsys):
    assert main(["verify", "ns-half", "--grid", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[kmn]" in out
    assert "0 failed" in out


def test_verify_json_output(capsys):
    assert main(["verify", "sasakian-r3", "--grid", "1", "--json", "-"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["manifest"]["name"] == "sasakian-r3"
    assert report["summary"]["failed"] == 0


def test_verify_writes_report_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    assert main(["verify", "euclidean-r3", "--grid", "1", "-o", str(target)]) == EXIT_OK
    assert json.loads(target.read_text())["schema_version"] == "1"
    assert "passed" in capsys.readouterr().out


def test_wrong_expected_value_fails(tmp_path, manifest_data):
    data = manifest_data("ns-half")
    data["expected"]["kappa"] = 0.5
    assert main(["verify", write_manifest(tmp_path, data), "--grid", "1"]) == EXIT_FAILED


def test_non_symmetric_metric_is_input_error(tmp_path, manifest_data, capsys):
    data = manifest_data("sasakian-r3")
    data["metric"][0][1] = "y + 1"
    assert main(["verify", write_manifest(tmp_path, data)]) == EXIT_INPUT
    assert "symmetric" in capsys.readouterr().err


def test_unknown_manifest_is_input_error(capsys):
    assert main(["extract", "no-such-manifold"]) == EXIT_INPUT
    assert "no-such-manifold" in capsys.readouterr().err


def test_extract_table(capsys):
    assert main(["extract", "ns-half", "--grid", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "0.750000" in out
    assert "spread" in out


def test_deform_emits_manifest(tmp_path, capsys):
    target = tmp_path / "deformed.json"
    assert main(["deform", "ns-half", "--a", "2", "--emit", str(target)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["predicted"]["kappa"] == pytest.approx(0.9375)
    assert payload["extracted"]["kappa"] == pytest.approx(0.9375, abs=1e-8)
    assert load_manifest(target).metric_at([0, 0, 0])[2][2] == pytest.approx(4.0)


def test_deform_rejects_nonpositive_factor(capsys):
    assert main(["deform", "ns-half", "--a", "-1"]) == EXIT_INPUT
    assert "positive" in capsys.readouterr().err


def test_fit_reports_reduction(capsys):
    assert main(["fit", "ns-half"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["fit"]["nullspace_dim"] == 4
    assert payload["reduced"]["F"] == pytest.approx(-1.75, abs=1e-8)


def test_conformal_matches_declared_flatness(capsys):
    assert main(["conformal", "euclidean-r3", "--grid", "2"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["conformally_flat"] is True


def test_examples_listing(capsys):
    assert main(["examples"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 8
    assert lines[0].startswith("euclidean-r3")


@pytest.mark.parametrize("which,key", [("manifest", "dimension"), ("report", "sections")])
def test_schema(capsys, which, key):
    assert main(["schema", which]) == EXIT_OK
    assert key in json.loads(capsys.readouterr().out)["properties"]


def test_missing_subcommand_exits():
    with pytest.raises(SystemExit):
        main([])


def test_verify_json_to_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    assert main(["verify", "euclidean-r3", "--grid", "2", "--json", str(target)]) == EXIT_OK
    report = json.loads(target.read_text(encoding="utf-8"))
    assert report["manifest"]["name"] == "euclidean-r3"
    assert report["parameters"]["points"] == 8
    assert "0 failed" in capsys.readouterr().out


def test_undecodable_manifest_is_input_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_bytes(b'{"name": "\xff"}')
    assert main(["verify", str(path)]) == EXIT_INPUT
    assert "UTF-8" in capsys.readouterr().err


def test_degenerate_metric_off_validation_grid_is_input_error(tmp_path, manifest_data, capsys):
    # Positive definite on the x = +-1 validation planes, degenerate on x = 0.
    data = manifest_data("sasakian-r3")
    data["metric"][0][0] = "x^2*(1/4 + y^2/4)"
    data["domain"]["resolution"] = 2
    path = write_manifest(tmp_path, data)
    assert main(["extract", path, "--grid", "3"]) == EXIT_INPUT
    assert "positive definite" in capsys.readouterr().err
