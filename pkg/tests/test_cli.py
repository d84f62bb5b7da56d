import json
import os

import pytest

from src.cli import EXIT_CAPS, EXIT_OK, EXIT_USAGE, create_cli, dispatch
from src.config.settings import Settings


def run(capsys, argv):
    code = dispatch(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parser_has_every_subcommand():
    parser = create_cli()
    for argv in (["group"], ["density", "mh"], ["stability", "bound"], ["cohom", "h1"],
                 ["verify"], ["cyclo", "scenario"]):
        assert parser.parse_args(argv).command == argv[0]


def test_basechange_from_subgroup_file(tmp_path, capsys):
    subgroup_file = tmp_path / "a3.json"
    subgroup_file.write_text("[3]")
    code, out, _ = run(capsys, ["density", "basechange", "--group", "S3", "--sigma", "1",
                                "--subgroup-file", str(subgroup_file)])
    assert code == EXIT_OK
    assert json.loads(out) == {"den": 1, "num": 0}


def test_integer_tokens_are_indices_in_unit_groups(capsys):
    # (Z/8)* lists residues 1, 3, 5, 7; index 3 is the residue 7
    code, out, _ = run(capsys, ["density", "basechange", "--group", "(Z/8)*", "--sigma", "3", "--subgroup", "3"])
    assert code == EXIT_OK
    assert json.loads(out) == {"den": 2, "num": 1}


def test_labels_need_the_prefix(capsys):
    code, out, _ = run(capsys, ["density", "basechange", "--group", "(Z/8)*", "--sigma", "label:7",
                                "--subgroup", "label:7"])
    assert code == EXIT_OK
    assert json.loads(out) == {"den": 2, "num": 1}

    code, _, _ = run(capsys, ["density", "basechange", "--group", "(Z/8)*", "--sigma", "label:2", "--subgroup", "0"])
    assert code == EXIT_USAGE


def test_q8_sigma_one_is_minus_one(capsys):
    # Index 1 of Q8 is -1; W = <-1> is the centre
    code, out, _ = run(capsys, ["density", "basechange", "--group", "Q8", "--sigma", "1", "--subgroup", "1"])
    assert code == EXIT_OK
    assert json.loads(out) == {"den": 2, "num": 1}

    code, out, _ = run(capsys, ["density", "basechange", "--group", "Q8", "--sigma", "label:-1", "--subgroup", "1"])
    assert json.loads(out) == {"den": 2, "num": 1}

    # Against the trivial subgroup only the identity has density one
    code, out, _ = run(capsys, ["density", "basechange", "--group", "Q8", "--sigma", "1", "--subgroup", ""])
    assert json.loads(out) == {"den": 1, "num": 0}

    code, out, _ = run(capsys, ["density", "basechange", "--group", "Q8", "--sigma", "label:1", "--subgroup", ""])
    assert json.loads(out) == {"den": 1, "num": 1}


def test_non_integer_element_token(capsys):
    code, _, _ = run(capsys, ["density", "basechange", "--group", "S3", "--sigma", "(1 2)", "--subgroup", "1"])
    assert code == EXIT_USAGE


def test_induced_character(capsys):
    code, out, _ = run(capsys, ["density", "mh", "--group", "S3", "--subgroup", "1"])
    assert code == EXIT_OK
    assert json.loads(out) == {"values": [3, 1, 0]}


def test_unknown_subcommand(capsys):
    code, _, err = run(capsys, ["frobnicate"])
    assert code == EXIT_USAGE
    assert "usage" in err


def test_unknown_preset_is_structured_error(capsys):
    code, _, err = run(capsys, ["group", "--group", "Monster"])
    assert code == EXIT_USAGE
    assert json.loads(err.strip().splitlines()[-1])["error"] == "UnknownPresetError"


def test_h2_over_cap(capsys):
    code, _, err = run(capsys, ["cohom", "h2", "--group", "Z/20", "--orders", "2"])
    assert code == EXIT_CAPS
    assert "CapExceededError" in err


def test_malformed_json_file(tmp_path, capsys):
    group_file = tmp_path / "group.json"
    group_file.write_text("{not json")
    code, _, _ = run(capsys, ["group", "--group-file", str(group_file)])
    assert code == EXIT_USAGE


def test_out_is_byte_deterministic(tmp_path, capsys):
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert dispatch(["--out", str(first), "group", "--group", "S3", "--subgroups", "all"]) == EXIT_OK
    assert dispatch(["group", "--group", "S3", "--subgroups", "all", "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert os.path.exists(f"{first}.meta.json")
    assert json.loads(first.read_text())["order"] == 6


def test_stability_witness(capsys):
    code, out, _ = run(capsys, ["stability", "witness", "--group", "Z/2", "--classes", "0,1"])
    assert code == EXIT_OK
    witness = json.loads(out)["witness"]
    assert witness["stabilizing_layer"] == [0, 1]
    assert witness["bound_a"] == {"den": 1, "num": 1}


def test_stability_orbit(capsys):
    code, out, _ = run(capsys, ["stability", "orbit", "--group", "S3", "--normal", "3", "--sigma", "3"])
    assert code == EXIT_OK
    assert json.loads(out)["orbit_length"] == 2


def test_h1_of_sign_module(capsys):
    code, out, _ = run(capsys, ["cohom", "h1", "--group", "Z/2", "--orders", "4", "--module-action", "sign"])
    assert code == EXIT_OK
    assert json.loads(out)["factors"] == [2]


def test_restriction_map(capsys):
    code, out, _ = run(capsys, ["cohom", "map", "--kind", "res", "--group", "Z/6", "--orders", "3",
                                "--subgroup", "2", "--coords", "1"])
    assert code == EXIT_OK
    assert any(json.loads(out)["coordinates"])


def test_verify_subset(capsys):
    code, out, _ = run(capsys, ["verify", "--groups", "Z/2", "Z/3", "--claims", "density-identities,basechange",
                                "--jobs", "1"])
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["passed"]
    assert "runtime_seconds" not in report


def test_cyclo_scenario(capsys):
    code, out, _ = run(capsys, ["cyclo", "scenario", "section-5.2", "--bound", "100000"])
    assert code == EXIT_OK
    assert json.loads(out)["computed"]["sha1_order"] == 3


def test_cyclo_needs_modulus(capsys):
    code, _, _ = run(capsys, ["cyclo", "estimate", "--residues", "1"])
    assert code == EXIT_USAGE


def test_csv_estimate(capsys):
    code, out, _ = run(capsys, ["--format", "csv", "cyclo", "estimate", "--modulus", "5", "--residues", "1",
                                "--bound", "100000"])
    assert code == EXIT_OK
    header, row = out.strip().splitlines()
    assert header.split(",") == sorted(["modulus", "bound", "weighting", "total", "empirical", "exact",
                                        "exact_float", "abs_error"])
    assert "1/4" in row


def test_save_uses_reports_directory(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(Settings, "DATA_REPORTS_PATH", str(tmp_path))
    code, _, _ = run(capsys, ["cyclo", "estimate", "--modulus", "5", "--residues", "1", "--bound", "100000",
                              "--save"])
    assert code == EXIT_OK
    assert (tmp_path / "cyclo_5_100000.json").exists()


def test_invalid_settings_refuse_to_run(capsys, monkeypatch):
    monkeypatch.setattr(Settings, "JOBS", 0)
    code, _, err = run(capsys, ["group", "--group", "S3"])
    assert code == EXIT_USAGE
    assert "JOBS" in err


@pytest.mark.parametrize("argv", [["density", "mh", "--group", "S3"], ["stability", "bound", "--group", "S3"]])
def test_missing_inputs(capsys, argv):
    code, _, _ = run(capsys, argv)
    assert code == EXIT_USAGE


def test_sha1_from_class_set_file(tmp_path, capsys):
    classes_file = tmp_path / "T.json"
    classes_file.write_text('{"ambient": {"preset": "Z/3"}, "classes": [0], "label": "identity"}')
    code, out, _ = run(capsys, ["cohom", "sha1", "--group", "Z/3", "--orders", "3",
                                "--classes-file", str(classes_file)])
    assert code == EXIT_OK
    assert json.loads(out)["factors"] == [3]


def test_class_set_file_for_another_group(tmp_path, capsys):
    classes_file = tmp_path / "T.json"
    classes_file.write_text('{"ambient": {"preset": "S3"}, "classes": [0]}')
    code, _, _ = run(capsys, ["cohom", "sha1", "--group", "Z/3", "--orders", "3",
                              "--classes-file", str(classes_file)])
    assert code == EXIT_USAGE
