import json
import math

import numpy as np
import pytest

from chargeq import classical
from chargeq.cli import run


def _lines(capsys):
    captured = capsys.readouterr()
    return captured.out.splitlines(), captured.err


def test_zeros_csv(capsys):
    assert run(["zeros", "--family", "jacobi", "--n", "10", "--alpha", "0.5", "--beta", "-0.3"]) == 0
    out, _ = _lines(capsys)
    assert out[0] == "index,position"
    assert len(out) == 11
    values = [float(line.split(",")[1]) for line in out[1:]]
    oracle = classical.zeros(classical.jacobi(0.5, -0.3), 10)
    assert np.max(np.abs(np.array(values) - oracle)) < 1e-15


def test_zeros_output_is_deterministic(capsys):
    args = ["zeros", "--family", "hermite", "--n", "7"]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    second = capsys.readouterr().out
    assert first == second


def test_zeros_json(capsys):
    assert run(["zeros", "--family", "laguerre", "--n", "3", "--alpha", "1.0", "--format", "json"]) == 0
    out = capsys.readouterr().out
    payload = json.loads(out)
    assert len(payload["zeros"]) == 3


def test_seventeen_significant_digits_roundtrip(capsys):
    assert run(["zeros", "--family", "jacobi", "--n", "5"]) == 0
    out, _ = _lines(capsys)
    oracle = classical.zeros(classical.jacobi(0.0, 0.0), 5)
    for line, expected in zip(out[1:], oracle):
        assert float(line.split(",")[1]) == expected


def test_equilibrate_free(capsys):
    assert run(["equilibrate", "--family", "jacobi", "--n", "3"]) == 0
    out, err = _lines(capsys)
    assert out[0] == "index,position"
    diag = json.loads(err)
    assert diag["converged"] is True
    values = np.array([float(line.split(",")[1]) for line in out[1:]])
    assert values == pytest.approx(classical.zeros(classical.jacobi(0, 0), 3), abs=1e-10)


def test_equilibrate_json_format(capsys):
    assert run(["equilibrate", "--family", "hermite", "--n", "2", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["positions"] == pytest.approx(
        [-1 / math.sqrt(2), 1 / math.sqrt(2)], abs=1e-10
    )
    assert payload["diagnostics"]["converged"] is True


def test_equilibrate_with_field_json_and_composition(tmp_path, capsys):
    field_file = tmp_path / "field.json"
    field_file.write_text(
        json.dumps(
            {
                "charges": [
                    {"location": -1.0, "mass": 0.3},
                    {"location": 0.0, "mass": 0.4},
                    {"location": 1.0, "mass": 0.35},
                ],
                "smooth": [],
            }
        )
    )
    assert run(
        [
            "equilibrate",
            "--field-json",
            str(field_file),
            "--composition",
            "2,1",
        ]
    ) == 0
    out, err = _lines(capsys)
    values = np.array([float(line.split(",")[1]) for line in out[1:]])
    assert values.size == 3
    assert np.sum((values > -1) & (values < 0)) == 2


def test_equilibrate_continuum(tmp_path, capsys):
    poly_file = tmp_path / "polyline.json"
    poly_file.write_text(
        json.dumps(
            {
                "vertices": [
                    {"re": -1.0, "im": 0.0},
                    {"re": 0.0, "im": 1.0},
                    {"re": 1.0, "im": 0.0},
                ]
            }
        )
    )
    assert run(
        ["equilibrate", "--family", "jacobi", "--n", "2", "--continuum", str(poly_file)]
    ) == 0
    out, _ = _lines(capsys)
    assert out[0] == "index,re,im"
    assert len(out) == 3


def test_equilibrate_nonconvergence_exit_code(capsys):
    code = run(["equilibrate", "--family", "jacobi", "--n", "12", "--max-iter", "1"])
    out, err = _lines(capsys)
    assert code == 3
    assert out[0] == "index,position" and len(out) == 13  # last iterate still emitted
    assert json.loads(err)["converged"] is False


def test_equilibrate_validation_errors(capsys):
    assert run(["equilibrate", "--family", "jacobi", "--alpha", "-2", "--n", "3"]) == 2
    assert "error:" in capsys.readouterr().err
    assert run(["equilibrate", "--family", "jacobi"]) == 2


def test_unknown_flags_and_commands(capsys):
    assert run(["zeros", "--family", "jacobi", "--n", "3", "--bogus"]) == 2
    assert "usage" in capsys.readouterr().err
    assert run(["not-a-command"]) == 2


def test_heine_single_and_enumerate(tmp_path, capsys):
    system_file = tmp_path / "system.json"
    system_file.write_text(
        json.dumps(
            {
                "poles": [-1.0, 0.0, 1.0],
                "residues": [0.6, 0.8, 0.7],
                "degree": 4,
                "composition": [2, 2],
            }
        )
    )
    assert run(["heine", "--system", str(system_file)]) == 0
    out, err = _lines(capsys)
    assert out[0] == "composition,index,zero"
    assert len(out) == 5
    assert all(line.startswith("2|2,") for line in out[1:])
    diag = json.loads(err)
    assert diag["solutions"][0]["converged"] is True

    assert run(["heine", "--system", str(system_file), "--enumerate"]) == 0
    out, err = _lines(capsys)
    tags = {line.split(",")[0] for line in out[1:]}
    assert tags == {"0|4", "1|3", "2|2", "3|1", "4|0"}
    assert len(out) == 1 + 5 * 4
    diag = json.loads(err)
    assert len(diag["solutions"]) == 5 and not diag["failures"]


def test_heine_enumerate_json(tmp_path, capsys):
    system_file = tmp_path / "system.json"
    system_file.write_text(
        json.dumps({"poles": [-1.0, 0.0, 1.0], "residues": [1.0, 1.0, 1.0], "degree": 2})
    )
    assert run(["heine", "--system", str(system_file), "--enumerate", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["solutions"]) == 3
    for sol in payload["solutions"]:
        assert len(sol["van_vleck"]) <= 2


def test_heine_failures_exit_code(tmp_path, capsys):
    system_file = tmp_path / "system.json"
    system_file.write_text(
        json.dumps({"poles": [-1.0, 0.0, 1.0], "residues": [1.0, 1.0, 1.0], "degree": 2})
    )
    code = run(["heine", "--system", str(system_file), "--enumerate", "--max-iter", "0"])
    out, err = _lines(capsys)
    assert code == 3
    assert len(json.loads(err)["failures"]) == 3


def test_heine_requires_composition_without_enumerate(tmp_path, capsys):
    system_file = tmp_path / "system.json"
    system_file.write_text(
        json.dumps({"poles": [-1.0, 1.0], "residues": [1.0, 1.0], "degree": 2})
    )
    assert run(["heine", "--system", str(system_file)]) == 2


def test_measure_csv_and_summary(tmp_path, capsys):
    system_file = tmp_path / "system.json"
    system_file.write_text(json.dumps({"poles": [-1.0, 0.0, 1.0]}))
    assert run(
        ["measure", "--system", str(system_file), "--theta", "0.3,0.7", "--samples", "10"]
    ) == 0
    out, err = _lines(capsys)
    assert out[0] == "x,density"
    assert len(out) >= 10
    summary = json.loads(err)
    assert len(summary["support"]) == 2
    assert summary["interval_masses"] == pytest.approx([0.3, 0.7], abs=1e-6)
    for line in out[1:]:
        x, d = map(float, line.split(","))
        assert d > 0.0


def test_measure_json(tmp_path, capsys):
    system_file = tmp_path / "system.json"
    system_file.write_text(json.dumps({"poles": [-1.0, 1.0]}))
    assert run(
        [
            "measure",
            "--system",
            str(system_file),
            "--theta",
            "1.0",
            "--samples",
            "4",
            "--format",
            "json",
        ]
    ) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["support"] == [[-1.0, 1.0]]
    assert payload["betas"] == []


def test_compare_pipeline(tmp_path, capsys):
    zeros_file = tmp_path / "z.csv"
    measure_file = tmp_path / "m.json"
    assert run(
        ["zeros", "--family", "jacobi", "--n", "200", "--output", str(zeros_file)]
    ) == 0
    capsys.readouterr()
    measure_file.write_text(json.dumps({"poles": [-1.0, 1.0], "theta": [1.0]}))
    assert run(["compare", "--zeros", str(zeros_file), "--measure", str(measure_file)]) == 0
    out, _ = _lines(capsys)
    assert out[0] == "ks_distance"
    assert 0.0 < float(out[1]) < 0.05


def test_riccati_output(capsys):
    assert run(["riccati", "--n", "200", "--alpha", "0", "--beta", "0", "--z", "0,2"]) == 0
    out, _ = _lines(capsys)
    assert out[0] == "h_re,h_im,cauchy_re,cauchy_im,residual"
    h_re, h_im, c_re, c_im, residual = map(float, out[1].split(","))
    assert abs(complex(h_re, h_im) - complex(c_re, c_im)) < 0.02
    assert residual < 1e-9
    assert complex(c_re, c_im) == pytest.approx(-1j / math.sqrt(5.0), abs=1e-12)


def test_riccati_json(capsys):
    assert run(["riccati", "--n", "10", "--z", "3", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["residual"] < 1e-9
    assert payload["h"]["im"] == 0.0


def test_output_file_writing(tmp_path, capsys):
    target = tmp_path / "zeros.csv"
    assert run(["zeros", "--family", "hermite", "--n", "4", "--output", str(target)]) == 0
    content = target.read_text()
    assert content.startswith("index,position\n")
    assert len(content.splitlines()) == 5


def test_missing_file_is_validation_error(tmp_path, capsys):
    assert run(["heine", "--system", str(tmp_path / "nope.json")]) == 2
    assert run(["compare", "--zeros", "nope.csv", "--measure", "nope.json"]) == 2
