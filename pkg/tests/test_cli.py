import json

import numpy as np

from minsurf.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main
from minsurf.immersion import grid_to_json
from minsurf.surfaces import build_example


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr().out.strip().splitlines()
    summary = json.loads(out[-1]) if out else {}
    return code, summary


class TestVerify:
    def test_slice_all_complex(self, tmp_path, capsys):
        code = main(["verify", "--example", "slice:first", "--grid", "33x33",
                     "--out", str(tmp_path)])
        capsys.readouterr()
        assert code == EXIT_PASS
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["schema_version"] == 1
        assert report["complex_fraction"] == 1.0
        assert (tmp_path / "grid.csv").exists()
        assert (tmp_path / "grid.json").exists()

    def test_degenerate_example_reported(self, tmp_path, capsys):
        code = main(["verify", "--example", "holo:2z1",
                     "--out", str(tmp_path)])
        capsys.readouterr()
        assert code == EXIT_PASS
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["degeneracy_contour_points"] > 0
        assert report["fractions"]["negative_definite"] > 0

    def test_corrupted_input_fails_with_named_norm(self, tmp_path, capsys):
        F = build_example("slice:first", nx=17)
        F.values[5:8, 5:8] *= 1.01   # off the quadric
        path = tmp_path / "corrupted.json"
        grid_to_json(F, path)
        code, summary = run(["verify", "--input", str(path)], capsys)
        assert code == EXIT_FAIL
        assert "quadric" in summary["failures"]

    def test_missing_source_is_usage_error(self, capsys):
        code, _ = run(["verify"], capsys)
        assert code == EXIT_USAGE

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfgp = tmp_path / "c.json"
        cfgp.write_text(json.dumps({"example": "slice:first", "bogus": 1}))
        code, _ = run(["verify", "--config", str(cfgp)], capsys)
        assert code == EXIT_USAGE

    def test_config_file_drives_run(self, tmp_path, capsys):
        cfgp = tmp_path / "c.json"
        cfgp.write_text(json.dumps({"example": "geodesic-product",
                                    "nx": 17, "ny": 17}))
        code, summary = run(["verify", "--config", str(cfgp)], capsys)
        assert code == EXIT_PASS

    def test_tol_override(self, capsys):
        code, summary = run(["verify", "--example", "slice:first",
                             "--grid", "17", "--tol", "quadric=1e-30"],
                            capsys)
        assert code == EXIT_FAIL
        assert "quadric" in summary["failures"]


class TestPipeline:
    def test_A1_artifacts(self, tmp_path, capsys):
        code, summary = run(["pipeline", "--theorem", "A1", "--grid", "25",
                             "--out", str(tmp_path)], capsys)
        assert code == EXIT_PASS
        for name in ("report.json", "gordon.json", "fundata.json",
                     "grid.csv", "grid.json", "factor1.obj", "factor2.obj"):
            assert (tmp_path / name).exists(), name
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["pass"] is True
        assert report["reconstruction"]["drift"] <= \
            report["reconstruction"]["drift_budget"]

    def test_t_invariance_across_runs(self, tmp_path, capsys):
        us = {}
        for t in ("0.0", "1.3"):
            out = tmp_path / t
            code, _ = run(["pipeline", "--theorem", "C1", "--grid", "25",
                           "--t", t, "--out", str(out)], capsys)
            assert code == EXIT_PASS
            doc = json.loads((out / "fundata.json").read_text())
            us[t] = (np.array(doc["u"]), np.array(doc["C1"]),
                     np.array(doc["gamma1"]["re"]))
        assert np.allclose(us["0.0"][0], us["1.3"][0], equal_nan=True)
        assert np.allclose(us["0.0"][1], us["1.3"][1], equal_nan=True)
        assert not np.allclose(us["0.0"][2], us["1.3"][2], equal_nan=True)

    def test_requires_theorem(self, capsys):
        code, _ = run(["pipeline", "--grid", "17"], capsys)
        assert code == EXIT_USAGE

    def test_hyperbolic_theorem_runs(self, tmp_path, capsys):
        code, summary = run(["pipeline", "--theorem", "B1", "--grid", "25",
                             "--out", str(tmp_path)], capsys)
        assert code == EXIT_PASS
        gordon_doc = json.loads((tmp_path / "gordon.json").read_text())
        assert gordon_doc["eps"] == -1
