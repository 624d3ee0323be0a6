import os
import tempfile
import unittest
from contextlib import redirect_stderr
from io import StringIO

from twistframe import json
from twistframe.cmd import twistframe as cli

SMALL = ["--L", "4", "--q", "8"]


def result(report, name):
    for r in report["results"]:
        if r["name"] == name:
            return r
    raise KeyError(name)



def statuses(report):
    return {v["name"]: v["status"] for v in report["verdicts"]}


def lambda_rows(data):
    return [[float(v) for v in line.split(",")] for line in data.decode("utf-8").splitlines()[1:]]


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def run_cli(self, *argv):
        with redirect_stderr(StringIO()):
            return cli.run(list(argv))

    def read(self, name, out=None):
        with open(os.path.join(out or self.out, name), "rb") as f:
            return f.read()

    def test_usage_errors(self):
        """Unknown commands, flags and configuration keys exit with 1 and write nothing."""
        self.assertEqual(self.run_cli("frobnicate"), (1, None))
        self.assertEqual(self.run_cli("weight", "--phi", "circle"), (1, None))
        self.assertEqual(self.run_cli("reproduce", "example-x", "--out-dir", self.out), (1, None))
        config_path = os.path.join(self.out, "run.json")
        with open(config_path, "w", encoding="utf-8") as f:
            f.write('{"L": 4, "colour": "blue"}')
        self.assertEqual(self.run_cli("weight", "--config", config_path, "--out-dir", self.out), (1, None))
        self.assertFalse(os.path.exists(os.path.join(self.out, "report.json")))

    def test_missing_output_directory(self):
        """The output directory is not created on demand."""
        code, _ = self.run_cli("weight", *SMALL, "--out-dir", os.path.join(self.out, "missing"))
        self.assertEqual(code, 1)

    def test_weight(self):
        """weight writes the samples of w and checks its mass."""
        code, report = self.run_cli("weight", *SMALL, "--phi", "rect-2x1", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["files"], ["weight.csv"])
        self.assertAlmostEqual(result(report, "mass")["value"], 2.0, delta=2e-2)
        self.assertEqual(statuses(report), {"weight mass identity": "holds"})
        self.assertEqual(report["verdicts"][0]["context"]["torus_samples"], 8)
        self.assertTrue(self.read("weight.csv").startswith(b"xi,w\n"))
        self.assertIsNone(json.loads(self.read("report.json"))["seconds"])

    def test_weight_unit_square(self):
        """The unit square has w = 1 in the requested CSV file."""
        code, report = self.run_cli("weight", *SMALL, "--M", "256", "--out", "w.csv", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["files"], ["w.csv"])
        lines = self.read("w.csv").decode("utf-8").splitlines()
        self.assertEqual(len(lines), 9)
        for line in lines[1:]:
            self.assertAlmostEqual(float(line.split(",")[1]), 1.0, delta=1e-2)

    def test_configuration_file(self):
        """Run parameters are read from --config and overridden by flags."""
        config_path = os.path.join(self.out, "run.json")
        with open(config_path, "w", encoding="utf-8") as f:
            f.write('{"L": 4, "q": 4, "l_max": 1}')
        code, report = self.run_cli("condition-c", "--config", config_path, "--q", "8", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["config"], {"L": 4.0, "q": 8, "l_max": 1})
        self.assertEqual(report["verdicts"][0]["status"], "condition C satisfied")

    def test_deterministic(self):
        """Two identical runs give identical bytes."""
        with tempfile.TemporaryDirectory() as other:
            for out in (self.out, other):
                code, _ = self.run_cli("gram", *SMALL, "--radius", "1", "--out-dir", out)
                self.assertEqual(code, 0)
            self.assertEqual(self.read("report.json"), self.read("report.json", other))
            self.assertEqual(self.read("gram.csv"), self.read("gram.csv", other))

    def test_deterministic_heisenberg(self):
        """Bracket runs on the group are reproducible byte for byte."""
        with tempfile.TemporaryDirectory() as other:
            for out in (self.out, other):
                code, _ = self.run_cli("heisenberg-g", "--example", "2", "--lambda-samples", "4", "--out-dir", out)
                self.assertEqual(code, 0)
            self.assertEqual(self.read("report.json"), self.read("report.json", other))
            self.assertEqual(self.read("g.csv"), self.read("g.csv", other))

    def test_record_time(self):
        """--record-time stores the elapsed seconds."""
        code, report = self.run_cli("gram", *SMALL, "--radius", "0", "--record-time", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertGreaterEqual(report["seconds"], 0.0)

    def test_csv_format(self):
        """The csv format adds results.csv to the manifest."""
        code, report = self.run_cli("gram", *SMALL, "--radius", "0", "--format", "csv", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["files"], ["gram.csv", "results.csv"])
        self.assertTrue(self.read("results.csv").startswith(b"name,value,tol,provenance\n"))

    def test_dual_refused(self):
        """A generator whose weight vanishes is refused with exit code 2 and a diagnostic report."""
        code, report = self.run_cli("dual", *SMALL, "--phi", "psi", "--out-dir", self.out)
        self.assertEqual(code, 2)
        self.assertEqual(statuses(report), {"dual": "refused"})
        self.assertAlmostEqual(report["verdicts"][0]["context"]["argmin_xi"], 0.5)
        self.assertAlmostEqual(result(report, "diagnostic")["value"]["argmin_xi"], 0.5)
        self.assertEqual(json.loads(self.read("report.json"))["verdicts"][0]["status"], "refused")

    def test_reproduce_example_1(self):
        """Example 1 satisfies condition C."""
        code, report = self.run_cli("reproduce", "example-1", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(statuses(report), {"condition C": "condition C satisfied"})
        self.assertLessEqual(result(report, "max_residual")["value"], 1e-10)

    def test_reproduce_example_5(self):
        """Example 5 reports the sinc overlap next to its closed form."""
        code, report = self.run_cli("reproduce", "example-5", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertAlmostEqual(result(report, "inner_product_(1,0,0)")["value"], 0.589490, delta=1e-3)
        self.assertEqual(result(report, "inner_product_(1,0,0)_expected")["provenance"], "closed-form")
        self.assertEqual(report["verdicts"][0]["status"], "condition C violated")

    def test_dual(self):
        """dual writes the weight of the canonical dual, which is 1/w."""
        code, report = self.run_cli("dual", "--phi", "rect-2x1", "--L", "10", "--q", "16", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["files"], ["dual_weight.csv"])
        self.assertEqual(
            statuses(report),
            {"reciprocal probe": "finite", "biorthogonality": "holds", "dual weight identity": "holds"},
        )
        self.assertLessEqual(result(report, "dual_weight_deviation")["value"], cli.DUAL_IDENTITY_TOL)
        self.assertEqual(len(self.read("dual_weight.csv").splitlines()), 17)

    def test_kernel(self):
        """kernel writes the samples and a metadata sidecar; |lam| ||K||_HS^2 = ||phi||^2."""
        code, report = self.run_cli("kernel", *SMALL, "--phi", "gaussian", "--lam", "0.5", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["files"], ["kernel.csv", "kernel.csv.json"])
        self.assertAlmostEqual(result(report, "norm2")["value"], 0.5, delta=1e-6)
        self.assertAlmostEqual(result(report, "hs_norm2")["value"], 1.0, delta=1e-3)
        metadata = json.loads(self.read("kernel.csv.json"))
        self.assertEqual(metadata["lambda"], 0.5)
        self.assertEqual(metadata["generator"], "gaussian")
        self.assertTrue(self.read("kernel.csv").startswith(b"xi,eta,re,im\n"))

    def test_frame_verdicts(self):
        """One Gram section file per radius, with the Bessel and independence verdicts merged."""
        code, report = self.run_cli("probe", *SMALL, "--phi", "psi", "--radii", "0,1", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["files"], ["gram_r0.csv", "gram_r1.csv"])
        verdicts = statuses(report)
        self.assertEqual(verdicts["condition C"], "condition C satisfied")
        self.assertEqual(verdicts["bessel bound"], "holds")
        self.assertEqual(verdicts["lambda_max nondecreasing"], "holds")
        independence = result(report, "independence")["value"]
        self.assertEqual(len(independence["sigma_min"]), 2)
        self.assertNotIn("null_residual", independence)
        self.assertAlmostEqual(result(report, "bessel")["value"]["lam_max"][0], 2.0, delta=1e-6)

    def test_heisenberg_g(self):
        """heisenberg-g integrates G_00 to ||phi||^2."""
        code, report = self.run_cli("heisenberg-g", "--example", "1", "--lambda-samples", "8", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["files"], ["g.csv"])
        self.assertEqual(statuses(report), {"plancherel chain": "holds"})
        self.assertAlmostEqual(result(report, "integral")["value"]["re"], 2.5066283, delta=1e-2)
        self.assertEqual(len(self.read("g.csv").splitlines()), 9)

    def test_heisenberg_condition_c(self):
        """Example 4 satisfies condition C on the group; Example 6 does not."""
        code, report = self.run_cli("heisenberg-condition-c", "--example", "4", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(statuses(report), {"condition C": "condition C satisfied"})
        self.assertLessEqual(result(report, "max_residual")["value"], result(report, "max_residual")["tol"])
        self.assertIn("max_residual", report["verdicts"][0]["context"])

        code, report = self.run_cli("heisenberg-condition-c", "--example", "6", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(statuses(report), {"condition C": "condition C violated"})
        self.assertGreater(result(report, "max_residual")["value"], result(report, "max_residual")["tol"])

    def test_heisenberg_dual(self):
        """heisenberg-dual writes G_00 and the bracket of the dual, whose product is 1."""
        code, report = self.run_cli("heisenberg-dual", "--example", "1", "--radius", "2", "--out-dir", self.out)
        self.assertEqual(code, 0)
        self.assertEqual(report["files"], ["g.csv", "dual_g.csv"])
        self.assertEqual(
            statuses(report),
            {"condition C": "condition C satisfied", "biorthogonality": "holds", "dual bracket identity": "holds"},
        )
        g = lambda_rows(self.read("g.csv"))
        dual_g = lambda_rows(self.read("dual_g.csv"))
        self.assertEqual(len(g), 64)
        for (lam, re, _), (dual_lam, dual_re, _) in zip(g, dual_g):
            self.assertEqual(lam, dual_lam)
            self.assertAlmostEqual(re * dual_re, 1.0, delta=cli.DUAL_IDENTITY_TOL)

    def test_reproduce_all(self):
        """reproduce all runs the six examples: 1 to 4 satisfy condition C, 5 and 6 do not."""
        code, report = self.run_cli("reproduce", "all", "--out-dir", self.out)
        self.assertEqual(code, 0)
        verdicts = statuses(report)
        self.assertEqual(len(verdicts), 6)
        for example_id in range(1, 7):
            expected = "condition C satisfied" if example_id <= 4 else "condition C violated"
            self.assertEqual(verdicts[f"example-{example_id}.condition C"], expected)
        for example_id, (name, _, value, tol) in cli.EXAMPLE_VALUES.items():
            with self.subTest(example=example_id):
                computed = result(report, f"example-{example_id}.{name}")
                self.assertAlmostEqual(computed["value"], value, delta=tol)
                self.assertEqual(result(report, f"example-{example_id}.{name}_expected")["value"], value)



if __name__ == "__main__":
    unittest.main()
