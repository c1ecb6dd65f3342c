"""Black-box tests of the command-line surface: subcommands, exit codes,
report shape, and bit-stability of deterministic results."""

import json
import os
import subprocess
import sys
import tempfile
import unittest

CLI = os.environ.get("GICTMDP_CLI", "gictmdp")


def run(*args, expect=0):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    if proc.returncode != expect:
        raise AssertionError(
            f"{args}: exit {proc.returncode} (expected {expect})\n"
            f"stdout: {proc.stdout}\nstderr: {proc.stderr}"
        )
    return proc.stdout


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.model = os.path.join(cls.tmp.name, "example.json")
        with open(cls.model, "w") as f:
            f.write(run("example"))
        cls.half = os.path.join(cls.tmp.name, "half.json")
        with open(cls.half, "w") as f:
            json.dump({"0": {"a": 0.5, "b": 0.5}}, f)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_example_emits_a_valid_model(self):
        report = json.loads(run("validate", self.model))
        self.assertTrue(report["results"]["pass"])
        self.assertEqual(report["command"], "validate")
        self.assertIn("version", report)

    def test_validate_rejects_a_broken_model(self):
        broken = os.path.join(self.tmp.name, "broken.json")
        with open(broken, "w") as f:
            model = json.loads(run("example"))
            model["Q"]["0/b"] = {"0": 1.0}  # self-loop impulse
            json.dump(model, f)
        report = json.loads(run("validate", broken, expect=1))
        self.assertFalse(report["results"]["pass"])
        messages = [issue["message"] for issue in report["results"]["issues"]]
        self.assertIn("self-loop impulse", messages)

    def test_reduce_reports_both_action_kinds(self):
        report = json.loads(run("reduce", self.model))
        kinds = {a["name"]: a["kind"] for a in report["results"]["actions"]}
        self.assertEqual(kinds, {"a": "gradual", "b": "impulsive"})

    def test_bellman(self):
        report = json.loads(run("bellman", self.model))
        self.assertAlmostEqual(report["results"]["v"][0], 1.0, places=9)
        self.assertEqual(report["results"]["R"], ["0"])
        self.assertEqual(report["results"]["f_star"]["0"], "a")

    def test_lp_solve_certifies_the_example(self):
        report = json.loads(run("lp-solve", self.model))
        results = report["results"]
        self.assertAlmostEqual(results["value"], 0.5, places=9)
        self.assertAlmostEqual(results["nu"]["0/a"], 0.5, places=9)
        self.assertAlmostEqual(results["nu"]["0/b"], 0.5, places=9)
        self.assertEqual(results["check"], "PASS")
        self.assertAlmostEqual(results["strategy"]["0"]["w_imp"], 0.5, places=9)

    def test_lp_solve_infeasible_exit_code(self):
        infeasible = os.path.join(self.tmp.name, "infeasible.json")
        with open(infeasible, "w") as f:
            model = json.loads(run("example"))
            model["bounds"] = [-1.0]
            json.dump(model, f)
        report = json.loads(run("lp-solve", infeasible, expect=2))
        self.assertEqual(report["results"]["status"], "infeasible")

    def test_evaluate_policy_and_strategy(self):
        report = json.loads(run("evaluate", self.model, "--policy", self.half))
        self.assertAlmostEqual(report["results"]["W"][0], 0.5, places=9)
        self.assertAlmostEqual(report["results"]["W"][1], 1.0, places=9)

        strategy = os.path.join(self.tmp.name, "strategy.json")
        with open(strategy, "w") as f:
            json.dump({"0": {"w_imp": 0.5, "beta": {"b": 1.0}, "f_hat": {"a": 1.0}}}, f)
        report = json.loads(run("evaluate", self.model, "--strategy", strategy))
        self.assertAlmostEqual(report["results"]["W"][0], 0.5, places=9)

    def test_usage_errors(self):
        run("evaluate", self.model, expect=4)
        run("nonesuch", expect=4)

    def test_simulate_reproducible(self):
        args = ("simulate", self.model, "--policy", self.half, "--episodes", "5000", "--seed", "9")
        first = json.loads(run(*args))["results"]
        second = json.loads(run(*args))["results"]
        self.assertEqual(first["mean"], second["mean"])
        self.assertLess(abs(first["mean"][0] - 0.5), 3 * first["std_error"][0] + 1e-12)

    def test_simulate_strategy_file(self):
        strategy = os.path.join(self.tmp.name, "sim_strategy.json")
        with open(strategy, "w") as f:
            json.dump({"0": {"w_imp": 0.5, "beta": {"b": 1.0}, "f_hat": {"a": 1.0}}}, f)
        report = json.loads(
            run("simulate", self.model, "--strategy", strategy, "--episodes", "20000")
        )
        results = report["results"]
        self.assertLess(abs(results["mean"][0] - 0.5), 3 * results["std_error"][0] + 1e-12)
        self.assertLess(abs(results["mean"][1] - 1.0), 3 * results["std_error"][1] + 1e-12)

    def test_replicate_passes_on_the_example(self):
        report = json.loads(
            run("replicate", self.model, "--markov", self.half, "--episodes", "20000")
        )
        results = report["results"]
        self.assertTrue(results["laws_pass"])
        self.assertTrue(results["w_pass"])
        self.assertTrue(results["mc_pass"])
        self.assertTrue(results["pass"])
        self.assertAlmostEqual(results["W_markov"][0], 0.5, places=9)

    def test_deterministic_results_are_bit_stable(self):
        a = json.loads(run("lp-solve", self.model))
        b = json.loads(run("lp-solve", self.model))
        del a["wall_time_s"], b["wall_time_s"]
        self.assertEqual(a, b)

    def test_emitted_model_reparses(self):
        text = run("example")
        reparsed = json.loads(text)
        again = os.path.join(self.tmp.name, "again.json")
        with open(again, "w") as f:
            json.dump(reparsed, f)
        report = json.loads(run("validate", again))
        self.assertTrue(report["results"]["pass"])

    def test_truncation_flag(self):
        text = run("example", "--truncate", "6")
        self.assertEqual(len(json.loads(text)["states"]), 6)


if __name__ == "__main__":
    unittest.main()
