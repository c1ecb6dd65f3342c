"""End-to-end smoke tests of the python module against the worked example."""

import math
import unittest

import gictmdp


class ExampleModelTest(unittest.TestCase):
    def setUp(self):
        self.model = gictmdp.builtin_model("paper-example")
        self.reduced = gictmdp.reduce_model(self.model)

    def test_builtin_validates(self):
        self.assertTrue(gictmdp.validate_gi_model(self.model).pass_())
        self.assertEqual(self.model.states, ["0", "1", "2", "3"])
        self.assertEqual(self.model.bounds, [1.0])

    def test_model_json_round_trip(self):
        text = self.model.to_json()
        again = gictmdp.parse_model(text)
        self.assertEqual(again.to_json(), text)

    def test_reduction_tags_actions(self):
        self.assertEqual(self.reduced.actions, [("a", "gradual"), ("b", "impulsive")])
        self.assertEqual(self.reduced.rate(0, 1), 1.0)

    def test_policy_evaluation_matches_example_table(self):
        half = gictmdp.StationaryPolicy(
            [[0.5, 0.5], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
        )
        result = gictmdp.evaluate_policy(self.reduced, half, 0)
        self.assertAlmostEqual(result.W[0], 0.5, places=10)
        self.assertAlmostEqual(result.W[1], 1.0, places=10)

    def test_lift_replicates_the_policy(self):
        half = gictmdp.StationaryPolicy(
            [[0.5, 0.5], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
        )
        strategy = gictmdp.lift_stationary_policy(half, self.model)
        self.assertAlmostEqual(strategy.w_imp[0], 0.5, places=12)
        result = gictmdp.evaluate_strategy(self.model, strategy, 0)
        self.assertAlmostEqual(result.W[0], 0.5, places=10)
        self.assertAlmostEqual(result.W[1], 1.0, places=10)

    def test_constrained_pipeline(self):
        sol = gictmdp.solve_constrained_problem(self.model)
        self.assertFalse(sol.trivial)
        self.assertEqual(sol.lp.status, "optimal")
        self.assertAlmostEqual(sol.value, 0.5, places=9)
        self.assertAlmostEqual(sol.strategy.w_imp[0], 0.5, places=9)
        self.assertTrue(sol.check_pass)

    def test_vstar(self):
        res = gictmdp.compute_vstar(self.reduced)
        self.assertAlmostEqual(res.v[0], 1.0, places=9)
        self.assertEqual(res.R(), [0])
        self.assertEqual(res.f_star[0], 0)

    def test_poisson_chain_replication(self):
        half = gictmdp.StationaryPolicy(
            [[0.5, 0.5], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
        )
        pp = gictmdp.build_pseudo_policy(self.reduced, half, 1.0)
        ps = gictmdp.build_poisson_strategy(self.model, pp)
        result = gictmdp.evaluate_poisson_strategy(self.model, ps, 0)
        self.assertTrue(abs(result.W[0] - 0.5) < 1e-8 + result.max_trunc_error)
        self.assertTrue(abs(result.W[1] - 1.0) < 1e-8 + result.max_trunc_error)

    def test_simulation_is_reproducible_and_consistent(self):
        half = gictmdp.StationaryPolicy(
            [[0.5, 0.5], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
        )
        strategy = gictmdp.lift_stationary_policy(half, self.model)
        cfg = gictmdp.SimConfig()
        cfg.episodes = 20000
        cfg.seed = 42
        first = gictmdp.simulate_strategy(self.model, strategy, 0, cfg)
        second = gictmdp.simulate_strategy(self.model, strategy, 0, cfg)
        self.assertEqual(first.mean, second.mean)
        self.assertLess(abs(first.mean[0] - 0.5), 3 * first.std_error[0])
        self.assertLess(abs(first.mean[1] - 1.0), 3 * first.std_error[1])

    def test_validation_error_maps_to_value_error(self):
        with self.assertRaises(ValueError):
            gictmdp.parse_model("{")
        with self.assertRaises(KeyError):
            gictmdp.builtin_model("nonesuch")

    def test_jump_law_surface(self):
        strategy = gictmdp.lift_stationary_policy(
            gictmdp.StationaryPolicy([[0.5, 0.5], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]),
            self.model,
        )
        law = gictmdp.strategy_jump_law(self.model, strategy, 0)
        self.assertAlmostEqual(law.next[1], 1.0, places=10)
        self.assertAlmostEqual(law.sojourn_cost[0], 0.5, places=10)
        self.assertAlmostEqual(law.sojourn_cost[1], 1.0, places=10)
        absorbed = gictmdp.strategy_jump_law(self.model, strategy, 1)
        self.assertEqual(absorbed.absorb, 1.0)
        self.assertTrue(math.isinf(absorbed.mean_sojourn))


if __name__ == "__main__":
    unittest.main()
