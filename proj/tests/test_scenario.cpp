#include <evcg/analytic3.hpp>
#include <evcg/scenario.hpp>

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace evcg;

namespace {

resolved_loads parse_csv(std::string const& text, bool normalize = false)
{
	std::istringstream in(text);
	return load_profile_csv(in, normalize);
}

} // namespace

TEST(LoadProfileCsv, Examples)
{
	auto const night = parse_csv("t,load\n1,0.9\n2,1.0\n3,0.95\n4,0.7\n5,0.5\n6,0.45\n7,0.6\n");
	EXPECT_EQ(night.values, (std::vector<double>{0.9, 1.0, 0.95, 0.7, 0.5, 0.45, 0.6}));
	EXPECT_EQ(night.normalization, "none");

	EXPECT_EQ(parse_csv("t,load\n1,2.5\n").values, (std::vector<double>{2.5}));

	auto const n = parse_csv("t,load\n1,2\n2,4\n", true);
	EXPECT_EQ(n.values, (std::vector<double>{0.5, 1.0}));
	EXPECT_EQ(n.normalization, "divided by max load 4");

	// Whitespace, CRLF and trailing blank lines are tolerated.
	EXPECT_EQ(parse_csv("t, load\r\n1, 0.5\r\n2,0.25\r\n\n").values, (std::vector<double>{0.5, 0.25}));
	// Output of write_loads_csv reads back through its non_ev column.
	EXPECT_EQ(parse_csv("t,non_ev,individuals,coalition,total\n1,0.3,0,0,0.3\n").values, (std::vector<double>{0.3}));
}

TEST(LoadProfileCsv, Errors)
{
	EXPECT_THROW(parse_csv(""), config_error);
	EXPECT_THROW(parse_csv("slot,load\n1,1\n"), config_error);
	EXPECT_THROW(parse_csv("t,value\n1,1\n"), config_error);
	EXPECT_THROW(parse_csv("t,load\n"), config_error);
	EXPECT_THROW(parse_csv("t,load\n1,1\n3,1\n"), config_error);
	EXPECT_THROW(parse_csv("t,load\n2,1\n1,1\n"), config_error);
	EXPECT_THROW(parse_csv("t,load\n1,abc\n"), config_error);
	EXPECT_THROW(parse_csv("t,load\n1,1.5x\n"), config_error);
	EXPECT_THROW(parse_csv("t,load\n1\n"), config_error);
	EXPECT_THROW(parse_csv("t,load\n1,-1\n"), config_error);
	EXPECT_THROW(parse_csv("t,load\n1,0\n2,0\n", true), config_error);
	EXPECT_THROW(load_profile_csv(std::filesystem::path("/nonexistent/profile.csv")), config_error);
}

TEST(Config, DefaultsAreExplicitAndRoundTrip)
{
	scenario_config const d;
	auto const j = to_json(d);
	for (auto const* key : {"game", "load_profile", "normalize", "solver", "sweep"})
		EXPECT_TRUE(j.contains(key)) << key;
	EXPECT_EQ(j["solver"]["max_iter"], 100000);
	EXPECT_EQ(j["solver"]["gap_tol"], 1e-6);
	EXPECT_EQ(j["solver"]["step"]["schedule"], "inverse_sqrt");
	EXPECT_EQ(to_json(parse_config(j)), j);

	auto const custom = parse_config(json::parse(R"({
		"game": {"T": 7, "C": 3, "P": 0.2, "cost": {"family": "exponential", "beta": 0.5}, "weights": [0.5, 0.5]},
		"load_profile": {"path": "night.csv"},
		"normalize": true,
		"solver": {"kind": "dynamics", "max_iter": 500, "gap_tol": 1e-7, "step": {"schedule": "constant", "scale": 0.2}},
		"sweep": {"first": 0.1, "last": 1.0, "count": 10}
	})"));
	EXPECT_EQ(custom.horizon, 7u);
	EXPECT_EQ(custom.cost.family, "exponential");
	EXPECT_EQ(custom.cost.beta, 0.5);
	EXPECT_EQ(*custom.load_path, "night.csv");
	EXPECT_TRUE(custom.normalize);
	EXPECT_EQ(custom.solver, sweep_solver::dynamics);
	EXPECT_EQ(custom.dynamics.step.shape, step_schedule::kind::constant);
	ASSERT_TRUE(custom.sweep_grid.has_value());
	EXPECT_EQ(custom.sweep_grid->size(), 10u);
	EXPECT_EQ(to_json(parse_config(to_json(custom))), to_json(custom));
}

TEST(Config, Errors)
{
	EXPECT_THROW(parse_config(json::array()), config_error);
	EXPECT_THROW(parse_config(json::parse(R"({"game": {"T": "three"}})")), config_error);
	EXPECT_THROW(parse_config(json::parse(R"({"solver": {"kind": "newton"}})")), config_error);
	EXPECT_THROW(parse_config(json::parse(R"({"solver": {"step": {"schedule": "cosine"}}})")), config_error);
	EXPECT_THROW(parse_config(json::parse(R"({"solver": {"step": {"scale": 0}}})")), config_error);
	EXPECT_THROW(parse_config(json::parse(R"({"load_profile": 3})")), config_error);
	EXPECT_THROW(build_game(parse_config(json::parse(R"({"game": {"cost": "cubic"}})"))), config_error);
	EXPECT_THROW(build_game(parse_config(json::parse(R"({"game": {"weights": [0.5, 0.6]}})"))), config_error);
	EXPECT_THROW(build_game(parse_config(json::parse(R"({"game": {"T": 3, "C": 2}, "load_profile": [1, 1]})"))),
	             config_error);
	EXPECT_THROW(read_config("/nonexistent/config.json"), config_error);
}

TEST(LoadsCsv, RoundTripIsBitExact)
{
	std::mt19937 rng(9);
	std::uniform_real_distribution<double> u(0.0, 3.0);
	for (int trial = 0; trial < 50; ++trial)
	{
		std::size_t const T = 1 + rng() % 9;
		std::vector<double> loads(T);
		for (auto& l : loads)
			l = u(rng) / 3.0 * (trial % 2 ? 1.0 : 1e-7);
		game_spec const spec(T, 1, 0.2, loads, cost_family::linear(), {1.0});
		auto const d = decompose_loads(spec, uniform_profile(spec));
		std::ostringstream out;
		write_loads_csv(out, spec, d);
		std::istringstream in(out.str());
		auto const back = load_profile_csv(in);
		ASSERT_EQ(back.values.size(), T);
		for (std::size_t t = 0; t < T; ++t)
			EXPECT_EQ(back.values[t], loads[t]);
	}
}

TEST(LoadsCsv, Columns)
{
	game_spec const spec(3, 2, 1.0, {1.5, 1, 1}, cost_family::linear(), {0.0, 1.0});
	auto const r = solve_three_slot(spec);
	std::ostringstream out;
	write_loads_csv(out, spec, r.loads);
	EXPECT_EQ(out.str(), "t,non_ev,individuals,coalition,total\n"
	                     "1,1.5,0,0.375,1.875\n"
	                     "2,1,0,1,2\n"
	                     "3,1,0,0.625,1.625\n");
}

TEST(Report, RoundTripThroughJson)
{
	scenario_config c;
	c.loads = {2.3, 1.0, 1.0};
	c.weights = {0.4, 0.6};
	auto const loads = resolve_loads(c);
	auto const spec = build_game(c, loads.values);
	auto const r = solve_three_slot(spec);
	auto const j = report_to_json(r, c, loads);
	EXPECT_EQ(j["format"], report_format);
	EXPECT_EQ(j["status"], "analytic");
	EXPECT_EQ(j["metadata"]["load_normalization"], "none");

	auto const back = parse_report(json::parse(j.dump()));
	EXPECT_EQ(back.status, solve_status::analytic);
	EXPECT_EQ(back.game.base_load()[0], 2.3);
	EXPECT_NEAR(back.equilibrium.flows[1][0], r.equilibrium.flows[1][0], 1e-12);
	EXPECT_LE(vi_gap(back.game, back.equilibrium), 1e-8);

	auto broken = j;
	broken["format"] = "other";
	EXPECT_THROW(parse_report(broken), config_error);
	broken = j;
	broken["flows"].erase(1);
	EXPECT_THROW(parse_report(broken), config_error);
	broken = j;
	broken["status"] = "guessed";
	EXPECT_THROW(parse_report(broken), config_error);
}

TEST(Formatting, TwelveDigits)
{
	EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
	EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
	EXPECT_EQ(format_number(2.9668612670898), "2.96686126709");
	EXPECT_EQ(format_exact(0.1 + 0.2), "0.30000000000000004");
	EXPECT_EQ(round12(1.0 / 3.0), 0.333333333333);
}
