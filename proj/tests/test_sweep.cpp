#include <evcg/sweep.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace evcg;

namespace {

three_slot_instance steep_peak(cost_family f = cost_family::linear())
{
	return three_slot_instance(2.3, 1.0, 1.0, 1.0, std::move(f));
}

three_slot_instance mild_peak(cost_family f = cost_family::linear())
{
	return three_slot_instance(1.5, 1.0, 1.0, 1.0, std::move(f));
}

void expect_audits_pass(sweep_result const& r, std::string const& label)
{
	for (auto const& a : r.audits)
	{
		if (!a.informational)
		{
			EXPECT_TRUE(a.pass) << label << ": " << a.name << " " << a.detail;
		}
	}
}

} // namespace

TEST(AuditMonotone, Examples)
{
	std::vector<double> const up{0.0, 0.0, 0.1, 0.3};
	EXPECT_TRUE(audit_monotone(up, direction::nondecreasing).pass);
	auto const v = audit_monotone(up, direction::nonincreasing);
	EXPECT_FALSE(v.pass);
	EXPECT_EQ(*v.index, 1u);
	EXPECT_DOUBLE_EQ(v.delta, 0.1);

	std::vector<double> const flat(5, 2.0);
	EXPECT_TRUE(audit_monotone(flat, direction::nondecreasing).pass);
	EXPECT_TRUE(audit_monotone(flat, direction::nonincreasing).pass);

	std::vector<double> const jitter{1.0, 1.0 - 5e-10, 1.0};
	EXPECT_TRUE(audit_monotone(jitter, direction::nondecreasing).pass);
	EXPECT_FALSE(audit_monotone(jitter, direction::nondecreasing, 1e-10).pass);

	std::vector<double> const gap{0.0, std::nan(""), 1.0};
	EXPECT_FALSE(audit_monotone(gap, direction::nondecreasing).pass);
}

TEST(AuditConcave, Examples)
{
	std::vector<double> line;
	for (int i = 0; i < 10; ++i)
		line.push_back(0.5 - 0.25 * i);
	EXPECT_TRUE(audit_concave(line).pass);

	std::vector<double> const kink{0.0, 0.0, 0.0, 0.1, 0.2};
	auto const v = audit_concave(kink);
	EXPECT_FALSE(v.pass);
	EXPECT_EQ(*v.index, 2u);

	std::vector<double> sqrt_values;
	for (int i = 1; i < 50; ++i)
		sqrt_values.push_back(std::sqrt(i / 50.0));
	EXPECT_TRUE(audit_concave(sqrt_values).pass);
}

TEST(Grid, DefaultAndUniform)
{
	auto const g = default_grid();
	ASSERT_EQ(g.size(), 101u);
	EXPECT_DOUBLE_EQ(g.front(), 0.01);
	EXPECT_EQ(g.back(), 1.0);
	EXPECT_NEAR(g[1] - g[0], 0.0099, 1e-15);

	EXPECT_THROW(run_sweep(steep_peak(), {0.5, 0.4}), invalid_argument_error);
	EXPECT_THROW(run_sweep(steep_peak(), {0.5, 1.2}), invalid_argument_error);
	EXPECT_THROW(run_sweep(steep_peak(), {-0.1, 0.5}), invalid_argument_error);
}

TEST(RunSweep, SteepPeakClosedForm)
{
	auto const r = run_sweep(steep_peak(), uniform_grid(0.1, 1.0, 10));
	ASSERT_EQ(r.points.size(), 10u);
	for (auto const& p : r.points)
		EXPECT_NEAR(p.x1, std::max(0.0, (p.coalition_size - 0.3) / 4.0), 1e-9) << p.coalition_size;
	expect_audits_pass(r, "steep peak");
	// x1 is convex at the kink, so the global concavity check fails but is informational.
	auto const global = r.audit("x1 concave (global)");
	ASSERT_NE(global, nullptr);
	EXPECT_TRUE(global->informational);
	EXPECT_FALSE(global->pass);
	EXPECT_TRUE(r.all_pass());
}

TEST(RunSweep, MildPeakIndividualsDecreaseLinearly)
{
	auto const r = run_sweep(mild_peak(), uniform_grid(0.01, 1.0, 100));
	for (auto const& p : r.points)
	{
		double const m = p.coalition_size;
		if (m < 0.5)
			EXPECT_NEAR(p.x0, 0.25 - m / 2.0, 1e-12) << m;
		else
			EXPECT_EQ(p.x0, 0.0) << m;
		EXPECT_NEAR(p.x1, m < 0.5 ? m / 2.0 : (m + 0.5) / 4.0, 1e-9) << m;
	}
	expect_audits_pass(r, "mild peak");
}

TEST(RunSweep, QuadraticCostRatios)
{
	auto const r = run_sweep(mild_peak(cost_family::quadratic()), default_grid());
	expect_audits_pass(r, "mild peak quadratic");
	auto const& last = r.points.back();
	EXPECT_NEAR(last.norm_coalition, 0.97, 0.01);
	EXPECT_NEAR(last.norm_social, 0.97, 0.01);
	EXPECT_NEAR(last.norm_individuals, 0.88, 0.01);
	EXPECT_DOUBLE_EQ(r.normalizer, r.points.front().social);
	// At the smallest grid size the individuals share the peak.
	EXPECT_DOUBLE_EQ(r.normalizer, 3.0625);
	EXPECT_TRUE(social_dilemma(r));
}

TEST(RunSweep, VanishingCoalitionAtGridStart)
{
	auto const r = run_sweep(mild_peak(), {0.0, 0.5, 1.0});
	ASSERT_TRUE(r.points[0].ok());
	EXPECT_NEAR(r.points[0].x0, 0.25, 1e-15);
	EXPECT_EQ(r.points[0].x1, 0.0);
}

TEST(RunSweep, MonotoneOnRandomInstances)
{
	std::mt19937 rng(6);
	std::uniform_real_distribution<double> ul(0.0, 3.0);
	for (auto const& f : {cost_family::linear(), cost_family::quadratic(), cost_family::exponential(1.0)})
	{
		for (int trial = 0; trial < 10; ++trial)
		{
			double a = ul(rng), b = ul(rng);
			if (a < b)
				std::swap(a, b);
			three_slot_instance const inst(a, ul(rng), b, 1.0, f);
			auto const r = run_sweep(inst, default_grid(), sweep_solver::analytic, {}, 2);
			expect_audits_pass(r, f.name());
		}
	}
}

TEST(RunSweep, ConcavePerBranchOnMildPeak)
{
	for (auto const& f : {cost_family::linear(), cost_family::quadratic(), cost_family::exponential(1.0)})
	{
		auto const r = run_sweep(mild_peak(f), default_grid());
		auto const a = r.audit("x1 concave per regime branch");
		ASSERT_NE(a, nullptr);
		EXPECT_TRUE(a->pass) << f.name() << ": " << a->detail;
	}
}

TEST(RunSweep, DynamicsAgreesWithAnalytic)
{
	auto const grid = uniform_grid(0.1, 1.0, 10);
	for (auto const& base : {steep_peak(), mild_peak()})
	{
		auto const an = run_sweep(base, grid);
		auto const dy = run_sweep(base, grid, sweep_solver::dynamics, {}, 4);
		for (std::size_t i = 0; i < grid.size(); ++i)
		{
			ASSERT_TRUE(dy.points[i].ok()) << *dy.points[i].error;
			EXPECT_NEAR(dy.points[i].x1, an.points[i].x1, 1e-3) << grid[i];
			EXPECT_TRUE(dy.points[i].certified);
		}
	}
}

TEST(RunSweep, ParallelMatchesSerial)
{
	auto const grid = uniform_grid(0.05, 1.0, 20);
	auto const a = run_sweep(mild_peak(cost_family::exponential(1.0)), grid, sweep_solver::analytic, {}, 1);
	auto const b = run_sweep(mild_peak(cost_family::exponential(1.0)), grid, sweep_solver::analytic, {}, 8);
	for (std::size_t i = 0; i < grid.size(); ++i)
	{
		EXPECT_EQ(a.points[i].x1, b.points[i].x1);
		EXPECT_EQ(a.points[i].social, b.points[i].social);
	}
}

TEST(RunSweep, GeneralGameNight)
{
	game_spec const night(7, 3, 0.2, {0.9, 1.0, 0.95, 0.7, 0.5, 0.45, 0.6}, cost_family::linear(), {0.5, 0.5});
	EXPECT_EQ(cheapest_base_strategy(night), 4u);
	auto const r = run_sweep(night, uniform_grid(0.1, 1.0, 10), {}, 4);
	for (auto const& p : r.points)
		ASSERT_TRUE(p.ok()) << *p.error;
	for (auto const* name : {"x1 nondecreasing", "x0 nonincreasing", "individuals cost nonincreasing",
	                         "coalition cost nonincreasing", "social cost nonincreasing", "cost ordering"})
	{
		auto const a = r.audit(name);
		ASSERT_NE(a, nullptr) << name;
		EXPECT_TRUE(a->pass) << name << ": " << a->detail;
	}
	EXPECT_EQ(r.audit("x1 concave per regime branch"), nullptr);
	EXPECT_THROW(run_sweep(night.with_weights({0.5, 0.25, 0.25}), {0.5}), unsupported_error);
}

TEST(RunSweep, PointFailuresAreRecorded)
{
	cost::custom c;
	c.value = [](double x) { return x * x + x; };
	auto const r = run_sweep(mild_peak(cost_family::custom(c, 30.0)), {0.2, 0.4});
	ASSERT_EQ(r.points.size(), 2u);
	EXPECT_FALSE(r.points[0].ok());
	EXPECT_FALSE(r.audit("all points solved")->pass);
	EXPECT_FALSE(r.all_pass());
}
