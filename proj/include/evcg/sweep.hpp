#pragma once

#include <evcg/analytic3.hpp>
#include <evcg/dynamics.hpp>
#include <evcg/model.hpp>
#include <evcg/verify.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace evcg {

enum class sweep_solver
{
	analytic,
	dynamics
};

/// One coalition size of a sweep.
struct sweep_point
{
	double coalition_size = 0.0;
	/// Coalition / individuals' weight off the cheapest base-load start slot
	/// (for the three-slot game: the weight on the peak alternative).
	double x1 = std::numeric_limits<double>::quiet_NaN();
	double x0 = std::numeric_limits<double>::quiet_NaN();
	/// Reduced costs for the three-slot game, full costs otherwise.
	double individuals = std::numeric_limits<double>::quiet_NaN();
	double coalition = std::numeric_limits<double>::quiet_NaN();
	double social = std::numeric_limits<double>::quiet_NaN();
	double norm_individuals = std::numeric_limits<double>::quiet_NaN();
	double norm_coalition = std::numeric_limits<double>::quiet_NaN();
	double norm_social = std::numeric_limits<double>::quiet_NaN();
	/// Regime name (analytic) or solver status (dynamics).
	std::string regime;
	solve_status status = solve_status::analytic;
	double vi_gap = 0.0;
	bool certified = false;
	std::optional<ce_point> analytic;
	std::optional<profile> equilibrium;
	std::optional<std::string> error;

	bool ok() const { return !error.has_value(); }
};

enum class direction
{
	nondecreasing,
	nonincreasing
};

struct monotone_verdict
{
	bool pass = true;
	/// First violating pair is (index, index + 1).
	std::optional<std::size_t> index;
	double delta = 0.0;
};

/// Adjacent differences follow `dir` within tol.
inline monotone_verdict audit_monotone(std::span<const double> values, direction dir, double tol = 1e-9)
{
	monotone_verdict v;
	for (std::size_t i = 0; i + 1 < values.size(); ++i)
	{
		double const d = values[i + 1] - values[i];
		bool const bad = dir == direction::nondecreasing ? d < -tol : d > tol;
		if (bad || std::isnan(d))
		{
			v.pass = false;
			v.index = i;
			v.delta = d;
			return v;
		}
	}
	return v;
}

struct concave_verdict
{
	bool pass = true;
	/// Centre of the first violating triple.
	std::optional<std::size_t> index;
	double second_difference = 0.0;
};

/// Second differences on a uniform grid are at most tol.
inline concave_verdict audit_concave(std::span<const double> values, double tol = 1e-9)
{
	concave_verdict v;
	for (std::size_t i = 1; i + 1 < values.size(); ++i)
	{
		double const d2 = values[i + 1] - 2.0 * values[i] + values[i - 1];
		if (d2 > tol || std::isnan(d2))
		{
			v.pass = false;
			v.index = i;
			v.second_difference = d2;
			return v;
		}
	}
	return v;
}

struct audit_entry
{
	std::string name;
	bool pass = true;
	/// Reported but not part of the verdict.
	bool informational = false;
	std::string detail;
};

struct sweep_result
{
	std::vector<double> grid;
	std::vector<sweep_point> points;
	std::vector<audit_entry> audits;
	/// Social cost at the smallest grid size; normalized costs divide by it.
	double normalizer = std::numeric_limits<double>::quiet_NaN();

	bool all_pass() const
	{
		return std::all_of(audits.begin(), audits.end(), [](audit_entry const& a) { return a.informational || a.pass; });
	}

	audit_entry const* audit(std::string const& name) const
	{
		for (auto const& a : audits)
			if (a.name == name)
				return &a;
		return nullptr;
	}
};

/// Uniform grid of `count` points on [first, last].
inline std::vector<double> uniform_grid(double first, double last, std::size_t count)
{
	if (count == 0)
		return {};
	if (count == 1)
		return {first};
	std::vector<double> g(count);
	double const h = (last - first) / static_cast<double>(count - 1);
	for (std::size_t i = 0; i < count; ++i)
		g[i] = first + h * static_cast<double>(i);
	g.back() = last;
	return g;
}

/// 101 points on [0.01, 1].
inline std::vector<double> default_grid()
{
	return uniform_grid(0.01, 1.0, 101);
}

/// Start slot with the smallest non-EV load over its window (latest on ties).
inline std::size_t cheapest_base_strategy(game_spec const& spec)
{
	auto const l = spec.base_load();
	std::size_t best = 0;
	double best_sum = std::numeric_limits<double>::infinity();
	for (std::size_t s = 0; s < spec.strategies(); ++s)
	{
		double sum = 0.0;
		for (std::size_t t = s; t < s + spec.duration(); ++t)
			sum += l[t];
		if (sum <= best_sum)
		{
			best_sum = sum;
			best = s;
		}
	}
	return best;
}

namespace detail {

inline void check_grid(std::span<const double> grid)
{
	if (grid.empty())
		throw invalid_argument_error("sweep grid is empty");
	for (std::size_t i = 0; i < grid.size(); ++i)
	{
		if (!(grid[i] >= 0.0 && grid[i] <= 1.0))
			throw invalid_argument_error("sweep grid values must lie in [0, 1]");
		if (i > 0 && !(grid[i] > grid[i - 1]))
			throw invalid_argument_error("sweep grid must be strictly increasing");
	}
}

inline bool is_uniform(std::span<const double> grid)
{
	if (grid.size() < 3)
		return true;
	double const h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
	for (std::size_t i = 1; i < grid.size(); ++i)
		if (std::abs(grid[i] - grid[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
			return false;
	return true;
}

/// Runs fn(i) for every index on `jobs` threads.
inline void parallel_for(std::size_t count, std::size_t jobs, std::function<void(std::size_t)> const& fn)
{
	jobs = std::max<std::size_t>(1, std::min(jobs, count));
	if (jobs == 1)
	{
		for (std::size_t i = 0; i < count; ++i)
			fn(i);
		return;
	}
	std::atomic<std::size_t> next{0};
	std::vector<std::thread> pool;
	for (std::size_t j = 0; j < jobs; ++j)
	{
		pool.emplace_back([&] {
			for (std::size_t i = next++; i < count; i = next++)
				fn(i);
		});
	}
	for (auto& t : pool)
		t.join();
}

/// Costs of a general solution; zero-weight groups get min_s u_s, the
/// cost of a negligible deviator.
inline void fill_general_point(sweep_point& pt, game_spec const& spec, equilibrium_report const& r)
{
	auto const u = strategy_costs(spec, r.equilibrium);
	double const cheapest = *std::min_element(u.begin(), u.end());
	double const common = (spec.horizon() == 3 && spec.duration() == 2) ? middle_slot_cost(spec) : 0.0;
	pt.individuals = r.costs.individuals.value_or(cheapest) - common;
	pt.coalition = r.costs.coalitions.at(0).value_or(cheapest) - common;
	pt.social = r.costs.social - common;

	std::size_t const ref = cheapest_base_strategy(spec);
	pt.x0 = spec.mass(0) - r.equilibrium.flows[0][ref];
	pt.x1 = spec.mass(1) - r.equilibrium.flows[1][ref];
	pt.status = r.status;
	pt.vi_gap = r.vi_gap;
	pt.certified = r.certified();
	pt.regime = to_string(r.status);
	pt.equilibrium = r.equilibrium;
}

inline void add_monotone(sweep_result& res,
                         std::string name,
                         std::vector<double> const& values,
                         std::vector<std::size_t> const& index,
                         direction dir,
                         double tol)
{
	audit_entry a;
	a.name = std::move(name);
	auto const v = audit_monotone(values, dir, tol);
	a.pass = v.pass;
	if (!v.pass)
	{
		std::ostringstream os;
		os.precision(12);
		os << "M=" << res.grid[index[*v.index]] << " -> M=" << res.grid[index[*v.index + 1]] << ", delta " << v.delta;
		a.detail = os.str();
	}
	res.audits.push_back(std::move(a));
}

inline void run_audits(sweep_result& res, bool per_branch_concavity, double tol)
{
	std::vector<std::size_t> ok;
	for (std::size_t i = 0; i < res.points.size(); ++i)
		if (res.points[i].ok())
			ok.push_back(i);

	audit_entry solved{"all points solved", ok.size() == res.points.size(), false, {}};
	if (!solved.pass)
		solved.detail = std::to_string(res.points.size() - ok.size()) + " point(s) failed";
	res.audits.push_back(solved);

	auto column = [&](auto member) {
		std::vector<double> v;
		for (auto i : ok)
			v.push_back(res.points[i].*member);
		return v;
	};
	add_monotone(res, "x1 nondecreasing", column(&sweep_point::x1), ok, direction::nondecreasing, tol);
	add_monotone(res, "x0 nonincreasing", column(&sweep_point::x0), ok, direction::nonincreasing, tol);
	add_monotone(res, "individuals cost nonincreasing", column(&sweep_point::individuals), ok,
	             direction::nonincreasing, tol);
	add_monotone(res, "coalition cost nonincreasing", column(&sweep_point::coalition), ok, direction::nonincreasing,
	             tol);
	add_monotone(res, "social cost nonincreasing", column(&sweep_point::social), ok, direction::nonincreasing, tol);

	audit_entry order{"cost ordering", true, false, {}};
	for (auto i : ok)
	{
		auto const& p = res.points[i];
		if (!p.certified)
			continue;
		if (p.individuals > p.social + tol || p.social > p.coalition + tol)
		{
			order.pass = false;
			std::ostringstream os;
			os.precision(12);
			os << "M=" << p.coalition_size << ": " << p.individuals << ", " << p.social << ", " << p.coalition;
			order.detail = os.str();
			break;
		}
	}
	res.audits.push_back(order);

	audit_entry cert{"all points certified", true, false, {}};
	for (auto i : ok)
	{
		if (!res.points[i].certified)
		{
			cert.pass = false;
			std::ostringstream os;
			os.precision(12);
			os << "M=" << res.points[i].coalition_size << " gap " << res.points[i].vi_gap;
			cert.detail = os.str();
			break;
		}
	}
	res.audits.push_back(cert);

	bool const uniform = is_uniform(res.grid) && ok.size() == res.points.size();
	audit_entry global{"x1 concave (global)", true, true, {}};
	if (uniform)
	{
		auto const v = audit_concave(column(&sweep_point::x1), tol);
		global.pass = v.pass;
		if (!v.pass)
		{
			std::ostringstream os;
			os.precision(12);
			os << "M=" << res.grid[*v.index] << ", second difference " << v.second_difference;
			global.detail = os.str();
		}
	}
	else
	{
		global.detail = "skipped: grid is not uniform or has failed points";
	}
	res.audits.push_back(global);

	if (!per_branch_concavity)
		return;
	audit_entry branch{"x1 concave per regime branch", true, false, {}};
	if (!uniform)
	{
		branch.informational = true;
		branch.detail = "skipped: grid is not uniform or has failed points";
	}
	else
	{
		std::size_t start = 0;
		while (start < res.points.size() && branch.pass)
		{
			std::size_t end = start + 1;
			while (end < res.points.size() && res.points[end].regime == res.points[start].regime)
				++end;
			std::vector<double> v;
			for (std::size_t i = start; i < end; ++i)
				v.push_back(res.points[i].x1);
			auto const c = audit_concave(v, tol);
			if (!c.pass)
			{
				branch.pass = false;
				std::ostringstream os;
				os.precision(12);
				os << "M=" << res.grid[start + *c.index] << " (" << res.points[start].regime << "), second difference "
				   << c.second_difference;
				branch.detail = os.str();
			}
			start = end;
		}
	}
	res.audits.push_back(branch);
}

inline void normalize(sweep_result& res)
{
	for (auto const& p : res.points)
	{
		if (p.ok())
		{
			res.normalizer = p.social;
			break;
		}
	}
	for (auto& p : res.points)
	{
		if (!p.ok())
			continue;
		p.norm_individuals = p.individuals / res.normalizer;
		p.norm_coalition = p.coalition / res.normalizer;
		p.norm_social = p.social / res.normalizer;
	}
}

} // namespace detail

/**
 * Solves the three-slot game for every coalition size of `grid` and audits
 * the comparative statics. Point failures are recorded, not thrown.
 */
inline sweep_result run_sweep(three_slot_instance const& base,
                              std::vector<double> grid,
                              sweep_solver solver = sweep_solver::analytic,
                              dynamics_options const& opts = {},
                              std::size_t jobs = 1,
                              double tol = 1e-9)
{
	detail::check_grid(grid);
	sweep_result res;
	res.grid = std::move(grid);
	res.points.resize(res.grid.size());

	detail::parallel_for(res.grid.size(), jobs, [&](std::size_t i) {
		auto& pt = res.points[i];
		pt.coalition_size = res.grid[i];
		try
		{
			auto const inst = base.with_size(pt.coalition_size);
			if (solver == sweep_solver::analytic)
			{
				auto const ce = solve_ce(inst);
				auto const c = ce_costs(inst, ce);
				pt.analytic = ce;
				pt.x1 = ce.x1;
				pt.x0 = ce.x0;
				pt.individuals = c.individuals;
				pt.coalition = c.coalition;
				pt.social = c.social;
				pt.regime = to_string(ce.tag);
				pt.status = solve_status::analytic;
				pt.certified = true;
				pt.vi_gap = vi_gap(to_game_spec(inst), to_profile(inst, ce));
			}
			else
			{
				auto const spec = to_game_spec(inst);
				auto const r = solve_dynamics(spec, opts);
				detail::fill_general_point(pt, spec, r);
			}
		}
		catch (std::exception const& e)
		{
			pt.error = e.what();
		}
	});

	detail::normalize(res);
	detail::run_audits(res, solver == sweep_solver::analytic, tol);
	return res;
}

/// Sweep of a general game with one coalition, solved by the learning dynamics.
/// The weights of `base` are replaced by (1 - M, M).
inline sweep_result run_sweep(game_spec const& base,
                              std::vector<double> grid,
                              dynamics_options const& opts = {},
                              std::size_t jobs = 1,
                              double tol = 1e-9)
{
	if (base.coalitions() != 1)
		throw unsupported_error("sweeps need a game with exactly one coalition");
	detail::check_grid(grid);
	sweep_result res;
	res.grid = std::move(grid);
	res.points.resize(res.grid.size());

	detail::parallel_for(res.grid.size(), jobs, [&](std::size_t i) {
		auto& pt = res.points[i];
		pt.coalition_size = res.grid[i];
		try
		{
			auto const spec = base.with_weights({1.0 - pt.coalition_size, pt.coalition_size});
			auto const r = solve_dynamics(spec, opts);
			detail::fill_general_point(pt, spec, r);
		}
		catch (std::exception const& e)
		{
			pt.error = e.what();
		}
	});

	detail::normalize(res);
	detail::run_audits(res, false, tol);
	return res;
}

/// Full coalition beats pure individual play socially, yet a member gains by leaving.
inline bool social_dilemma(sweep_result const& res)
{
	if (res.points.empty() || !res.points.front().ok() || !res.points.back().ok())
		return false;
	auto const& first = res.points.front();
	auto const& last = res.points.back();
	return last.social < first.social && last.individuals < last.coalition;
}

} // namespace evcg
