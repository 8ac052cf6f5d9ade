#pragma once

#include <evcg/gradient.hpp>
#include <evcg/model.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace evcg {

enum class solve_status
{
	converged,
	max_iter_reached,
	analytic
};

inline char const* to_string(solve_status s)
{
	switch (s)
	{
	case solve_status::converged:
		return "converged";
	case solve_status::max_iter_reached:
		return "max_iter_reached";
	case solve_status::analytic:
		return "analytic";
	}
	return "unknown";
}

inline std::optional<solve_status> parse_status(std::string const& s)
{
	if (s == "converged")
		return solve_status::converged;
	if (s == "max_iter_reached")
		return solve_status::max_iter_reached;
	if (s == "analytic")
		return solve_status::analytic;
	return std::nullopt;
}

struct trace_row
{
	std::size_t iteration = 0;
	double gap = 0.0;
	std::vector<std::vector<double>> flows;
};

struct equilibrium_report
{
	profile equilibrium;
	load_decomposition loads;
	cost_summary costs;
	/// Costs minus the common middle-slot term, only for T = 3, C = 2.
	std::optional<cost_summary> reduced;
	double vi_gap = 0.0;
	/// Smallest eps for which the individuals' Wardrop check passes.
	double wardrop_eps = 0.0;
	double gap_tolerance = 0.0;
	solve_status status = solve_status::analytic;
	std::size_t iterations = 0;
	/// Some player puts (almost) no weight on a strategy: the limit may sit on
	/// the boundary of the strategy space and deserves inspection.
	bool boundary = false;
	std::vector<trace_row> trace;

	bool certified() const
	{
		return status != solve_status::max_iter_reached && vi_gap <= gap_tolerance;
	}
};

namespace detail {

inline double player_gap(game_spec const& spec, profile const& p, cost_field const& field, std::size_t i)
{
	double const m = spec.mass(i);
	if (m <= 0.0)
		return 0.0;
	auto const& g = field.gradient[i];
	double inner = 0.0;
	for (std::size_t s = 0; s < g.size(); ++s)
		inner += p.flows[i][s] * g[s];
	double const lo = *std::min_element(g.begin(), g.end());
	return std::max(0.0, inner - m * lo);
}

} // namespace detail

/**
 * Gap of the variational inequality characterizing composite equilibria:
 *
 *   sum_i ( <U^i(x), x^i> - M_i min_s U^i_s(x) ),
 *
 * i.e. how much the linearized costs drop when every player moves to its best
 * vertex. It is nonnegative and zero exactly at a solution of the inequality.
 */
inline double vi_gap(game_spec const& spec, profile const& p)
{
	auto const field = evaluate_field(spec, p);
	double gap = 0.0;
	for (std::size_t i = 0; i < spec.players(); ++i)
		gap += detail::player_gap(spec, p, field, i);
	return gap;
}

struct wardrop_witness
{
	std::size_t start = 0;
	double cost = 0.0;
	double min_cost = 0.0;
};

struct wardrop_verdict
{
	bool pass = true;
	std::optional<wardrop_witness> witness;
};

inline constexpr double default_support_tolerance = 1e-6;

/// Every start slot the individuals use costs at most min_s u_s + eps.
/// A slot is "used" when it carries more than support_tol of their mass.
inline wardrop_verdict check_wardrop(game_spec const& spec,
                                     profile const& p,
                                     double eps,
                                     double support_tol = default_support_tolerance)
{
	check_profile(spec, p);
	wardrop_verdict v;
	double const m = spec.mass(0);
	if (m <= 0.0)
		return v;
	auto const u = strategy_costs(spec, p);
	double const lo = *std::min_element(u.begin(), u.end());
	for (std::size_t s = 0; s < u.size(); ++s)
	{
		if (p.flows[0][s] > support_tol * m && u[s] > lo + eps)
		{
			v.pass = false;
			v.witness = wardrop_witness{s, u[s], lo};
			return v;
		}
	}
	return v;
}

/// Smallest eps at which check_wardrop passes.
inline double wardrop_residual(game_spec const& spec,
                               profile const& p,
                               double support_tol = default_support_tolerance)
{
	double const m = spec.mass(0);
	if (m <= 0.0)
		return 0.0;
	auto const u = strategy_costs(spec, p);
	double const lo = *std::min_element(u.begin(), u.end());
	double worst = 0.0;
	for (std::size_t s = 0; s < u.size(); ++s)
		if (p.flows[0][s] > support_tol * m)
			worst = std::max(worst, u[s] - lo);
	return worst;
}

struct optimality_verdict
{
	bool pass = true;
	double gap = 0.0;
};

/// First-order optimality of coalition k: its own gap term is at most eps.
inline optimality_verdict check_coalition_optimality(game_spec const& spec, profile const& p, std::size_t k, double eps)
{
	if (k < 1 || k > spec.coalitions())
		throw structural_error("coalition index " + std::to_string(k) + " out of range");
	auto const field = evaluate_field(spec, p);
	optimality_verdict v;
	v.gap = detail::player_gap(spec, p, field, k);
	v.pass = v.gap <= eps;
	return v;
}

struct ordering_verdict
{
	bool applicable = false;
	bool pass = true;
	std::string detail;
};

/// individuals <= social <= every coalition, at certified equilibria only.
/// Uses the reduced costs when the report has them.
inline ordering_verdict check_cost_ordering(equilibrium_report const& r, double tol = 1e-9)
{
	ordering_verdict v;
	if (!r.certified())
	{
		v.detail = "report is not a certified equilibrium";
		return v;
	}
	v.applicable = true;
	cost_summary const& c = r.reduced ? *r.reduced : r.costs;
	std::ostringstream os;
	os.precision(12);
	if (c.individuals && *c.individuals > c.social + tol)
	{
		v.pass = false;
		os << "individuals " << *c.individuals << " > social " << c.social << "; ";
	}
	for (std::size_t k = 0; k < c.coalitions.size(); ++k)
	{
		if (c.coalitions[k] && c.social > *c.coalitions[k] + tol)
		{
			v.pass = false;
			os << "social " << c.social << " > coalition " << k + 1 << " " << *c.coalitions[k] << "; ";
		}
	}
	v.detail = os.str();
	return v;
}

/// Builds a report for `p`, filling loads, costs, gap and diagnostics.
inline equilibrium_report make_report(game_spec const& spec,
                                      profile p,
                                      solve_status status,
                                      std::size_t iterations,
                                      double gap_tolerance)
{
	equilibrium_report r;
	r.loads = decompose_loads(spec, p);
	r.costs = evaluate_costs(spec, p);
	if (spec.horizon() == 3 && spec.duration() == 2)
		r.reduced = reduced_costs(spec, r.costs);
	r.vi_gap = vi_gap(spec, p);
	r.wardrop_eps = wardrop_residual(spec, p);
	r.gap_tolerance = gap_tolerance;
	r.status = status;
	r.iterations = iterations;
	for (std::size_t i = 0; i < p.flows.size(); ++i)
	{
		double const m = p.flows[i].mass();
		if (m <= 0.0)
			continue;
		for (double v : p.flows[i].values())
			if (v <= default_support_tolerance * m)
				r.boundary = true;
	}
	r.equilibrium = std::move(p);
	return r;
}

} // namespace evcg
