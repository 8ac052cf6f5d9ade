#pragma once

#include <evcg/model.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace evcg {

/**
 * Per-player cost gradients of a profile.
 *
 * Row 0 holds the individuals' strategy costs u_s. Row k >= 1 holds the
 * gradient of coalition k's average cost with respect to its own flow,
 *
 *   (1/M^k) [ u_s + P * sum_{t=s}^{s+C-1} y^k_t f'(L_t + P z_t) ].
 *
 * Rows of zero-weight coalitions are left empty.
 */
struct cost_field
{
	load_decomposition loads;
	std::vector<double> price;
	std::vector<double> strategy_cost;
	std::vector<std::vector<double>> gradient;
};

inline cost_field evaluate_field(game_spec const& spec, profile const& p)
{
	cost_field out;
	out.loads = decompose_loads(spec, p);
	out.price = slot_prices(spec, out.loads.aggregate);
	out.strategy_cost = window_sums(spec, out.price);

	std::vector<double> marginal;
	if (spec.coalitions() > 0)
	{
		marginal.resize(spec.horizon());
		for (std::size_t t = 0; t < marginal.size(); ++t)
			marginal[t] = spec.cost().deriv(spec.base_load()[t] + spec.power() * out.loads.aggregate[t]);
	}

	out.gradient.resize(spec.players());
	out.gradient[0] = out.strategy_cost;
	for (std::size_t k = 1; k < spec.players(); ++k)
	{
		double const m = spec.mass(k);
		if (m <= 0.0)
			continue;
		auto const& y = out.loads.per_player[k];
		auto& g = out.gradient[k];
		g.resize(spec.strategies());
		for (std::size_t s = 0; s < g.size(); ++s)
		{
			double inner = 0.0;
			for (std::size_t t = s; t < s + spec.duration(); ++t)
				inner += y[t] * marginal[t];
			g[s] = (out.strategy_cost[s] + spec.power() * inner) / m;
		}
	}
	return out;
}

/// Gradient of coalition k's average cost with respect to its own flow.
inline std::vector<double> coalition_gradient(game_spec const& spec, profile const& p, std::size_t k)
{
	if (k < 1 || k > spec.coalitions())
		throw structural_error("coalition index " + std::to_string(k) + " out of range");
	if (spec.mass(k) <= 0.0)
		throw undefined_average_error("coalition " + std::to_string(k) + " has zero weight");
	if (!spec.cost().has_derivative())
		throw missing_derivative_error("coalition gradient needs the cost derivative");
	return evaluate_field(spec, p).gradient[k];
}

} // namespace evcg
