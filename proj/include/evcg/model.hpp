#pragma once

#include <evcg/costfn.hpp>
#include <evcg/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evcg {

/// Additive tolerance on simplex membership (flow sums, weight sums).
inline constexpr double simplex_tolerance = 1e-9;

/**
 * A composite charging game.
 *
 * T time slots, each EV charges during C consecutive slots, so a strategy is
 * a start slot in [0, T-C] (zero-based here). Player 0 is the population of
 * individuals, players 1..K are the coalitions; weights sum to one.
 */
class game_spec
{
public:
	game_spec(std::size_t horizon,
	          std::size_t duration,
	          double power,
	          std::vector<double> base_load,
	          cost_family cost,
	          std::vector<double> weights)
		: horizon_(horizon)
		, duration_(duration)
		, power_(power)
		, base_load_(std::move(base_load))
		, cost_(std::move(cost))
		, weights_(std::move(weights))
	{
		if (horizon_ < 1)
			throw invalid_argument_error("game requires T >= 1");
		if (duration_ < 1 || duration_ > horizon_)
			throw invalid_argument_error("game requires 1 <= C <= T");
		if (!(power_ >= 0.0) || !std::isfinite(power_))
			throw invalid_argument_error("game requires a finite power scale P >= 0");
		if (base_load_.size() != horizon_)
			throw invalid_argument_error("non-EV load must have T entries");
		for (double l : base_load_)
		{
			if (!(l >= 0.0) || !std::isfinite(l))
				throw invalid_argument_error("non-EV load entries must be finite and >= 0");
		}
		if (weights_.empty())
			throw invalid_argument_error("game requires at least the individuals' weight");
		for (double w : weights_)
		{
			if (!(w >= 0.0) || !std::isfinite(w))
				throw invalid_argument_error("player weights must be finite and >= 0");
		}
		double const total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
		if (std::abs(total - 1.0) > simplex_tolerance)
			throw invalid_argument_error("player weights must sum to 1");

		double const peak = *std::max_element(base_load_.begin(), base_load_.end()) + power_;
		if (!cost_.domain_bound())
		{
			cost_ = cost_.with_domain_bound(peak > 0.0 ? 10.0 * peak : 1.0);
		}
		if (peak > *cost_.domain_bound())
			throw invalid_argument_error("max non-EV load + P exceeds the cost domain bound W");
	}

	std::size_t horizon() const { return horizon_; }
	std::size_t duration() const { return duration_; }
	double power() const { return power_; }
	std::span<const double> base_load() const { return base_load_; }
	cost_family const& cost() const { return cost_; }
	std::span<const double> weights() const { return weights_; }

	/// Number of start slots T - C + 1.
	std::size_t strategies() const { return horizon_ - duration_ + 1; }
	/// K + 1.
	std::size_t players() const { return weights_.size(); }
	/// K.
	std::size_t coalitions() const { return weights_.size() - 1; }
	double mass(std::size_t player) const { return weights_.at(player); }

	game_spec with_weights(std::vector<double> weights) const
	{
		return game_spec(horizon_, duration_, power_, base_load_, cost_, std::move(weights));
	}

	game_spec with_cost(cost_family cost) const
	{
		if (!cost.domain_bound())
			cost = cost.with_domain_bound(*cost_.domain_bound());
		return game_spec(horizon_, duration_, power_, base_load_, std::move(cost), weights_);
	}

private:
	std::size_t horizon_;
	std::size_t duration_;
	double power_;
	std::vector<double> base_load_;
	cost_family cost_;
	std::vector<double> weights_;
};

/// One player's charging flow: weight per start slot, summing to its mass.
class flow
{
public:
	flow(std::vector<double> values, double mass)
		: values_(std::move(values))
		, mass_(mass)
	{
		if (!(mass_ >= 0.0) || !std::isfinite(mass_))
			throw invalid_argument_error("flow mass must be finite and >= 0");
		if (values_.empty())
			throw invalid_argument_error("flow needs at least one start slot");
		double total = 0.0;
		for (double& v : values_)
		{
			if (!std::isfinite(v) || v < -simplex_tolerance)
				throw invalid_argument_error("flow entries must be finite and >= 0");
			v = std::max(v, 0.0);
			total += v;
		}
		if (std::abs(total - mass_) > simplex_tolerance)
			throw invalid_argument_error("flow entries must sum to the player's mass");
		if (mass_ == 0.0)
		{
			std::fill(values_.begin(), values_.end(), 0.0);
		}
		else if (total != mass_)
		{
			double const s = mass_ / total;
			for (double& v : values_)
				v *= s;
		}
	}

	static flow uniform(std::size_t strategies, double mass)
	{
		return flow(std::vector<double>(strategies, mass / static_cast<double>(strategies)), mass);
	}

	static flow concentrated(std::size_t strategies, std::size_t start, double mass)
	{
		std::vector<double> v(strategies, 0.0);
		v.at(start) = mass;
		return flow(std::move(v), mass);
	}

	std::span<const double> values() const { return values_; }
	double mass() const { return mass_; }
	std::size_t size() const { return values_.size(); }
	double operator[](std::size_t i) const { return values_[i]; }

private:
	std::vector<double> values_;
	double mass_;
};

/// One flow per player, individuals first.
struct profile
{
	std::vector<flow> flows;
};

/// Per-player per-slot charging loads y and their sum z.
struct load_decomposition
{
	std::vector<std::vector<double>> per_player;
	std::vector<double> aggregate;
};

/// Costs of every entity of a profile. Averages of zero-weight groups are empty.
struct cost_summary
{
	std::optional<double> individuals;
	std::vector<std::optional<double>> coalitions;
	double social = 0.0;
};

inline void check_flow(game_spec const& spec, flow const& x)
{
	if (x.size() != spec.strategies())
		throw structural_error("flow has " + std::to_string(x.size()) + " start slots, game has " +
		                       std::to_string(spec.strategies()));
}

inline void check_profile(game_spec const& spec, profile const& p)
{
	if (p.flows.size() != spec.players())
		throw structural_error("profile has " + std::to_string(p.flows.size()) + " flows, game has " +
		                       std::to_string(spec.players()) + " players");
	for (std::size_t i = 0; i < p.flows.size(); ++i)
	{
		check_flow(spec, p.flows[i]);
		if (std::abs(p.flows[i].mass() - spec.mass(i)) > simplex_tolerance)
			throw structural_error("flow " + std::to_string(i) + " mass does not match the player's weight");
	}
}

/// Uniform flows for every player.
inline profile uniform_profile(game_spec const& spec)
{
	profile p;
	for (std::size_t i = 0; i < spec.players(); ++i)
		p.flows.push_back(flow::uniform(spec.strategies(), spec.mass(i)));
	return p;
}

/// y_t = sum of x_s over the start slots s whose window [s, s+C-1] covers t.
inline std::vector<double> charging_load(game_spec const& spec, flow const& x)
{
	check_flow(spec, x);
	std::size_t const C = spec.duration();
	std::vector<double> y(spec.horizon(), 0.0);
	for (std::size_t t = 0; t < spec.horizon(); ++t)
	{
		std::size_t const first = t + 1 >= C ? t + 1 - C : 0;
		std::size_t const last = std::min(t, spec.strategies() - 1);
		for (std::size_t s = first; s <= last; ++s)
			y[t] += x[s];
	}
	return y;
}

inline load_decomposition decompose_loads(game_spec const& spec, profile const& p)
{
	check_profile(spec, p);
	load_decomposition d;
	d.aggregate.assign(spec.horizon(), 0.0);
	d.per_player.reserve(p.flows.size());
	for (auto const& x : p.flows)
	{
		d.per_player.push_back(charging_load(spec, x));
		auto const& y = d.per_player.back();
		for (std::size_t t = 0; t < y.size(); ++t)
			d.aggregate[t] += y[t];
	}
	return d;
}

/// f(L_t + P z_t) for every slot.
inline std::vector<double> slot_prices(game_spec const& spec, std::span<const double> aggregate)
{
	if (aggregate.size() != spec.horizon())
		throw structural_error("aggregate load must have T entries");
	std::vector<double> price(spec.horizon());
	for (std::size_t t = 0; t < price.size(); ++t)
		price[t] = spec.cost().eval(spec.base_load()[t] + spec.power() * aggregate[t]);
	return price;
}

/// u_s for every start slot s, given per-slot prices.
inline std::vector<double> window_sums(game_spec const& spec, std::span<const double> price)
{
	std::vector<double> u(spec.strategies(), 0.0);
	for (std::size_t s = 0; s < u.size(); ++s)
		for (std::size_t t = s; t < s + spec.duration(); ++t)
			u[s] += price[t];
	return u;
}

/// Cost u_s(x) of an EV starting at slot s (zero-based).
inline std::vector<double> strategy_costs(game_spec const& spec, profile const& p)
{
	auto const d = decompose_loads(spec, p);
	return window_sums(spec, slot_prices(spec, d.aggregate));
}

inline double strategy_cost(game_spec const& spec, profile const& p, std::size_t start)
{
	if (start >= spec.strategies())
		throw structural_error("start slot " + std::to_string(start) + " out of range");
	return strategy_costs(spec, p)[start];
}

namespace detail {

inline double flow_average(flow const& x, std::span<const double> u)
{
	double acc = 0.0;
	for (std::size_t s = 0; s < x.size(); ++s)
		acc += x[s] * u[s];
	return acc / x.mass();
}

inline double load_average(std::span<const double> y, std::span<const double> price, double mass)
{
	double acc = 0.0;
	for (std::size_t t = 0; t < y.size(); ++t)
		acc += y[t] * price[t];
	return acc / mass;
}

} // namespace detail

/// Average cost of coalition k evaluated from its load: (1/M^k) sum_t y^k_t f(L_t + P z_t).
inline double coalition_average_cost_by_load(game_spec const& spec, profile const& p, std::size_t k)
{
	if (k < 1 || k > spec.coalitions())
		throw structural_error("coalition index " + std::to_string(k) + " out of range");
	if (spec.mass(k) <= 0.0)
		throw undefined_average_error("coalition " + std::to_string(k) + " has zero weight");
	auto const d = decompose_loads(spec, p);
	return detail::load_average(d.per_player[k], slot_prices(spec, d.aggregate), spec.mass(k));
}

/// Average cost of coalition k: (1/M^k) sum_s x^k_s u_s(x).
inline double coalition_average_cost(game_spec const& spec, profile const& p, std::size_t k)
{
	if (k < 1 || k > spec.coalitions())
		throw structural_error("coalition index " + std::to_string(k) + " out of range");
	if (spec.mass(k) <= 0.0)
		throw undefined_average_error("coalition " + std::to_string(k) + " has zero weight");
	auto const d = decompose_loads(spec, p);
	auto const price = slot_prices(spec, d.aggregate);
	double const by_flow = detail::flow_average(p.flows[k], window_sums(spec, price));
#ifndef NDEBUG
	double const by_load = detail::load_average(d.per_player[k], price, spec.mass(k));
	if (std::abs(by_flow - by_load) > 1e-9 * std::max(1.0, std::abs(by_flow)))
		throw std::logic_error("flow-form and load-form coalition costs disagree");
#endif
	return by_flow;
}

inline double individuals_average_cost(game_spec const& spec, profile const& p)
{
	if (spec.mass(0) <= 0.0)
		throw undefined_average_error("individuals have zero weight");
	check_profile(spec, p);
	return detail::flow_average(p.flows[0], strategy_costs(spec, p));
}

/// sum_t z_t f(L_t + P z_t)
inline double social_cost(game_spec const& spec, profile const& p)
{
	auto const d = decompose_loads(spec, p);
	auto const price = slot_prices(spec, d.aggregate);
	double acc = 0.0;
	for (std::size_t t = 0; t < price.size(); ++t)
		acc += d.aggregate[t] * price[t];
	return acc;
}

/// Every defined cost of a profile in one pass.
inline cost_summary evaluate_costs(game_spec const& spec, profile const& p)
{
	auto const d = decompose_loads(spec, p);
	auto const price = slot_prices(spec, d.aggregate);
	auto const u = window_sums(spec, price);
	cost_summary c;
	if (spec.mass(0) > 0.0)
		c.individuals = detail::flow_average(p.flows[0], u);
	for (std::size_t k = 1; k < spec.players(); ++k)
	{
		if (spec.mass(k) > 0.0)
			c.coalitions.emplace_back(detail::flow_average(p.flows[k], u));
		else
			c.coalitions.emplace_back(std::nullopt);
	}
	for (std::size_t t = 0; t < price.size(); ++t)
		c.social += d.aggregate[t] * price[t];
	return c;
}

/// Term common to every EV in the 3-slot, 2-slot-charge game: f(L_2 + P),
/// since the middle slot always carries the whole EV weight.
inline double middle_slot_cost(game_spec const& spec)
{
	if (spec.horizon() != 3 || spec.duration() != 2)
		throw unsupported_error("reduced costs are only defined for T = 3, C = 2");
	return spec.cost().eval(spec.base_load()[1] + spec.power());
}

/// Subtracts the common middle-slot cost from every entry.
inline cost_summary reduced_costs(game_spec const& spec, cost_summary costs)
{
	double const common = middle_slot_cost(spec);
	if (costs.individuals)
		*costs.individuals -= common;
	for (auto& c : costs.coalitions)
		if (c)
			*c -= common;
	costs.social -= common;
	return costs;
}

} // namespace evcg
