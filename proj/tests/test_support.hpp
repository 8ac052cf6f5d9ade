#pragma once

#include <evcg/model.hpp>

#include <cmath>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace evcg::fixtures {

/// Random point of the scaled simplex of the given mass, with occasional zeros.
inline flow random_flow(std::size_t strategies, double mass, std::mt19937& rng)
{
	std::uniform_real_distribution<double> u(0.0, 1.0);
	std::vector<double> w(strategies);
	double total = 0.0;
	for (auto& v : w)
	{
		v = u(rng) < 0.15 ? 0.0 : -std::log(1.0 - u(rng));
		total += v;
	}
	if (total == 0.0)
	{
		w[0] = 1.0;
		total = 1.0;
	}
	for (auto& v : w)
		v = mass * v / total;
	return flow(std::move(w), mass);
}

inline profile random_profile(game_spec const& spec, std::mt19937& rng)
{
	profile p;
	for (std::size_t i = 0; i < spec.players(); ++i)
		p.flows.push_back(random_flow(spec.strategies(), spec.mass(i), rng));
	return p;
}

/// Weights summing to 1 over 1 + coalitions players, every coalition positive.
inline std::vector<double> random_weights(std::size_t coalitions, std::mt19937& rng)
{
	std::uniform_real_distribution<double> u(0.05, 1.0);
	std::vector<double> w(coalitions + 1);
	double total = 0.0;
	for (auto& v : w)
	{
		v = u(rng);
		total += v;
	}
	for (auto& v : w)
		v /= total;
	return w;
}

inline std::vector<double> random_loads(std::size_t horizon, double lo, double hi, std::mt19937& rng)
{
	std::uniform_real_distribution<double> u(lo, hi);
	std::vector<double> l(horizon);
	for (auto& v : l)
		v = u(rng);
	return l;
}

} // namespace evcg::fixtures
