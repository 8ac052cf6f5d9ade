#pragma once

#include <evcg/gradient.hpp>
#include <evcg/model.hpp>
#include <evcg/verify.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace evcg {

/// Learning rate eta_n of the n-th update (n >= 1).
struct step_schedule
{
	enum class kind
	{
		constant,
		inverse_sqrt
	};

	kind shape = kind::inverse_sqrt;
	double scale = 10.0;

	/// eta_n = scale
	static step_schedule constant(double eta)
	{
		return {kind::constant, eta};
	}

	/// eta_n = scale / (1 + sqrt(n))
	static step_schedule inverse_sqrt(double scale = 10.0)
	{
		return {kind::inverse_sqrt, scale};
	}

	double at(std::size_t n) const
	{
		if (shape == kind::constant)
			return scale;
		return scale / (1.0 + std::sqrt(static_cast<double>(n)));
	}

	void validate() const
	{
		if (!(scale > 0.0) || !std::isfinite(scale))
			throw invalid_argument_error("step size must be positive and finite");
	}
};

inline char const* to_string(step_schedule::kind k)
{
	return k == step_schedule::kind::constant ? "constant" : "inverse_sqrt";
}

/// Cumulative costs per player and strategy, and the profile they induce.
struct learner_state
{
	std::vector<std::vector<double>> cumulative_costs;
	profile current;
	std::size_t iteration = 0;
	step_schedule step;

	/// Zero cumulative costs, i.e. uniform flows.
	static learner_state initial(game_spec const& spec, step_schedule step = {})
	{
		step.validate();
		learner_state s;
		s.cumulative_costs.assign(spec.players(), std::vector<double>(spec.strategies(), 0.0));
		s.current = uniform_profile(spec);
		s.step = step;
		return s;
	}
};

/// mass * exp(-V_s) / sum_r exp(-V_r), shifted by min V so the largest exponent is 0.
inline flow softmax_flow(std::span<const double> cumulative, double mass)
{
	double const lo = *std::min_element(cumulative.begin(), cumulative.end());
	std::vector<double> w(cumulative.size());
	double total = 0.0;
	for (std::size_t s = 0; s < w.size(); ++s)
	{
		w[s] = std::exp(lo - cumulative[s]);
		total += w[s];
	}
	for (double& v : w)
		v = mass * (v / total);
	return flow(std::move(w), mass);
}

namespace detail {

inline learner_state advance(game_spec const& spec, learner_state state, cost_field const& field)
{
	std::size_t const n = state.iteration + 1;
	double const eta = state.step.at(n);
	profile next;
	next.flows.reserve(spec.players());
	for (std::size_t i = 0; i < spec.players(); ++i)
	{
		auto& v = state.cumulative_costs[i];
		if (spec.mass(i) > 0.0)
		{
			auto const& g = field.gradient[i];
			for (std::size_t s = 0; s < v.size(); ++s)
			{
				if (!std::isfinite(g[s]))
					throw numeric_error("non-finite cost in learning step");
				v[s] += eta * g[s];
			}
		}
		next.flows.push_back(softmax_flow(v, spec.mass(i)));
	}
	state.current = std::move(next);
	state.iteration = n;
	return state;
}

} // namespace detail

/**
 * One exponential-learning update. Individuals add eta_n u_s(x) to their
 * cumulative costs, each coalition adds eta_n times the gradient of its
 * average cost; flows are then the scaled softmax of minus the cumulative
 * costs.
 */
inline learner_state learning_step(game_spec const& spec, learner_state state)
{
	check_profile(spec, state.current);
	if (state.cumulative_costs.size() != spec.players())
		throw structural_error("learner state does not match the game");
	for (auto const& row : state.cumulative_costs)
		if (row.size() != spec.strategies())
			throw structural_error("learner state does not match the game");
	auto const field = evaluate_field(spec, state.current);
	return detail::advance(spec, std::move(state), field);
}

struct dynamics_options
{
	std::size_t max_iterations = 100000;
	double gap_tolerance = 1e-6;
	step_schedule step = step_schedule::inverse_sqrt();
	bool record_trace = false;
	std::size_t trace_stride = 1;
};

/**
 * Runs the learning dynamics from uniform flows until the VI gap drops to
 * gap_tolerance or max_iterations updates were made. Convergence is only
 * guaranteed for linear costs, so the report carries the final status.
 */
inline equilibrium_report solve_dynamics(game_spec const& spec, dynamics_options const& opts = {})
{
	if (spec.coalitions() > 0 && !spec.cost().has_derivative())
		throw missing_derivative_error("learning dynamics need the cost derivative");
	auto state = learner_state::initial(spec, opts.step);
	std::size_t const stride = std::max<std::size_t>(1, opts.trace_stride);
	std::vector<trace_row> trace;

	solve_status status = solve_status::max_iter_reached;
	for (;;)
	{
		auto const field = evaluate_field(spec, state.current);
		double gap = 0.0;
		for (std::size_t i = 0; i < spec.players(); ++i)
			gap += detail::player_gap(spec, state.current, field, i);
		if (!std::isfinite(gap))
			throw numeric_error("non-finite VI gap in learning dynamics");

		bool const done = gap <= opts.gap_tolerance;
		bool const exhausted = state.iteration >= opts.max_iterations;
		if (opts.record_trace && (state.iteration % stride == 0 || done || exhausted))
		{
			trace_row row{state.iteration, gap, {}};
			for (auto const& x : state.current.flows)
				row.flows.emplace_back(x.values().begin(), x.values().end());
			trace.push_back(std::move(row));
		}
		if (done)
		{
			status = solve_status::converged;
			break;
		}
		if (exhausted)
			break;
		state = detail::advance(spec, std::move(state), field);
	}

	auto report = make_report(spec, std::move(state.current), status, state.iteration, opts.gap_tolerance);
	report.trace = std::move(trace);
	return report;
}

} // namespace evcg
