#pragma once

#include <evcg/costfn.hpp>
#include <evcg/model.hpp>
#include <evcg/verify.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace evcg {

/**
 * The three-slot game: T = 3, C = 2, P = 1, one coalition of weight M and
 * individuals of weight 1 - M. Alternative 1 charges in slots 1-2,
 * alternative 2 in slots 2-3. Slot 1 is the peak: L1 >= L3.
 *
 * M = 0 is accepted and stands for the limit of a vanishing coalition
 * (the pure Wardrop split).
 */
struct three_slot_instance
{
	double peak_load = 0.0;     // L1
	double middle_load = 0.0;   // L2
	double offpeak_load = 0.0;  // L3
	double coalition_size = 0.0;
	cost_family cost = cost_family::linear();

	three_slot_instance() = default;

	three_slot_instance(double l1, double l2, double l3, double m, cost_family f)
		: peak_load(l1)
		, middle_load(l2)
		, offpeak_load(l3)
		, coalition_size(m)
		, cost(std::move(f))
	{
		validate();
		if (!cost.domain_bound())
			cost = cost.with_domain_bound(10.0 * (std::max({peak_load, middle_load, offpeak_load}) + 1.0));
		if (std::max({peak_load, middle_load, offpeak_load}) + 1.0 > *cost.domain_bound())
			throw invalid_argument_error("max non-EV load + 1 exceeds the cost domain bound W");
	}

	void validate() const
	{
		for (double l : {peak_load, middle_load, offpeak_load})
			if (!(l >= 0.0) || !std::isfinite(l))
				throw invalid_argument_error("three-slot loads must be finite and >= 0");
		if (peak_load < offpeak_load)
			throw invalid_argument_error("three-slot instance requires L1 >= L3");
		if (!(coalition_size >= 0.0 && coalition_size <= 1.0))
			throw invalid_argument_error("coalition size must lie in [0, 1]");
	}

	three_slot_instance with_size(double m) const
	{
		return three_slot_instance(peak_load, middle_load, offpeak_load, m, cost);
	}

	three_slot_instance with_cost(cost_family f) const
	{
		return three_slot_instance(peak_load, middle_load, offpeak_load, coalition_size, std::move(f));
	}
};

/// Configuration regimes of the three-slot equilibrium.
enum class regime
{
	/// L1 >= L3 + 1, M <= threshold: everybody avoids the peak.
	peak_avoided,
	/// L1 >= L3 + 1, M > threshold: only the coalition uses the peak.
	coalition_on_peak,
	/// L1 < L3 + 1, M < 1 + L3 - L1: both share the peak, loads equalized.
	shared_peak,
	/// L1 < L3 + 1, M >= 1 + L3 - L1: individuals leave the peak.
	coalition_dominates
};

inline char const* to_string(regime r)
{
	switch (r)
	{
	case regime::peak_avoided:
		return "peak_avoided";
	case regime::coalition_on_peak:
		return "coalition_on_peak";
	case regime::shared_peak:
		return "shared_peak";
	case regime::coalition_dominates:
		return "coalition_dominates";
	}
	return "unknown";
}

/// Equilibrium weights on alternative 1.
struct ce_point
{
	double x1 = 0.0; ///< coalition
	double x0 = 0.0; ///< individuals
	regime tag = regime::peak_avoided;
};

/// Reduced (middle-slot term removed) equilibrium costs.
struct reduced_ce_costs
{
	double social = 0.0;
	double individuals = 0.0;
	double coalition = 0.0;
};

inline constexpr double root_tolerance = 1e-12;

/// Coalition size up to which it keeps away from the peak when L1 >= L3 + 1:
/// (f(L1) - f(1 + L3)) / f'(1 + L3).
inline double peak_threshold(three_slot_instance const& inst)
{
	auto const& f = inst.cost;
	double const off = 1.0 + inst.offpeak_load;
	return (f(inst.peak_load) - f(off)) / f.deriv(off);
}

/// Coalition size 1 + L3 - L1 at which individuals leave the peak when L1 < L3 + 1.
inline double sharing_threshold(three_slot_instance const& inst)
{
	return 1.0 + inst.offpeak_load - inst.peak_load;
}

inline bool peak_is_expensive(three_slot_instance const& inst)
{
	return inst.peak_load >= inst.offpeak_load + 1.0;
}

/**
 * Marginal cost difference of the coalition when individuals avoid the peak:
 *
 *   g(x1) = f(L1 + x1) + x1 f'(L1 + x1) - f(1 + L3 - x1) - (M - x1) f'(1 + L3 - x1).
 *
 * Strictly increasing in x1 for convex, increasing f.
 */
inline double coalition_marginal_gap(three_slot_instance const& inst, double x1)
{
	auto const& f = inst.cost;
	double const hi = inst.peak_load + x1;
	double const lo = 1.0 + inst.offpeak_load - x1;
	return f(hi) + x1 * f.deriv(hi) - f(lo) - (inst.coalition_size - x1) * f.deriv(lo);
}

namespace detail {

inline double bisect_marginal_gap(three_slot_instance const& inst, double lo, double hi)
{
	double glo = coalition_marginal_gap(inst, lo);
	double ghi = coalition_marginal_gap(inst, hi);
	double const scale = 1.0 + std::abs(inst.cost(inst.peak_load));
	double const accept = 1e-10 * scale;
	if (std::abs(glo) <= accept && glo >= 0.0)
		return lo;
	if (std::abs(ghi) <= accept && ghi <= 0.0)
		return hi;
	if (glo > accept || ghi < -accept)
	{
		std::ostringstream os;
		os.precision(17);
		os << "coalition marginal gap does not change sign on [" << lo << ", " << hi << "]: g(lo) = " << glo
		   << ", g(hi) = " << ghi << " (cost function violates convexity or monotonicity?)";
		throw numeric_error(os.str());
	}
	if (glo >= 0.0)
		return lo;
	if (ghi <= 0.0)
		return hi;
	for (int it = 0; it < 200 && hi - lo > root_tolerance; ++it)
	{
		double const mid = 0.5 * (lo + hi);
		double const gm = coalition_marginal_gap(inst, mid);
		if (gm == 0.0)
			return mid;
		if (gm < 0.0)
			lo = mid;
		else
			hi = mid;
	}
	return 0.5 * (lo + hi);
}

} // namespace detail

/// Closed-form composite equilibrium of the three-slot game.
inline ce_point solve_ce(three_slot_instance const& inst)
{
	inst.validate();
	if (!inst.cost.has_derivative())
		throw missing_derivative_error("three-slot solver needs the cost derivative");

	double const m = inst.coalition_size;
	ce_point p;
	if (peak_is_expensive(inst))
	{
		if (m <= peak_threshold(inst))
		{
			p.tag = regime::peak_avoided;
			return p;
		}
		p.tag = regime::coalition_on_peak;
		p.x1 = detail::bisect_marginal_gap(inst, 0.0, m);
		return p;
	}

	double const bar = sharing_threshold(inst);
	if (m < bar)
	{
		p.tag = regime::shared_peak;
		p.x1 = m / 2.0;
		p.x0 = (bar - m) / 2.0;
		return p;
	}
	p.tag = regime::coalition_dominates;
	p.x1 = detail::bisect_marginal_gap(inst, bar / 2.0, m / 2.0);
	return p;
}

/**
 * Reduced costs at the equilibrium `ce` of `inst`. At M = 1 the individuals'
 * cost is the continuous extension f(1 + L3 - x1), the cost a deviating EV
 * would pay.
 */
inline reduced_ce_costs ce_costs(three_slot_instance const& inst, ce_point const& ce)
{
	auto const& f = inst.cost;
	double const m = inst.coalition_size;
	double const tol = 1e-9;
	reduced_ce_costs c;
	switch (ce.tag)
	{
	case regime::peak_avoided: {
		if (!peak_is_expensive(inst) || std::abs(ce.x1) > tol || std::abs(ce.x0) > tol)
			throw invalid_argument_error("equilibrium point does not match the peak_avoided regime");
		double const v = f(1.0 + inst.offpeak_load);
		c = {v, v, v};
		return c;
	}
	case regime::shared_peak: {
		if (peak_is_expensive(inst) || std::abs(ce.x1 - m / 2.0) > tol ||
		    std::abs(ce.x0 - (sharing_threshold(inst) - m) / 2.0) > tol)
			throw invalid_argument_error("equilibrium point does not match the shared_peak regime");
		double const v = f((1.0 + inst.peak_load + inst.offpeak_load) / 2.0);
		c = {v, v, v};
		return c;
	}
	case regime::coalition_on_peak:
	case regime::coalition_dominates: {
		bool const expensive = ce.tag == regime::coalition_on_peak;
		if (expensive != peak_is_expensive(inst) || std::abs(ce.x0) > tol || ce.x1 < -tol || ce.x1 > m + tol ||
		    m <= 0.0)
			throw invalid_argument_error(std::string("equilibrium point does not match the ") + to_string(ce.tag) +
			                             " regime");
		double const x1 = ce.x1;
		double const peak = f(inst.peak_load + x1);
		double const off = f(1.0 + inst.offpeak_load - x1);
		c.social = x1 * peak + (1.0 - x1) * off;
		c.individuals = off;
		c.coalition = (x1 * peak + (m - x1) * off) / m;
		return c;
	}
	}
	return c;
}

/// The instance as a general game with weights (1 - M, M).
inline game_spec to_game_spec(three_slot_instance const& inst)
{
	return game_spec(3,
	                 2,
	                 1.0,
	                 {inst.peak_load, inst.middle_load, inst.offpeak_load},
	                 inst.cost,
	                 {1.0 - inst.coalition_size, inst.coalition_size});
}

/// The equilibrium as a profile of the general game.
inline profile to_profile(three_slot_instance const& inst, ce_point const& ce)
{
	double const m = inst.coalition_size;
	profile p;
	p.flows.emplace_back(std::vector<double>{ce.x0, std::max(0.0, 1.0 - m - ce.x0)}, 1.0 - m);
	p.flows.emplace_back(std::vector<double>{ce.x1, std::max(0.0, m - ce.x1)}, m);
	return p;
}

/// Analytic equilibrium report of the general 3-slot game with one coalition.
/// An off-peak-first load (L1 < L3) is solved on the mirrored instance.
inline equilibrium_report solve_three_slot(game_spec const& spec, double gap_tolerance = 1e-8)
{
	if (spec.horizon() != 3 || spec.duration() != 2 || spec.coalitions() != 1)
		throw unsupported_error("analytic solver needs T = 3, C = 2 and exactly one coalition");
	if (spec.power() != 1.0)
		throw unsupported_error("analytic solver needs P = 1 (rescale the non-EV load)");
	auto const l = spec.base_load();
	bool const mirrored = l[0] < l[2];
	three_slot_instance inst(mirrored ? l[2] : l[0], l[1], mirrored ? l[0] : l[2], spec.mass(1), spec.cost());
	auto const ce = solve_ce(inst);
	auto p = to_profile(inst, ce);
	if (mirrored)
	{
		for (auto& x : p.flows)
			x = flow({x[1], x[0]}, x.mass());
	}
	auto r = make_report(spec, std::move(p), solve_status::analytic, 0, gap_tolerance);
	if (spec.mass(0) <= 0.0 && r.reduced)
		r.reduced->individuals = ce_costs(inst, ce).individuals;
	return r;
}

} // namespace evcg
