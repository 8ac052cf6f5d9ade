#pragma once

#include <evcg/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace evcg {

namespace cost {

/// f(x) = slope * x + intercept
struct linear
{
	double slope = 1.0;
	double intercept = 0.0;
};

/// f(x) = x^2 (Joule losses)
struct quadratic
{
};

/// f(x) = exp(beta * x) (transformer ageing proxy)
struct exponential
{
	double beta = 1.0;
};

/// Host-supplied cost. The derivatives are optional.
struct custom
{
	std::function<double(double)> value;
	std::function<double(double)> derivative;
	std::function<double(double)> second_derivative;
	std::string name = "custom";
};

} // namespace cost

/**
 * Per-unit charging cost f on a load interval [0, W].
 *
 * Every family is C1, convex, strictly increasing and nonnegative on its
 * domain. For the named families this follows from the parameter checks; for
 * custom families it is checked on a sampling grid at construction.
 *
 * A family can carry an outer affine map a*f + b (a > 0). It leaves every
 * equilibrium unchanged and is only used to test that property.
 */
class cost_family
{
public:
	using kind_type = std::variant<cost::linear, cost::quadratic, cost::exponential, cost::custom>;

	static constexpr std::size_t default_custom_samples = 256;

	static cost_family linear(double slope = 1.0, double intercept = 0.0)
	{
		if (!(slope > 0.0) || !std::isfinite(slope))
		{
			throw invalid_argument_error("linear cost requires slope > 0");
		}
		if (!(intercept >= 0.0) || !std::isfinite(intercept))
		{
			throw invalid_argument_error("linear cost requires intercept >= 0");
		}
		return cost_family(cost::linear{slope, intercept});
	}

	static cost_family quadratic()
	{
		return cost_family(cost::quadratic{});
	}

	static cost_family exponential(double beta = 1.0)
	{
		if (!(beta > 0.0) || !std::isfinite(beta))
		{
			throw invalid_argument_error("exponential cost requires beta > 0");
		}
		return cost_family(cost::exponential{beta});
	}

	/// Custom cost, sampled on `samples` points of [0, domain_bound] for
	/// finiteness, nonnegativity, strict increase and convexity.
	static cost_family custom(cost::custom fn, double domain_bound, std::size_t samples = default_custom_samples)
	{
		if (!fn.value)
		{
			throw invalid_argument_error("custom cost requires a value function");
		}
		if (!(domain_bound > 0.0) || !std::isfinite(domain_bound))
		{
			throw invalid_argument_error("custom cost requires a positive domain bound");
		}
		if (samples < 3)
		{
			throw invalid_argument_error("custom cost validation needs at least 3 samples");
		}
		validate_on_grid(fn.value, domain_bound, samples);
		cost_family f(std::move(fn));
		f.domain_bound_ = domain_bound;
		return f;
	}

	/// Value at `load`.
	double eval(double load) const
	{
		check_domain(load);
		return scale_ * raw_value(load) + offset_;
	}

	double operator()(double load) const
	{
		return eval(load);
	}

	double deriv(double load) const
	{
		check_domain(load);
		return scale_ * raw_deriv(load);
	}

	double second_deriv(double load) const
	{
		check_domain(load);
		return scale_ * raw_second_deriv(load);
	}

	bool has_derivative() const
	{
		if (auto const* c = std::get_if<cost::custom>(&kind_))
		{
			return static_cast<bool>(c->derivative);
		}
		return true;
	}

	/// Access to f'' (the C2 capability the comparative statics rely on).
	bool has_second_derivative() const
	{
		if (auto const* c = std::get_if<cost::custom>(&kind_))
		{
			return static_cast<bool>(c->second_derivative);
		}
		return true;
	}

	std::optional<double> domain_bound() const
	{
		return domain_bound_;
	}

	cost_family with_domain_bound(double bound) const
	{
		if (!(bound > 0.0) || !std::isfinite(bound))
		{
			throw invalid_argument_error("domain bound must be positive and finite");
		}
		cost_family f = *this;
		f.domain_bound_ = bound;
		return f;
	}

	/// Returns a family computing a * f(.) + b.
	cost_family affine(double a, double b) const
	{
		if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b))
		{
			throw invalid_argument_error("affine transform requires a > 0 and finite b");
		}
		cost_family f = *this;
		f.scale_ = a * scale_;
		f.offset_ = a * offset_ + b;
		return f;
	}

	double scale() const
	{
		return scale_;
	}

	double offset() const
	{
		return offset_;
	}

	kind_type const& kind() const
	{
		return kind_;
	}

	/// Config-file name: "linear", "quadratic", "exponential" or the custom name.
	std::string name() const
	{
		return std::visit(
			[](auto const& k) -> std::string {
				using K = std::decay_t<decltype(k)>;
				if constexpr (std::is_same_v<K, cost::linear>)
					return "linear";
				else if constexpr (std::is_same_v<K, cost::quadratic>)
					return "quadratic";
				else if constexpr (std::is_same_v<K, cost::exponential>)
					return "exponential";
				else
					return k.name;
			},
			kind_);
	}

private:
	explicit cost_family(kind_type kind)
		: kind_(std::move(kind))
	{
	}

	// Loads computed from valid flows can overshoot the domain ends by rounding.
	double domain_slack() const
	{
		return 1e-9 * std::max(1.0, domain_bound_.value_or(1.0));
	}

	void check_domain(double load) const
	{
		if (!std::isfinite(load) || load < -domain_slack() ||
		    (domain_bound_ && load > *domain_bound_ + domain_slack()))
		{
			std::ostringstream os;
			os << "load " << load << " outside cost domain [0, ";
			if (domain_bound_)
				os << *domain_bound_;
			else
				os << "inf";
			os << "]";
			throw domain_error(os.str());
		}
	}

	double raw_value(double x) const
	{
		return std::visit(
			[x](auto const& k) -> double {
				using K = std::decay_t<decltype(k)>;
				if constexpr (std::is_same_v<K, cost::linear>)
					return k.slope * x + k.intercept;
				else if constexpr (std::is_same_v<K, cost::quadratic>)
					return x * x;
				else if constexpr (std::is_same_v<K, cost::exponential>)
					return std::exp(k.beta * x);
				else
					return k.value(x);
			},
			kind_);
	}

	double raw_deriv(double x) const
	{
		return std::visit(
			[x](auto const& k) -> double {
				using K = std::decay_t<decltype(k)>;
				if constexpr (std::is_same_v<K, cost::linear>)
					return k.slope;
				else if constexpr (std::is_same_v<K, cost::quadratic>)
					return 2.0 * x;
				else if constexpr (std::is_same_v<K, cost::exponential>)
					return k.beta * std::exp(k.beta * x);
				else
				{
					if (!k.derivative)
						throw missing_derivative_error("cost family '" + k.name + "' has no derivative");
					return k.derivative(x);
				}
			},
			kind_);
	}

	double raw_second_deriv(double x) const
	{
		return std::visit(
			[x](auto const& k) -> double {
				using K = std::decay_t<decltype(k)>;
				if constexpr (std::is_same_v<K, cost::linear>)
					return 0.0;
				else if constexpr (std::is_same_v<K, cost::quadratic>)
					return 2.0;
				else if constexpr (std::is_same_v<K, cost::exponential>)
					return k.beta * k.beta * std::exp(k.beta * x);
				else
				{
					if (!k.second_derivative)
						throw missing_derivative_error("cost family '" + k.name + "' has no second derivative");
					return k.second_derivative(x);
				}
			},
			kind_);
	}

	static void validate_on_grid(std::function<double(double)> const& value, double bound, std::size_t samples)
	{
		std::vector<double> v(samples);
		double const h = bound / static_cast<double>(samples - 1);
		for (std::size_t i = 0; i < samples; ++i)
		{
			v[i] = value(h * static_cast<double>(i));
			if (!std::isfinite(v[i]))
				throw invalid_argument_error("custom cost is not finite on its domain");
			if (v[i] < 0.0)
				throw invalid_argument_error("custom cost is negative on its domain");
			if (i > 0 && !(v[i] > v[i - 1]))
				throw invalid_argument_error("custom cost is not strictly increasing on its domain");
			if (i > 1)
			{
				double const d2 = v[i] - 2.0 * v[i - 1] + v[i - 2];
				if (d2 < -1e-9 * std::max(1.0, std::abs(v[i - 1])))
					throw invalid_argument_error("custom cost is not convex on its domain");
			}
		}
	}

	kind_type kind_;
	std::optional<double> domain_bound_;
	double scale_ = 1.0;
	double offset_ = 0.0;
};

/// a * f + b, a > 0.
inline cost_family affine_transform(cost_family const& f, double a, double b)
{
	return f.affine(a, b);
}

} // namespace evcg
