#pragma once

// Scenario files, CSV input/output and report serialization for the command
// line tool. Needs nlohmann/json on the include path.

#include <evcg/analytic3.hpp>
#include <evcg/costfn.hpp>
#include <evcg/dynamics.hpp>
#include <evcg/errors.hpp>
#include <evcg/model.hpp>
#include <evcg/sweep.hpp>
#include <evcg/verify.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace evcg {

using json = nlohmann::json;

inline constexpr char const* report_format = "evcg-report/1";

/// 12 significant digits; the format of every numeric output except the
/// echoed non-EV load.
inline std::string format_number(double v)
{
	if (std::isnan(v))
		return "nan";
	if (std::isinf(v))
		return v > 0 ? "inf" : "-inf";
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.12g", v);
	return buf;
}

/// Shortest representation that parses back to the same double.
inline std::string format_exact(double v)
{
	char buf[32];
	auto const res = std::to_chars(buf, buf + sizeof buf, v);
	return std::string(buf, res.ptr);
}

/// v rounded to 12 significant digits (for JSON output).
inline double round12(double v)
{
	if (!std::isfinite(v))
		return v;
	return std::strtod(format_number(v).c_str(), nullptr);
}

struct cost_config
{
	std::string family = "linear";
	double slope = 1.0;
	double intercept = 0.0;
	double beta = 1.0;
	std::optional<double> domain_bound;

	cost_family build() const
	{
		cost_family f = [&] {
			if (family == "linear")
				return cost_family::linear(slope, intercept);
			if (family == "quadratic")
				return cost_family::quadratic();
			if (family == "exponential")
				return cost_family::exponential(beta);
			throw config_error("unknown cost family '" + family + "' (expected linear, quadratic or exponential)");
		}();
		if (domain_bound)
			f = f.with_domain_bound(*domain_bound);
		return f;
	}
};

struct scenario_config
{
	std::size_t horizon = 3;
	std::size_t duration = 2;
	double power = 1.0;
	cost_config cost;
	std::vector<double> weights{0.0, 1.0};

	/// Inline non-EV load, or empty when read from load_path.
	std::vector<double> loads{1.5, 1.0, 1.0};
	std::optional<std::string> load_path;
	bool normalize = false;

	sweep_solver solver = sweep_solver::analytic;
	dynamics_options dynamics;

	std::optional<std::vector<double>> sweep_grid;
};

struct resolved_loads
{
	std::vector<double> values;
	/// How the values were scaled, for output metadata.
	std::string normalization = "none";
};

namespace detail {

inline std::string trim(std::string_view s)
{
	auto const b = s.find_first_not_of(" \t\r\n");
	if (b == std::string_view::npos)
		return {};
	auto const e = s.find_last_not_of(" \t\r\n");
	return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string const& line)
{
	std::vector<std::string> out;
	std::stringstream ss(line);
	std::string cell;
	while (std::getline(ss, cell, ','))
		out.push_back(trim(cell));
	if (!line.empty() && line.back() == ',')
		out.emplace_back();
	return out;
}

inline double parse_double(std::string const& s, std::string const& what)
{
	double v = 0.0;
	auto const* first = s.data();
	auto const* last = s.data() + s.size();
	if (!s.empty() && *first == '+')
		++first;
	auto const res = std::from_chars(first, last, v);
	if (res.ec != std::errc() || res.ptr != last || s.empty())
		throw config_error(what + ": '" + s + "' is not a number");
	return v;
}

template <class T>
T get_or(json const& j, char const* key, T fallback)
{
	if (!j.contains(key))
		return fallback;
	try
	{
		return j.at(key).get<T>();
	}
	catch (json::exception const& e)
	{
		throw config_error(std::string("config key '") + key + "': " + e.what());
	}
}

} // namespace detail

/// Scales loads so the largest is 1.
inline resolved_loads normalize_loads(std::vector<double> loads)
{
	resolved_loads r;
	double const peak = loads.empty() ? 0.0 : *std::max_element(loads.begin(), loads.end());
	if (!(peak > 0.0))
		throw config_error("cannot normalize a load profile whose maximum is not positive");
	for (double& l : loads)
		l /= peak;
	r.values = std::move(loads);
	r.normalization = "divided by max load " + format_exact(peak);
	return r;
}

/**
 * Reads a non-EV load profile. The header starts with `t`; the load column is
 * `load` or, for files written by this tool, `non_ev`. Rows must list t = 1..T
 * in order.
 */
inline resolved_loads load_profile_csv(std::istream& in, bool normalize = false, std::string const& source = "input")
{
	std::string line;
	if (!std::getline(in, line))
		throw config_error(source + ": empty load profile");
	auto const header = detail::split_csv(line);
	if (header.empty() || header[0] != "t")
		throw config_error(source + ": header must start with column 't'");
	std::size_t col = 0;
	for (std::size_t i = 1; i < header.size(); ++i)
		if (header[i] == "load" || header[i] == "non_ev")
		{
			col = i;
			break;
		}
	if (col == 0)
		throw config_error(source + ": header needs a 'load' (or 'non_ev') column");

	std::vector<double> loads;
	std::size_t row = 1;
	while (std::getline(in, line))
	{
		++row;
		if (detail::trim(line).empty())
			continue;
		auto const cells = detail::split_csv(line);
		if (cells.size() <= col)
			throw config_error(source + ": row " + std::to_string(row) + " is missing columns");
		double const t = detail::parse_double(cells[0], source + " row " + std::to_string(row) + " column t");
		if (t != static_cast<double>(loads.size() + 1))
			throw config_error(source + ": row " + std::to_string(row) + " has t = " + cells[0] + ", expected " +
			                   std::to_string(loads.size() + 1) + " (rows must be t = 1..T in order)");
		double const v = detail::parse_double(cells[col], source + " row " + std::to_string(row) + " load");
		if (!std::isfinite(v) || v < 0.0)
			throw config_error(source + ": row " + std::to_string(row) + " load must be finite and >= 0");
		loads.push_back(v);
	}
	if (loads.empty())
		throw config_error(source + ": load profile has no rows");
	if (normalize)
		return normalize_loads(std::move(loads));
	return resolved_loads{std::move(loads), "none"};
}

inline resolved_loads load_profile_csv(std::filesystem::path const& path, bool normalize = false)
{
	std::ifstream in(path);
	if (!in)
		throw config_error("cannot open load profile '" + path.string() + "'");
	return load_profile_csv(in, normalize, path.string());
}

inline scenario_config parse_config(json const& j)
{
	if (!j.is_object())
		throw config_error("config must be a JSON object");
	scenario_config c;
	json const game = j.value("game", json::object());
	c.horizon = detail::get_or<std::size_t>(game, "T", c.horizon);
	c.duration = detail::get_or<std::size_t>(game, "C", c.duration);
	c.power = detail::get_or<double>(game, "P", c.power);
	c.weights = detail::get_or<std::vector<double>>(game, "weights", c.weights);
	if (game.contains("cost"))
	{
		json const& cost = game.at("cost");
		if (cost.is_string())
			c.cost.family = cost.get<std::string>();
		else
		{
			c.cost.family = detail::get_or<std::string>(cost, "family", c.cost.family);
			c.cost.slope = detail::get_or<double>(cost, "slope", c.cost.slope);
			c.cost.intercept = detail::get_or<double>(cost, "intercept", c.cost.intercept);
			c.cost.beta = detail::get_or<double>(cost, "beta", c.cost.beta);
			if (cost.contains("domain_bound") && !cost.at("domain_bound").is_null())
				c.cost.domain_bound = detail::get_or<double>(cost, "domain_bound", 0.0);
		}
	}

	if (j.contains("load_profile"))
	{
		json const& lp = j.at("load_profile");
		if (lp.is_array())
		{
			c.loads = lp.get<std::vector<double>>();
			c.load_path.reset();
		}
		else if (lp.is_object() && lp.contains("path"))
		{
			c.load_path = lp.at("path").get<std::string>();
			c.loads.clear();
		}
		else
			throw config_error("load_profile must be an array of loads or {\"path\": ...}");
	}
	c.normalize = detail::get_or<bool>(j, "normalize", c.normalize);

	json const solver = j.value("solver", json::object());
	std::string const kind = detail::get_or<std::string>(solver, "kind", "analytic");
	if (kind == "analytic")
		c.solver = sweep_solver::analytic;
	else if (kind == "dynamics")
		c.solver = sweep_solver::dynamics;
	else
		throw config_error("solver.kind must be 'analytic' or 'dynamics', got '" + kind + "'");
	c.dynamics.max_iterations = detail::get_or<std::size_t>(solver, "max_iter", c.dynamics.max_iterations);
	c.dynamics.gap_tolerance = detail::get_or<double>(solver, "gap_tol", c.dynamics.gap_tolerance);
	c.dynamics.trace_stride = detail::get_or<std::size_t>(solver, "trace_stride", c.dynamics.trace_stride);
	if (solver.contains("step"))
	{
		json const& step = solver.at("step");
		std::string const schedule = detail::get_or<std::string>(step, "schedule", "inverse_sqrt");
		double const scale = detail::get_or<double>(step, "scale", c.dynamics.step.scale);
		if (schedule == "constant")
			c.dynamics.step = step_schedule::constant(scale);
		else if (schedule == "inverse_sqrt")
			c.dynamics.step = step_schedule::inverse_sqrt(scale);
		else
			throw config_error("solver.step.schedule must be 'constant' or 'inverse_sqrt'");
	}
	if (!(c.dynamics.gap_tolerance >= 0.0))
		throw config_error("solver.gap_tol must be >= 0");
	try
	{
		c.dynamics.step.validate();
	}
	catch (error const& e)
	{
		throw config_error(std::string("solver.step: ") + e.what());
	}

	if (j.contains("sweep") && !j.at("sweep").is_null())
	{
		json const& s = j.at("sweep");
		if (s.contains("grid"))
			c.sweep_grid = s.at("grid").get<std::vector<double>>();
		else
			c.sweep_grid = uniform_grid(detail::get_or<double>(s, "first", 0.01),
			                            detail::get_or<double>(s, "last", 1.0),
			                            detail::get_or<std::size_t>(s, "count", 101));
	}
	return c;
}

/// Every setting, defaults included.
inline json to_json(scenario_config const& c)
{
	json cost = {{"family", c.cost.family}};
	if (c.cost.family == "linear")
	{
		cost["slope"] = c.cost.slope;
		cost["intercept"] = c.cost.intercept;
	}
	if (c.cost.family == "exponential")
		cost["beta"] = c.cost.beta;
	cost["domain_bound"] = c.cost.domain_bound ? json(*c.cost.domain_bound) : json(nullptr);

	json j;
	j["game"] = {{"T", c.horizon}, {"C", c.duration}, {"P", c.power}, {"cost", cost}, {"weights", c.weights}};
	if (c.load_path)
		j["load_profile"] = {{"path", *c.load_path}};
	else
		j["load_profile"] = c.loads;
	j["normalize"] = c.normalize;
	j["solver"] = {
		{"kind", c.solver == sweep_solver::analytic ? "analytic" : "dynamics"},
		{"max_iter", c.dynamics.max_iterations},
		{"gap_tol", c.dynamics.gap_tolerance},
		{"trace_stride", c.dynamics.trace_stride},
		{"step", {{"schedule", to_string(c.dynamics.step.shape)}, {"scale", c.dynamics.step.scale}}},
	};
	j["sweep"] = c.sweep_grid ? json{{"grid", *c.sweep_grid}} : json(nullptr);
	return j;
}

inline scenario_config read_config(std::filesystem::path const& path)
{
	std::ifstream in(path);
	if (!in)
		throw config_error("cannot open config '" + path.string() + "'");
	json j;
	try
	{
		in >> j;
	}
	catch (json::exception const& e)
	{
		throw config_error("config '" + path.string() + "' is not valid JSON: " + e.what());
	}
	auto c = parse_config(j);
	if (c.load_path && std::filesystem::path(*c.load_path).is_relative())
		c.load_path = (path.parent_path() / *c.load_path).string();
	return c;
}

/// Inline or file loads, normalized when requested.
inline resolved_loads resolve_loads(scenario_config const& c)
{
	if (c.load_path)
		return load_profile_csv(std::filesystem::path(*c.load_path), c.normalize);
	if (c.normalize)
		return normalize_loads(c.loads);
	return resolved_loads{c.loads, "none"};
}

/// The game described by a config with already resolved loads.
inline game_spec build_game(scenario_config const& c, std::vector<double> loads)
{
	try
	{
		return game_spec(c.horizon, c.duration, c.power, std::move(loads), c.cost.build(), c.weights);
	}
	catch (config_error const&)
	{
		throw;
	}
	catch (error const& e)
	{
		throw config_error(std::string("invalid game: ") + e.what());
	}
}

inline game_spec build_game(scenario_config const& c)
{
	return build_game(c, resolve_loads(c).values);
}

/// The three-slot instance of a config (T = 3, C = 2, P = 1, L1 >= L3).
inline three_slot_instance build_three_slot(game_spec const& spec)
{
	if (spec.horizon() != 3 || spec.duration() != 2 || spec.power() != 1.0 || spec.coalitions() != 1)
		throw config_error("analytic solver needs T = 3, C = 2, P = 1 and one coalition");
	auto const l = spec.base_load();
	if (l[0] < l[2])
		throw config_error("analytic sweep needs the peak in slot 1 (L1 >= L3)");
	return three_slot_instance(l[0], l[1], l[2], spec.mass(1), spec.cost());
}

namespace detail {

inline json optional_number(std::optional<double> v)
{
	return v ? json(round12(*v)) : json(nullptr);
}

inline json costs_json(cost_summary const& c)
{
	json coalitions = json::array();
	for (auto const& v : c.coalitions)
		coalitions.push_back(optional_number(v));
	return {{"individuals", optional_number(c.individuals)},
	        {"coalitions", coalitions},
	        {"social", round12(c.social)}};
}

inline std::vector<double> rounded(std::span<const double> v)
{
	std::vector<double> out;
	out.reserve(v.size());
	for (double x : v)
		out.push_back(round12(x));
	return out;
}

} // namespace detail

/// Report as JSON, with the scenario that produced it (loads resolved inline).
inline json report_to_json(equilibrium_report const& r, scenario_config const& c, resolved_loads const& loads)
{
	scenario_config echo = c;
	echo.load_path.reset();
	echo.loads = loads.values;
	echo.normalize = false;

	json flows = json::array();
	json weights = json::array();
	for (auto const& x : r.equilibrium.flows)
	{
		flows.push_back(detail::rounded(x.values()));
		weights.push_back(x.mass());
	}
	json per_player = json::array();
	for (auto const& y : r.loads.per_player)
		per_player.push_back(detail::rounded(y));

	json j;
	j["format"] = report_format;
	j["status"] = to_string(r.status);
	j["iterations"] = r.iterations;
	j["vi_gap"] = round12(r.vi_gap);
	j["gap_tolerance"] = r.gap_tolerance;
	j["wardrop_eps"] = round12(r.wardrop_eps);
	j["boundary"] = r.boundary;
	j["weights"] = weights;
	j["flows"] = flows;
	j["loads"] = {{"aggregate", detail::rounded(r.loads.aggregate)}, {"per_player", per_player}};
	j["costs"] = detail::costs_json(r.costs);
	j["reduced_costs"] = r.reduced ? detail::costs_json(*r.reduced) : json(nullptr);
	j["scenario"] = to_json(echo);
	j["metadata"] = {{"load_normalization", loads.normalization}};
	return j;
}

/// Game and equilibrium profile stored in a report.
struct stored_report
{
	scenario_config scenario;
	game_spec game;
	profile equilibrium;
	solve_status status;
	double vi_gap;
	double gap_tolerance;
};

inline stored_report parse_report(json const& j)
{
	try
	{
		if (j.value("format", std::string()) != report_format)
			throw config_error(std::string("report format is not ") + report_format);
		auto scenario = parse_config(j.at("scenario"));
		auto game = build_game(scenario, scenario.loads);
		auto const flows = j.at("flows").get<std::vector<std::vector<double>>>();
		if (flows.size() != game.players())
			throw config_error("report has " + std::to_string(flows.size()) + " flows for " +
			                   std::to_string(game.players()) + " players");
		profile p;
		for (std::size_t i = 0; i < flows.size(); ++i)
			p.flows.emplace_back(flows[i], game.mass(i));
		auto const status = parse_status(j.at("status").get<std::string>());
		if (!status)
			throw config_error("report has an unknown status");
		return stored_report{std::move(scenario),
		                     std::move(game),
		                     std::move(p),
		                     *status,
		                     j.at("vi_gap").get<double>(),
		                     j.at("gap_tolerance").get<double>()};
	}
	catch (json::exception const& e)
	{
		throw config_error(std::string("malformed report: ") + e.what());
	}
	catch (config_error const&)
	{
		throw;
	}
	catch (error const& e)
	{
		throw config_error(std::string("invalid report: ") + e.what());
	}
}

/// t,non_ev,individuals,coalition,total with power-scaled EV loads.
/// non_ev is written exactly so the file can be read back as a load profile.
inline void write_loads_csv(std::ostream& out, game_spec const& spec, load_decomposition const& loads)
{
	out << "t,non_ev,individuals,coalition,total\n";
	double const p = spec.power();
	for (std::size_t t = 0; t < spec.horizon(); ++t)
	{
		double coalition = 0.0;
		for (std::size_t k = 1; k < loads.per_player.size(); ++k)
			coalition += loads.per_player[k][t];
		double const base = spec.base_load()[t];
		out << t + 1 << ',' << format_exact(base) << ',' << format_number(p * loads.per_player[0][t]) << ','
		    << format_number(p * coalition) << ',' << format_number(base + p * loads.aggregate[t]) << '\n';
	}
}

inline void write_sweep_csv(std::ostream& out, sweep_result const& res)
{
	out << "M,x1,x0,cost_individuals,cost_coalition,cost_social,norm_individuals,norm_coalition,norm_social,regime,"
	       "status,vi_gap\n";
	for (auto const& p : res.points)
	{
		out << format_number(p.coalition_size) << ',' << format_number(p.x1) << ',' << format_number(p.x0) << ','
		    << format_number(p.individuals) << ',' << format_number(p.coalition) << ',' << format_number(p.social)
		    << ',' << format_number(p.norm_individuals) << ',' << format_number(p.norm_coalition) << ','
		    << format_number(p.norm_social) << ',' << (p.ok() ? p.regime : "error") << ','
		    << (p.ok() ? to_string(p.status) : "error") << ',' << format_number(p.ok() ? p.vi_gap : NAN) << '\n';
	}
}

/// iteration,gap,p0_s1,...: one column per player and start slot (1-based).
inline void write_trace_csv(std::ostream& out, game_spec const& spec, std::vector<trace_row> const& trace)
{
	out << "iteration,gap";
	for (std::size_t i = 0; i < spec.players(); ++i)
		for (std::size_t s = 0; s < spec.strategies(); ++s)
			out << ",p" << i << "_s" << s + 1;
	out << '\n';
	for (auto const& row : trace)
	{
		out << row.iteration << ',' << format_number(row.gap);
		for (auto const& f : row.flows)
			for (double v : f)
				out << ',' << format_number(v);
		out << '\n';
	}
}

} // namespace evcg
