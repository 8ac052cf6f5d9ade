// evcg: composite EV charging equilibria from the command line.
//
//   evcg solve          --config scenario.json [--out DIR]
//   evcg sweep          --config scenario.json [--out DIR] [--jobs N]
//   evcg dynamics-trace --config scenario.json [--out DIR]
//   evcg verify         --report DIR/report.json
//   evcg --print-config [--config scenario.json]

#include <evcg/evcg.hpp>
#include <evcg/scenario.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_not_converged = 2;
constexpr int exit_not_certified = 3;

struct global_options
{
	std::string config;
	bool normalize = false;
	std::size_t jobs = 1;
	std::string out;
	bool print_config = false;
};

evcg::scenario_config load_config(global_options const& g)
{
	evcg::scenario_config c = g.config.empty() ? evcg::scenario_config{} : evcg::read_config(g.config);
	if (g.normalize)
		c.normalize = true;
	return c;
}

/// Writes `body` to DIR/name, or to stdout when no --out was given.
template <class Writer>
void emit(global_options const& g, std::string const& name, Writer&& body)
{
	if (g.out.empty())
	{
		body(std::cout);
		return;
	}
	fs::create_directories(g.out);
	fs::path const path = fs::path(g.out) / name;
	std::ofstream f(path);
	if (!f)
		throw evcg::config_error("cannot write '" + path.string() + "'");
	body(f);
	std::cerr << "wrote " << path.string() << '\n';
}

int status_exit(evcg::solve_status s)
{
	return s == evcg::solve_status::max_iter_reached ? exit_not_converged : exit_ok;
}

int run_solve(global_options const& g)
{
	auto const c = load_config(g);
	auto const loads = evcg::resolve_loads(c);
	auto const spec = evcg::build_game(c, loads.values);
	evcg::equilibrium_report r = c.solver == evcg::sweep_solver::analytic ? evcg::solve_three_slot(spec)
	                                                                       : evcg::solve_dynamics(spec, c.dynamics);
	auto const j = evcg::report_to_json(r, c, loads);
	emit(g, "report.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
	if (!g.out.empty())
		emit(g, "loads.csv", [&](std::ostream& os) { evcg::write_loads_csv(os, spec, r.loads); });
	std::cerr << "status " << evcg::to_string(r.status) << ", VI gap " << evcg::format_number(r.vi_gap) << ", "
	          << r.iterations << " iterations\n";
	return status_exit(r.status);
}

int run_sweep(global_options const& g)
{
	auto const c = load_config(g);
	auto const spec = evcg::build_game(c);
	auto grid = c.sweep_grid.value_or(evcg::default_grid());
	auto const res = c.solver == evcg::sweep_solver::analytic
	                     ? evcg::run_sweep(evcg::build_three_slot(spec), grid, evcg::sweep_solver::analytic, c.dynamics,
	                                       g.jobs)
	                     : evcg::run_sweep(spec, grid, c.dynamics, g.jobs);
	emit(g, "sweep.csv", [&](std::ostream& os) { evcg::write_sweep_csv(os, res); });
	for (auto const& a : res.audits)
	{
		std::cerr << (a.pass ? "PASS " : (a.informational ? "INFO " : "FAIL ")) << a.name;
		if (!a.detail.empty())
			std::cerr << " (" << a.detail << ')';
		std::cerr << '\n';
	}
	for (auto const& p : res.points)
	{
		if (!p.ok() || p.status == evcg::solve_status::max_iter_reached)
			return exit_not_converged;
	}
	return exit_ok;
}

int run_trace(global_options const& g)
{
	auto c = load_config(g);
	auto const spec = evcg::build_game(c);
	c.dynamics.record_trace = true;
	auto const r = evcg::solve_dynamics(spec, c.dynamics);
	emit(g, "trace.csv", [&](std::ostream& os) { evcg::write_trace_csv(os, spec, r.trace); });
	std::cerr << "status " << evcg::to_string(r.status) << ", VI gap " << evcg::format_number(r.vi_gap) << ", "
	          << r.iterations << " iterations\n";
	return status_exit(r.status);
}

int run_verify(std::string const& report_path, std::optional<double> tolerance, double wardrop_eps)
{
	std::ifstream in(report_path);
	if (!in)
		throw evcg::config_error("cannot open report '" + report_path + "'");
	evcg::json j;
	try
	{
		in >> j;
	}
	catch (evcg::json::exception const& e)
	{
		throw evcg::config_error("report '" + report_path + "' is not valid JSON: " + e.what());
	}
	auto const stored = evcg::parse_report(j);
	double const tol = tolerance.value_or(stored.gap_tolerance);
	auto const& spec = stored.game;
	auto const& p = stored.equilibrium;

	double const gap = evcg::vi_gap(spec, p);
	// The gap certifies the point; the per-player checks are diagnostics with their
	// own tolerance, since a small gap still allows a little weight on costly slots.
	auto const wardrop = evcg::check_wardrop(spec, p, wardrop_eps);
	evcg::json coalitions = evcg::json::array();
	bool coalitions_ok = true;
	for (std::size_t k = 1; k <= spec.coalitions(); ++k)
	{
		auto const v = evcg::check_coalition_optimality(spec, p, k, wardrop_eps);
		coalitions_ok = coalitions_ok && v.pass;
		coalitions.push_back({{"coalition", k}, {"pass", v.pass}, {"gap", evcg::round12(v.gap)}});
	}
	auto report = evcg::make_report(spec, p, stored.status, 0, tol);
	auto const ordering = evcg::check_cost_ordering(report);

	bool const certified = gap <= tol && (!ordering.applicable || ordering.pass);
	evcg::json out = {
		{"certified", certified},
		{"vi_gap", evcg::round12(gap)},
		{"tolerance", tol},
		{"diagnostics", {{"eps", wardrop_eps}, {"pass", wardrop.pass && coalitions_ok}}},
		{"wardrop", {{"pass", wardrop.pass}}},
		{"coalitions", coalitions},
		{"cost_ordering", {{"applicable", ordering.applicable}, {"pass", ordering.pass}, {"detail", ordering.detail}}},
	};
	if (wardrop.witness)
	{
		out["wardrop"]["witness"] = {{"start", wardrop.witness->start + 1},
		                             {"cost", evcg::round12(wardrop.witness->cost)},
		                             {"min_cost", evcg::round12(wardrop.witness->min_cost)}};
	}
	std::cout << out.dump(2) << '\n';
	return certified ? exit_ok : exit_not_certified;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Composite EV charging games: equilibria, sweeps and certification"};
	app.require_subcommand(0, 1);

	global_options g;
	app.add_option("--config", g.config, "Scenario JSON file")->check(CLI::ExistingFile);
	app.add_flag("--normalize", g.normalize, "Scale the non-EV load so its maximum is 1");
	app.add_option("--jobs", g.jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
	app.add_option("--out", g.out, "Output directory (default: stdout)");
	app.add_flag("--print-config", g.print_config, "Print the resolved configuration and exit");

	auto* solve = app.add_subcommand("solve", "Compute one equilibrium: report.json and loads.csv");
	auto* sweep = app.add_subcommand("sweep", "Solve over a grid of coalition sizes: sweep.csv");
	auto* trace = app.add_subcommand("dynamics-trace", "Per-iteration log of the learning dynamics: trace.csv");
	auto* verify = app.add_subcommand("verify", "Re-check a saved report");
	for (auto* sub : {solve, sweep, trace, verify})
		sub->fallthrough();

	std::string report_path;
	std::optional<double> tolerance;
	double wardrop_eps = 1e-5;
	verify->add_option("--report,report", report_path, "Report JSON written by 'solve'")->required();
	verify->add_option("--tol", tolerance, "Gap tolerance (default: the report's)");
	verify->add_option("--wardrop-eps", wardrop_eps, "Tolerance of the per-player diagnostic checks")
		->capture_default_str();

	CLI11_PARSE(app, argc, argv);

	try
	{
		if (g.print_config)
		{
			std::cout << evcg::to_json(load_config(g)).dump(2) << '\n';
			return exit_ok;
		}
		if (solve->parsed())
			return run_solve(g);
		if (sweep->parsed())
			return run_sweep(g);
		if (trace->parsed())
			return run_trace(g);
		if (verify->parsed())
			return run_verify(report_path, tolerance, wardrop_eps);
		std::cerr << app.help();
		return exit_config;
	}
	catch (evcg::error const& e)
	{
		std::cerr << "error: " << e.what() << '\n';
		return exit_config;
	}
	catch (std::exception const& e)
	{
		std::cerr << "error: " << e.what() << '\n';
		return exit_config;
	}
}
