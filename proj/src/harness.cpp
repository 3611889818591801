#include "collapse/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>

namespace collapse
{

namespace
{

std::string format_state(const StateVector& psi)
{
	std::string s = "[";
	for(Eigen::Index i = 0; i < psi.dim(); ++i)
	{
		if(i)
			s += ", ";
		s += "[" + format_double(psi[i].real()) + ", " + format_double(psi[i].imag()) + "]";
	}
	return s + "]";
}

std::filesystem::path output_path(const ScenarioConfig& cfg, const std::string& suffix)
{
	return std::filesystem::path(cfg.output.dir) / (cfg.output.prefix + suffix + ".csv");
}

std::string optional_cell(const std::optional<double>& v)
{
	return v ? format_double(*v) : "nan";
}

void add_hamiltonian(Metadata& meta, const HamiltonianSpec& spec, bool with_gamma)
{
	meta.add("hbar", 1.0);
	meta.add("omega", spec.omega);
	if(with_gamma)
		meta.add("gamma", spec.gamma);
	meta.add("H0", format_matrix(spec.H0));
	meta.add("A", format_matrix(spec.A));
}

void add_noise(Metadata& meta, const NoiseConfig& noise, double t_end)
{
	meta.add("Gamma", noise.rate);
	meta.add("seed", std::to_string(noise.seed));
	meta.add("scheme", to_string(noise.scheme));
	meta.add("dt", make_grid(t_end, noise.dt).step);
	meta.add("rng", kRngName);
}

std::string describe_collapse(const CollapseReport& c)
{
	if(!c.collapsed)
		return "not collapsed";
	std::ostringstream s;
	s << "collapsed to |" << *c.target_index << "> at t=" << format_double(*c.collapse_time);
	return s.str();
}

}

const std::vector<std::pair<double, double>>& figure1_panels()
{
	static const std::vector<std::pair<double, double>> panels = {
		{0.5, 10.0}, {1.0, 10.0}, {2.0, 10.0}, {100.0, 0.1}};
	return panels;
}

Metadata scenario_metadata(const ScenarioConfig& cfg)
{
	Metadata meta;
	meta.add("tool", std::string(kToolName) + " " + kVersion);
	meta.add("mode", to_string(cfg.mode));
	if(cfg.mode == Mode::figure1)
	{
		meta.add_timestamp();
		return meta;
	}
	add_hamiltonian(meta, cfg.hamiltonian, cfg.mode == Mode::deterministic);
	meta.add("initial", format_state(cfg.initial));
	meta.add("t_end", cfg.t_end);
	meta.add("collapse_epsilon", cfg.collapse_epsilon);
	if(cfg.noise)
		add_noise(meta, *cfg.noise, cfg.t_end);
	else if(cfg.mode == Mode::deterministic)
	{
		meta.add("dt", make_grid(cfg.t_end, cfg.integrator.dt.value_or(default_dt(cfg.hamiltonian))).step);
		meta.add("norm_drift_tolerance", cfg.integrator.norm_drift_tolerance);
	}
	else
	{
		meta.add("dt", cfg.integrator.dt ? format_double(*cfg.integrator.dt) : std::string("auto"));
		meta.add("norm_drift_tolerance", cfg.integrator.norm_drift_tolerance);
	}
	if(cfg.mode == Mode::ensemble)
		meta.add("trajectories", std::to_string(cfg.ensemble.trajectories));
	meta.add("record_stride", std::to_string(cfg.output.record_stride));
	meta.add("basis", "eigenbasis of A, larger eigenvalue first");
	meta.add_timestamp();
	return meta;
}

RunOutput run_deterministic(const ScenarioConfig& cfg)
{
	const auto traj = integrate_deterministic(cfg.initial, cfg.hamiltonian, cfg.integrator);
	const auto eb = to_eigenbasis_of_A(cfg.hamiltonian);
	const auto path = output_path(cfg, "");
	write_trajectory_csv(path, traj, eb.basis, scenario_metadata(cfg));

	const auto regime = classify_regime(cfg.hamiltonian);
	const auto collapse = detect_collapse(traj, cfg.collapse_epsilon);
	const auto& b = traj.bloch.back();
	std::ostringstream s;
	s << "regime: " << to_string(regime.regime) << "\n"
	  << "final bloch: (" << format_double(b.x) << ", " << format_double(b.y) << ", "
	  << format_double(b.z) << ")\n"
	  << "collapse: " << describe_collapse(collapse) << "\n"
	  << "max norm drift: " << format_double(traj.max_norm_drift()) << "\n"
	  << "wrote " << path.string() << "\n";
	return RunOutput{{path}, s.str()};
}

RunOutput run_stochastic(const ScenarioConfig& cfg)
{
	const auto traj = simulate_stochastic(cfg.initial, cfg.hamiltonian, *cfg.noise, cfg.t_end,
		RecordOptions{cfg.output.record_stride, 0});
	const auto eb = to_eigenbasis_of_A(cfg.hamiltonian);
	const auto path = output_path(cfg, "");
	write_stochastic_csv(path, traj, eb.basis, scenario_metadata(cfg));

	const double z_end = z_from_expectation(traj.expA.back(), eb.params.lambda0, eb.params.lambda1);
	std::ostringstream s;
	s << "final z: " << format_double(z_end) << "\n"
	  << "W(t_end): " << format_double(traj.wiener.back()) << "\n"
	  << "wrote " << path.string() << "\n";
	return RunOutput{{path}, s.str()};
}

RunOutput run_ensemble_scenario(const ScenarioConfig& cfg)
{
	EnsembleOptions options;
	options.checkpoints = cfg.ensemble.checkpoints;
	options.epsilon = cfg.collapse_epsilon;
	options.threads = cfg.ensemble.threads;
	const auto result = run_ensemble(cfg.initial, cfg.hamiltonian, *cfg.noise, cfg.t_end,
		cfg.ensemble.trajectories, options);
	const auto& st = result.stats;
	const Metadata meta = scenario_metadata(cfg);
	RunOutput run;

	std::vector<std::vector<std::string>> rows;
	rows.reserve(result.outcomes.size());
	for(const auto& o : result.outcomes)
		rows.push_back({std::to_string(o.index), std::to_string(o.outcome), optional_cell(o.collapse_time),
			format_double(o.final_z)});
	run.files.push_back(output_path(cfg, "_outcomes"));
	write_table_csv(run.files.back(), {"trajectory", "outcome", "collapse_time", "final_z"}, rows, meta);

	const double born_p1 = 1.0 - st.born_p0;
	std::vector<std::vector<std::string>> stats = {
		{"n_trajectories", std::to_string(st.n_trajectories)},
		{"count_to_0", std::to_string(st.count_to_0)},
		{"count_to_1", std::to_string(st.count_to_1)},
		{"count_uncollapsed", std::to_string(st.count_uncollapsed)},
		{"uncollapsed_fraction", format_double(st.uncollapsed_fraction())},
		{"fraction_0", optional_cell(st.fraction_0)},
		{"ci95_low", st.fraction_0_ci95 ? format_double(st.fraction_0_ci95->low) : "nan"},
		{"ci95_high", st.fraction_0_ci95 ? format_double(st.fraction_0_ci95->high) : "nan"},
		{"born_p0", format_double(st.born_p0)},
		{"born_p1", format_double(born_p1)},
		{"born_consistent_3sigma", st.born_consistent() ? "1" : "0"}};
	run.files.push_back(output_path(cfg, "_stats"));
	write_table_csv(run.files.back(), {"key", "value"}, stats, meta);

	if(!st.z_moments.empty())
	{
		std::vector<std::vector<std::string>> moments;
		for(const auto& m : st.z_moments)
			moments.push_back({format_double(m.t), format_double(m.mean), format_double(m.variance),
				format_double(m.se_mean), format_double(m.se_variance)});
		run.files.push_back(output_path(cfg, "_moments"));
		write_table_csv(run.files.back(), {"t", "mean_z", "var_z", "se_mean", "se_var"}, moments, meta);
	}

	std::ostringstream s;
	for(const auto& row : stats)
		s << row[0] << ": " << row[1] << "\n";
	for(const auto& f : run.files)
		s << "wrote " << f.string() << "\n";
	run.summary = s.str();
	return run;
}

RunOutput run_sweep(const ScenarioConfig& cfg)
{
	const auto rows = gamma_sweep(cfg.initial, cfg.hamiltonian.H0, cfg.hamiltonian.A, cfg.hamiltonian.omega,
		cfg.sweep_gammas, cfg.integrator, cfg.collapse_epsilon);
	std::vector<std::vector<std::string>> table;
	std::ostringstream s;
	for(const auto& r : rows)
	{
		table.push_back({format_double(r.gamma), to_string(r.regime.regime),
			format_double(r.regime.eig0.real()), format_double(r.regime.eig0.imag()),
			format_double(r.regime.eig1.real()), format_double(r.regime.eig1.imag()),
			r.collapse.collapsed ? "1" : "0",
			r.collapse.target_index ? std::to_string(*r.collapse.target_index) : "-1",
			optional_cell(r.collapse.collapse_time), format_double(r.final_bloch.x),
			format_double(r.final_bloch.y), format_double(r.final_bloch.z)});
		s << "gamma " << format_double(r.gamma) << ": " << to_string(r.regime.regime) << ", "
		  << describe_collapse(r.collapse) << "\n";
	}
	const auto path = output_path(cfg, "_sweep");
	write_table_csv(path, {"gamma", "regime", "eig0_re", "eig0_im", "eig1_re", "eig1_im", "collapsed",
		"target", "collapse_time", "x", "y", "z"}, table, scenario_metadata(cfg));
	s << "wrote " << path.string() << "\n";
	return RunOutput{{path}, s.str()};
}

Figure1Result run_figure1(const std::filesystem::path& out_dir)
{
	const Vector plus = Vector::Constant(2, 1.0 / std::sqrt(2.0));
	const StateVector initial = normalize(plus);
	Figure1Result result;
	std::vector<std::vector<std::string>> table;
	for(const auto& [gamma, t_end] : figure1_panels())
	{
		const auto spec = HamiltonianSpec::make(1.0, pauli::x(), pauli::z(), gamma);
		IntegratorConfig config;
		config.t_end = t_end;
		const TimeGrid grid = make_grid(t_end, default_dt(spec));
		config.record_stride = std::max<std::size_t>(1, grid.steps / 1000);
		const auto traj = integrate_deterministic(initial, spec, config);

		Metadata meta;
		meta.add("tool", std::string(kToolName) + " " + kVersion);
		meta.add("mode", "figure1");
		add_hamiltonian(meta, spec, true);
		meta.add("initial", format_state(initial));
		meta.add("t_end", t_end);
		meta.add("dt", grid.step);
		meta.add("record_stride", std::to_string(config.record_stride));
		meta.add("basis", "eigenbasis of A, larger eigenvalue first");
		meta.add_timestamp();

		const auto path = out_dir / ("figure1_gamma_" + format_double(gamma) + ".csv");
		write_trajectory_csv(path, traj, pauli::identity(), meta);

		SweepRow row{gamma, classify_regime(spec), detect_collapse(traj), traj.bloch.back()};
		table.push_back({format_double(gamma), to_string(row.regime.regime),
			format_double(row.regime.eig0.real()), format_double(row.regime.eig0.imag()),
			format_double(row.regime.eig1.real()), format_double(row.regime.eig1.imag()),
			row.collapse.collapsed ? "1" : "0",
			row.collapse.target_index ? std::to_string(*row.collapse.target_index) : "-1",
			optional_cell(row.collapse.collapse_time), format_double(row.final_bloch.x),
			format_double(row.final_bloch.y), format_double(row.final_bloch.z), path.filename().string()});
		result.panels.push_back(Figure1Panel{gamma, t_end, row, path});
	}
	Metadata meta;
	meta.add("tool", std::string(kToolName) + " " + kVersion);
	meta.add("mode", "figure1");
	meta.add_timestamp();
	result.summary_csv = out_dir / "figure1_summary.csv";
	write_table_csv(result.summary_csv, {"gamma", "regime", "eig0_re", "eig0_im", "eig1_re", "eig1_im",
		"collapsed", "target", "collapse_time", "x", "y", "z", "file"}, table, meta);
	return result;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
	CLI::App app{"Deterministic non-unitary collapse dynamics and its stochastic coarse-graining",
		kToolName};
	app.require_subcommand(1);
	app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);

	std::string config_path;
	std::string out_dir = ".";
	ConfigOverrides overrides;
	std::optional<Mode> mode;

	auto add_run = [&](const std::string& name, Mode m, const std::string& desc) {
		auto* sub = app.add_subcommand(name, desc);
		sub->add_option("config", config_path, "Scenario file (YAML)")->required();
		sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { overrides.seed = v; },
			"Override noise.seed");
		sub->add_option_function<std::string>("--out-dir", [&](const std::string& v) { overrides.out_dir = v; },
			"Override output.dir");
		sub->add_option_function<double>("--dt", [&](const double& v) { overrides.dt = v; },
			"Override the step size");
		sub->add_option_function<double>("--t-end", [&](const double& v) { overrides.t_end = v; },
			"Override t_end");
		sub->callback([&mode, m] { mode = m; });
	};
	add_run("deterministic", Mode::deterministic, "Integrate the deterministic norm-preserving dynamics");
	add_run("stochastic", Mode::stochastic, "Integrate one CSL trajectory");
	add_run("ensemble", Mode::ensemble, "Run a seeded CSL ensemble and collect Born statistics");
	add_run("sweep", Mode::sweep, "Sweep the coupling gamma");
	auto* fig = app.add_subcommand("figure1", "Reproduce the four-panel sigma_x + i gamma sigma_z experiment");
	fig->add_option("--out-dir", out_dir, "Directory for the CSV files");
	auto* val = app.add_subcommand("validate", "Check a scenario file and report every problem");
	val->add_option("config", config_path, "Scenario file (YAML)")->required();

	try
	{
		app.parse(argc, argv);
	}
	catch(const CLI::CallForHelp&)
	{
		out << app.help();
		return 0;
	}
	catch(const CLI::CallForVersion&)
	{
		out << kToolName << " " << kVersion << "\n";
		return 0;
	}
	catch(const CLI::ParseError& e)
	{
		err << e.what() << "\n" << app.help();
		return 1;
	}

	try
	{
		if(fig->parsed())
		{
			const auto res = run_figure1(out_dir);
			for(const auto& p : res.panels)
				out << "gamma " << format_double(p.gamma) << ": " << to_string(p.row.regime.regime) << ", "
					<< describe_collapse(p.row.collapse) << "  (" << p.csv.string() << ")\n";
			out << "wrote " << res.summary_csv.string() << "\n";
			return 0;
		}
		if(val->parsed())
		{
			const auto cfg = parse_config(config_path);
			out << config_path << ": valid " << to_string(cfg.mode) << " scenario\n";
			return 0;
		}
		const auto cfg = parse_config(config_path, overrides, mode);
		RunOutput run;
		switch(cfg.mode)
		{
		case Mode::deterministic:
			run = run_deterministic(cfg);
			break;
		case Mode::stochastic:
			run = run_stochastic(cfg);
			break;
		case Mode::ensemble:
			run = run_ensemble_scenario(cfg);
			break;
		case Mode::sweep:
			run = run_sweep(cfg);
			break;
		case Mode::figure1:
			run_figure1(cfg.output.dir);
			break;
		}
		out << run.summary;
		return 0;
	}
	catch(const ValidationError& e)
	{
		err << "error: " << e.what() << "\n";
		return 1;
	}
	catch(const NumericalError& e)
	{
		err << "error: " << e.what() << "\n";
		return 2;
	}
	catch(const std::exception& e)
	{
		err << "error: " << e.what() << "\n";
		return 2;
	}
}

}
