#include "collapse/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace collapse
{

const char* to_string(Mode m)
{
	switch(m)
	{
	case Mode::deterministic:
		return "deterministic";
	case Mode::stochastic:
		return "stochastic";
	case Mode::ensemble:
		return "ensemble";
	case Mode::sweep:
		return "sweep";
	case Mode::figure1:
		return "figure1";
	}
	return "unknown";
}

std::optional<Mode> parse_mode(std::string_view name)
{
	for(Mode m : {Mode::deterministic, Mode::stochastic, Mode::ensemble, Mode::sweep, Mode::figure1})
		if(name == to_string(m))
			return m;
	return std::nullopt;
}

namespace
{

std::string join_errors(const std::string& origin, const std::vector<std::string>& errors)
{
	std::ostringstream msg;
	msg << origin << ": " << errors.size() << (errors.size() == 1 ? " error" : " errors");
	for(const auto& e : errors)
		msg << "\n  - " << e;
	return msg.str();
}

std::string describe(const YAML::Node& node)
{
	if(node.IsSequence())
		return "a list";
	if(node.IsMap())
		return "a mapping";
	if(node.IsNull())
		return "null";
	if(node.Tag() == "!")
		return "string \"" + node.Scalar() + "\"";
	return "\"" + node.Scalar() + "\"";
}

class Reader
{
public:
	std::vector<std::string> errors;

	void error(const std::string& path, const std::string& msg)
	{
		errors.push_back(path + ": " + msg);
	}

	void check_keys(const YAML::Node& map, const std::string& path,
		std::initializer_list<std::string_view> allowed)
	{
		for(const auto& kv : map)
		{
			const std::string key = kv.first.Scalar();
			if(std::find(allowed.begin(), allowed.end(), key) == allowed.end())
				error(path.empty() ? key : path + "." + key, "unknown key");
		}
	}

	bool is_map(const YAML::Node& node, const std::string& path)
	{
		if(!node.IsMap())
		{
			error(path, "expected a mapping, got " + describe(node));
			return false;
		}
		return true;
	}

	// Quoted scalars carry the non-specific tag "!" and are strings.
	bool is_plain_scalar(const YAML::Node& node) const
	{
		return node.IsScalar() && node.Tag() != "!";
	}

	std::optional<double> number(const YAML::Node& node, const std::string& path)
	{
		if(is_plain_scalar(node))
		{
			try
			{
				const double v = node.as<double>();
				if(std::isfinite(v))
					return v;
			}
			catch(const YAML::Exception&)
			{
			}
		}
		error(path, "type error: expected a number, got " + describe(node));
		return std::nullopt;
	}

	std::optional<std::uint64_t> unsigned_int(const YAML::Node& node, const std::string& path)
	{
		if(is_plain_scalar(node) && !node.Scalar().empty() && node.Scalar().front() != '-')
		{
			try
			{
				return node.as<std::uint64_t>();
			}
			catch(const YAML::Exception&)
			{
			}
		}
		error(path, "type error: expected a non-negative integer, got " + describe(node));
		return std::nullopt;
	}

	std::optional<std::string> text(const YAML::Node& node, const std::string& path)
	{
		if(node.IsScalar())
			return node.Scalar();
		error(path, "type error: expected a string, got " + describe(node));
		return std::nullopt;
	}

	std::optional<std::vector<double>> numbers(const YAML::Node& node, const std::string& path)
	{
		if(!node.IsSequence())
		{
			error(path, "type error: expected a list of numbers, got " + describe(node));
			return std::nullopt;
		}
		std::vector<double> out;
		bool ok = true;
		for(std::size_t i = 0; i < node.size(); ++i)
		{
			auto v = number(node[i], path + "[" + std::to_string(i) + "]");
			if(v)
				out.push_back(*v);
			else
				ok = false;
		}
		if(!ok)
			return std::nullopt;
		return out;
	}

	// A number, or [re, im].
	std::optional<cx_double> complex(const YAML::Node& node, const std::string& path)
	{
		if(node.IsSequence())
		{
			if(node.size() != 2)
			{
				error(path, "complex entries are written [re, im]");
				return std::nullopt;
			}
			auto re = number(node[0], path + ".re");
			auto im = number(node[1], path + ".im");
			if(re && im)
				return cx_double(*re, *im);
			return std::nullopt;
		}
		if(auto v = number(node, path))
			return cx_double(*v, 0.0);
		return std::nullopt;
	}

	// Named Pauli matrix or a list of rows.
	std::optional<Matrix> matrix(const YAML::Node& node, const std::string& path)
	{
		if(node.IsScalar())
		{
			const std::string name = node.Scalar();
			if(name == "sigma_x")
				return pauli::x();
			if(name == "sigma_y")
				return pauli::y();
			if(name == "sigma_z")
				return pauli::z();
			if(name == "identity")
				return pauli::identity();
			if(name == "zero")
				return Matrix::Zero(2, 2);
			error(path, "unknown matrix name \"" + name +
				"\" (expected sigma_x, sigma_y, sigma_z, identity, zero, or a list of rows)");
			return std::nullopt;
		}
		if(!node.IsSequence() || node.size() == 0)
		{
			error(path, "type error: expected a matrix, got " + describe(node));
			return std::nullopt;
		}
		const std::size_t n = node.size();
		Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
		bool ok = true;
		for(std::size_t i = 0; i < n; ++i)
		{
			const std::string row_path = path + "[" + std::to_string(i) + "]";
			if(!node[i].IsSequence() || node[i].size() != n)
			{
				error(row_path, "matrix must be square with " + std::to_string(n) + " entries per row");
				ok = false;
				continue;
			}
			for(std::size_t j = 0; j < n; ++j)
			{
				auto c = complex(node[i][j], row_path + "[" + std::to_string(j) + "]");
				if(c)
					m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *c;
				else
					ok = false;
			}
		}
		if(!ok)
			return std::nullopt;
		return m;
	}
};

std::set<std::string> sections_for(Mode mode)
{
	switch(mode)
	{
	case Mode::deterministic:
		return {"mode", "hamiltonian", "initial", "t_end", "integrator", "collapse", "output"};
	case Mode::stochastic:
		return {"mode", "hamiltonian", "initial", "t_end", "noise", "collapse", "output"};
	case Mode::ensemble:
		return {"mode", "hamiltonian", "initial", "t_end", "noise", "collapse", "ensemble", "output"};
	case Mode::sweep:
		return {"mode", "hamiltonian", "initial", "t_end", "integrator", "collapse", "sweep", "output"};
	case Mode::figure1:
		return {"mode", "output"};
	}
	return {};
}

std::optional<StateVector> named_state(const std::string& name)
{
	const double s = 1.0 / std::sqrt(2.0);
	const cx_double I(0.0, 1.0);
	Vector v(2);
	if(name == "zero")
		v << 1.0, 0.0;
	else if(name == "one")
		v << 0.0, 1.0;
	else if(name == "plus")
		v << s, s;
	else if(name == "minus")
		v << s, -s;
	else if(name == "plus_i")
		v << s, I * s;
	else if(name == "minus_i")
		v << s, -I * s;
	else
		return std::nullopt;
	return normalize(v);
}

}

ConfigError::ConfigError(const std::string& origin, std::vector<std::string> errors)
	: ValidationError(join_errors(origin, errors)), errors_{std::move(errors)}
{
}

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin,
	const ConfigOverrides& overrides, std::optional<Mode> expected)
{
	YAML::Node root;
	try
	{
		root = YAML::Load(text);
	}
	catch(const YAML::ParserException& e)
	{
		throw ConfigError(origin, {"syntax error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg});
	}
	if(root.IsNull())
		root = YAML::Node(YAML::NodeType::Map);

	Reader r;
	ScenarioConfig cfg;
	if(!root.IsMap())
		throw ConfigError(origin, {"top level must be a mapping of sections"});

	// mode
	cfg.mode = expected.value_or(Mode::deterministic);
	if(root["mode"])
	{
		if(auto name = r.text(root["mode"], "mode"))
		{
			auto m = parse_mode(*name);
			if(!m)
				r.error("mode", "unknown mode \"" + *name + "\"");
			else if(expected && *m != *expected)
				r.error("mode", std::string("config is for mode \"") + to_string(*m) +
					"\" but was run as \"" + to_string(*expected) + "\"");
			else
				cfg.mode = *m;
		}
	}
	const Mode mode = cfg.mode;
	const bool noisy = mode == Mode::stochastic || mode == Mode::ensemble;

	const auto allowed = sections_for(mode);
	for(const auto& kv : root)
	{
		const std::string key = kv.first.Scalar();
		if(allowed.count(key) == 0)
		{
			const bool known = sections_for(Mode::ensemble).count(key) || sections_for(Mode::sweep).count(key) ||
				sections_for(Mode::deterministic).count(key);
			r.error(key, known ? std::string("section not used in ") + to_string(mode) + " mode" : "unknown key");
		}
	}

	// output (all modes)
	cfg.output.prefix = to_string(mode);
	if(const YAML::Node out = root["output"]; out && r.is_map(out, "output"))
	{
		r.check_keys(out, "output", {"dir", "prefix", "record_stride"});
		if(out["dir"])
			if(auto v = r.text(out["dir"], "output.dir"))
				cfg.output.dir = *v;
		if(out["prefix"])
			if(auto v = r.text(out["prefix"], "output.prefix"))
				cfg.output.prefix = *v;
		if(out["record_stride"])
			if(auto v = r.unsigned_int(out["record_stride"], "output.record_stride"))
			{
				if(*v < 1)
					r.error("output.record_stride", "must be at least 1");
				else
					cfg.output.record_stride = static_cast<std::size_t>(*v);
			}
	}
	if(overrides.out_dir)
		cfg.output.dir = *overrides.out_dir;
	cfg.integrator.record_stride = cfg.output.record_stride;

	if(mode == Mode::figure1)
	{
		if(!r.errors.empty())
			throw ConfigError(origin, r.errors);
		return cfg;
	}

	// hamiltonian
	std::optional<Matrix> H0, A;
	std::optional<double> omega = 1.0, gamma;
	double degeneracy_tolerance = kDefaultDegeneracyTolerance;
	if(const YAML::Node h = root["hamiltonian"]; !h)
		r.error("hamiltonian", "missing required section");
	else if(r.is_map(h, "hamiltonian"))
	{
		r.check_keys(h, "hamiltonian", {"omega", "H0", "A", "gamma", "degeneracy_tolerance"});
		if(h["omega"])
			omega = r.number(h["omega"], "hamiltonian.omega");
		if(h["H0"])
			H0 = r.matrix(h["H0"], "hamiltonian.H0");
		else
			r.error("hamiltonian.H0", "missing required field");
		if(h["A"])
			A = r.matrix(h["A"], "hamiltonian.A");
		else
			r.error("hamiltonian.A", "missing required field");
		if(h["gamma"])
		{
			if(mode != Mode::deterministic)
				r.error("hamiltonian.gamma", std::string("not used in ") + to_string(mode) +
					" mode" + (mode == Mode::sweep ? " (use sweep.gammas)" : " (noise.Gamma sets the collapse rate)"));
			else
				gamma = r.number(h["gamma"], "hamiltonian.gamma");
		}
		else if(mode == Mode::deterministic)
			r.error("hamiltonian.gamma", "missing required field");
		if(h["degeneracy_tolerance"])
			if(auto v = r.number(h["degeneracy_tolerance"], "hamiltonian.degeneracy_tolerance"))
			{
				if(*v < 0.0)
					r.error("hamiltonian.degeneracy_tolerance", "must be non-negative");
				else
					degeneracy_tolerance = *v;
			}
	}
	bool spec_ok = false;
	if(H0 && A && omega)
	{
		auto problems = validate_hamiltonian(*H0, *A, degeneracy_tolerance);
		if(problems.empty() && A->rows() != 2)
			problems.emplace_back("only two-level (2x2) systems can be simulated");
		for(const auto& p : problems)
			r.error("hamiltonian", p);
		if(problems.empty())
		{
			cfg.hamiltonian = HamiltonianSpec{*omega, *H0, *A, gamma.value_or(0.0)};
			spec_ok = true;
		}
	}

	// initial state
	if(const YAML::Node init = root["initial"]; !init)
		r.error("initial", "missing required section");
	else if(r.is_map(init, "initial"))
	{
		r.check_keys(init, "initial", {"state", "amplitudes", "bloch"});
		const int given = (init["state"] ? 1 : 0) + (init["amplitudes"] ? 1 : 0) + (init["bloch"] ? 1 : 0);
		if(given != 1)
			r.error("initial", "give exactly one of state, amplitudes, bloch");
		else if(init["state"])
		{
			if(auto name = r.text(init["state"], "initial.state"))
			{
				if(auto s = named_state(*name))
					cfg.initial = *s;
				else
					r.error("initial.state", "unknown state \"" + *name +
						"\" (expected zero, one, plus, minus, plus_i, minus_i)");
			}
		}
		else if(init["amplitudes"])
		{
			const YAML::Node amps = init["amplitudes"];
			if(!amps.IsSequence() || amps.size() != 2)
				r.error("initial.amplitudes", "expected a list of 2 complex amplitudes");
			else
			{
				Vector v(2);
				bool ok = true;
				for(std::size_t i = 0; i < 2; ++i)
				{
					auto c = r.complex(amps[i], "initial.amplitudes[" + std::to_string(i) + "]");
					if(c)
						v(static_cast<Eigen::Index>(i)) = *c;
					else
						ok = false;
				}
				if(ok)
				{
					try
					{
						cfg.initial = normalize(v);
					}
					catch(const ValidationError& e)
					{
						r.error("initial.amplitudes", e.what());
					}
				}
			}
		}
		else
		{
			auto b = r.numbers(init["bloch"], "initial.bloch");
			if(b && b->size() != 3)
				r.error("initial.bloch", "expected [x, y, z]");
			else if(b)
			{
				const BlochVector v{(*b)[0], (*b)[1], (*b)[2]};
				if(std::abs(v.norm() - 1.0) > 1e-8)
					r.error("initial.bloch", "must have unit length (pure state)");
				else if(spec_ok)
				{
					// given in the eigenbasis of A, like all Bloch output
					const auto eb = to_eigenbasis_of_A(cfg.hamiltonian, degeneracy_tolerance);
					cfg.initial = normalize(eb.basis * bloch_to_state(v).amplitudes());
				}
			}
		}
	}

	// t_end
	std::optional<double> t_end;
	if(root["t_end"])
		t_end = r.number(root["t_end"], "t_end");
	if(overrides.t_end)
		t_end = overrides.t_end;
	if(!root["t_end"] && !overrides.t_end)
		r.error("t_end", "missing required field");
	else if(t_end && !(*t_end > 0.0))
		r.error("t_end", "must be positive");
	else if(t_end)
		cfg.t_end = *t_end;
	cfg.integrator.t_end = cfg.t_end;

	// integrator
	if(const YAML::Node in = root["integrator"]; in && r.is_map(in, "integrator"))
	{
		r.check_keys(in, "integrator", {"dt", "norm_drift_tolerance"});
		if(in["dt"])
			cfg.integrator.dt = r.number(in["dt"], "integrator.dt");
		if(in["norm_drift_tolerance"])
			if(auto v = r.number(in["norm_drift_tolerance"], "integrator.norm_drift_tolerance"))
				cfg.integrator.norm_drift_tolerance = *v;
	}
	if(overrides.dt && !noisy)
		cfg.integrator.dt = overrides.dt;
	if(cfg.integrator.dt && !(*cfg.integrator.dt > 0.0))
		r.error("integrator.dt", "must be positive");
	if(!(cfg.integrator.norm_drift_tolerance > 0.0))
		r.error("integrator.norm_drift_tolerance", "must be positive");

	// collapse
	if(const YAML::Node c = root["collapse"]; c && r.is_map(c, "collapse"))
	{
		r.check_keys(c, "collapse", {"epsilon"});
		if(c["epsilon"])
			if(auto v = r.number(c["epsilon"], "collapse.epsilon"))
			{
				if(!(*v > 0.0 && *v < 1.0))
					r.error("collapse.epsilon", "must lie in (0, 1)");
				else
					cfg.collapse_epsilon = *v;
			}
	}

	// noise
	if(noisy)
	{
		NoiseConfig noise;
		bool have_seed = false;
		if(const YAML::Node n = root["noise"]; !n)
			r.error("noise", "missing required section");
		else if(r.is_map(n, "noise"))
		{
			r.check_keys(n, "noise", {"Gamma", "seed", "scheme", "dt"});
			if(n["Gamma"])
			{
				if(auto v = r.number(n["Gamma"], "noise.Gamma"))
				{
					if(*v < 0.0)
						r.error("noise.Gamma", "must be non-negative");
					noise.rate = *v;
				}
			}
			else
				r.error("noise.Gamma", "missing required field");
			if(n["seed"])
			{
				if(auto v = r.unsigned_int(n["seed"], "noise.seed"))
					noise.seed = *v;
				have_seed = true;
			}
			if(n["scheme"])
			{
				if(auto v = r.text(n["scheme"], "noise.scheme"))
				{
					if(*v == "ito" || *v == "ito_eq15")
						noise.scheme = Scheme::ito;
					else if(*v == "stratonovich" || *v == "stratonovich_eq14")
						noise.scheme = Scheme::stratonovich;
					else
						r.error("noise.scheme", "unknown scheme \"" + *v + "\" (expected ito or stratonovich)");
				}
			}
			if(n["dt"])
				if(auto v = r.number(n["dt"], "noise.dt"))
					noise.dt = *v;
		}
		if(overrides.seed)
		{
			noise.seed = *overrides.seed;
			have_seed = true;
		}
		if(!have_seed && root["noise"])
			r.error("noise.seed", "missing required field");
		if(overrides.dt)
			noise.dt = *overrides.dt;
		if(!(noise.dt > 0.0))
			r.error("noise.dt", "must be positive");
		cfg.noise = noise;
	}

	// ensemble
	if(mode == Mode::ensemble)
	{
		if(const YAML::Node e = root["ensemble"]; !e)
			r.error("ensemble", "missing required section");
		else if(r.is_map(e, "ensemble"))
		{
			r.check_keys(e, "ensemble", {"trajectories", "checkpoints", "threads"});
			if(e["trajectories"])
			{
				if(auto v = r.unsigned_int(e["trajectories"], "ensemble.trajectories"))
				{
					if(*v < 1)
						r.error("ensemble.trajectories", "must be at least 1");
					cfg.ensemble.trajectories = static_cast<std::size_t>(*v);
				}
			}
			else
				r.error("ensemble.trajectories", "missing required field");
			if(e["checkpoints"])
				if(auto v = r.numbers(e["checkpoints"], "ensemble.checkpoints"))
				{
					for(double t : *v)
						if(t < 0.0 || (cfg.t_end > 0.0 && t > cfg.t_end))
							r.error("ensemble.checkpoints", "checkpoints must lie in [0, t_end]");
					cfg.ensemble.checkpoints = *v;
					std::sort(cfg.ensemble.checkpoints.begin(), cfg.ensemble.checkpoints.end());
				}
			if(e["threads"])
				if(auto v = r.unsigned_int(e["threads"], "ensemble.threads"))
					cfg.ensemble.threads = static_cast<unsigned>(*v);
		}
	}

	// sweep
	if(mode == Mode::sweep)
	{
		if(const YAML::Node s = root["sweep"]; !s)
			r.error("sweep", "missing required section");
		else if(r.is_map(s, "sweep"))
		{
			r.check_keys(s, "sweep", {"gammas"});
			if(!s["gammas"])
				r.error("sweep.gammas", "missing required field");
			else if(auto v = r.numbers(s["gammas"], "sweep.gammas"))
			{
				if(v->empty())
					r.error("sweep.gammas", "must not be empty");
				cfg.sweep_gammas = *v;
			}
		}
	}

	if(!r.errors.empty())
		throw ConfigError(origin, r.errors);
	return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& file, const ConfigOverrides& overrides,
	std::optional<Mode> expected)
{
	std::ifstream in(file);
	if(!in)
		throw ConfigError(file.string(), {"cannot open file"});
	std::stringstream buffer;
	buffer << in.rdbuf();
	return parse_config_text(buffer.str(), file.string(), overrides, expected);
}

}
