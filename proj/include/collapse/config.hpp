#pragma once

#include "collapse/deterministic.hpp"
#include "collapse/errors.hpp"
#include "collapse/quantum_core.hpp"
#include "collapse/stochastic.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collapse
{

enum class Mode
{
	deterministic,
	stochastic,
	ensemble,
	sweep,
	figure1
};

const char* to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

/// Every problem found in a config file, not only the first.
class ConfigError : public ValidationError
{
public:
	ConfigError(const std::string& origin, std::vector<std::string> errors);

	const std::vector<std::string>& errors() const { return errors_; }

private:
	std::vector<std::string> errors_;
};

/// Command-line overrides, applied before validation.
struct ConfigOverrides
{
	std::optional<std::uint64_t> seed;
	std::optional<std::string> out_dir;
	std::optional<double> dt;
	std::optional<double> t_end;
};

struct OutputSettings
{
	std::string dir = ".";
	std::string prefix; ///< defaults to the mode name
	std::size_t record_stride = 1;
};

struct EnsembleSettings
{
	std::size_t trajectories = 0;
	std::vector<double> checkpoints;
	unsigned threads = 0;
};

/// A fully validated scenario. See configs/README.md for the schema.
struct ScenarioConfig
{
	Mode mode = Mode::deterministic;
	HamiltonianSpec hamiltonian;
	StateVector initial; ///< computational basis
	double t_end = 0.0;
	IntegratorConfig integrator;
	double collapse_epsilon = kDefaultCollapseEpsilon;
	std::optional<NoiseConfig> noise;
	EnsembleSettings ensemble;
	std::vector<double> sweep_gammas;
	OutputSettings output;
};

/// Parses YAML text. `origin` names the source in error messages.
/// When `expected` is set, a config whose `mode` key disagrees is rejected;
/// a config without `mode` takes `expected`.
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin = "<config>",
	const ConfigOverrides& overrides = {}, std::optional<Mode> expected = std::nullopt);

ScenarioConfig parse_config(const std::filesystem::path& file, const ConfigOverrides& overrides = {},
	std::optional<Mode> expected = std::nullopt);

}
