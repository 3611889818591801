#pragma once

#include "collapse/analysis.hpp"
#include "collapse/config.hpp"
#include "collapse/csv_io.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace collapse
{

inline constexpr const char* kToolName = "collapse-sim";
inline constexpr const char* kVersion = "0.1.0";

struct RunOutput
{
	std::vector<std::filesystem::path> files;
	std::string summary; ///< human-readable, printed by the CLI
};

/// Version, mode and every parameter that influences the output, followed by
/// the `created` timestamp.
Metadata scenario_metadata(const ScenarioConfig& cfg);

RunOutput run_deterministic(const ScenarioConfig& cfg);
RunOutput run_stochastic(const ScenarioConfig& cfg);
RunOutput run_ensemble_scenario(const ScenarioConfig& cfg);
RunOutput run_sweep(const ScenarioConfig& cfg);

struct Figure1Panel
{
	double gamma;
	double t_end;
	SweepRow row;
	std::filesystem::path csv;
};

struct Figure1Result
{
	std::vector<Figure1Panel> panels;
	std::filesystem::path summary_csv;
};

/// H0 = sigma_x, A = sigma_z, omega = 1, initial |+>, gamma in {0.5, 1, 2, 100}.
/// Writes figure1_gamma_<g>.csv per gamma and figure1_summary.csv.
Figure1Result run_figure1(const std::filesystem::path& out_dir);

/// figure1 command run parameters: (gamma, t_end).
const std::vector<std::pair<double, double>>& figure1_panels();

/// Exit codes: 0 success, 1 validation or usage error, 2 runtime/numerical error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}
