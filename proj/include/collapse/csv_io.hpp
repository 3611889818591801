#pragma once

#include "collapse/deterministic.hpp"
#include "collapse/stochastic.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace collapse
{

/// Ordered "# key: value" lines at the top of every output file. The
/// `created` timestamp, when present, is the only non-reproducible line.
struct Metadata
{
	std::vector<std::pair<std::string, std::string>> entries;

	void add(std::string key, std::string value);
	void add(std::string key, double value);
	void add_timestamp();
};

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Matrix written as [[re+imj, ...], ...] for metadata lines.
std::string format_matrix(const Matrix& m);

inline const std::vector<std::string> kDeterministicColumns = {"t", "x", "y", "z", "re_c0",
	"im_c0", "re_c1", "im_c1", "prob0", "prob1", "expA", "norm_drift"};

/// Deterministic trajectory. Amplitudes and Bloch components are expressed
/// in `eigenbasis` (columns: eigenvectors of A, larger eigenvalue first).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
	const Matrix& eigenbasis, const Metadata& meta);

/// Same columns plus the cumulative Wiener path `W`.
void write_stochastic_csv(const std::filesystem::path& path, const StochasticTrajectory& traj,
	const Matrix& eigenbasis, const Metadata& meta);

/// Generic table writer; every row must have header.size() cells.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
	const std::vector<std::vector<std::string>>& rows, const Metadata& meta);

struct CsvTable
{
	std::vector<std::pair<std::string, std::string>> metadata;
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;

	/// Throws ValidationError naming the column when it is absent.
	std::size_t column_index(const std::string& name) const;
	std::vector<double> numeric_column(const std::string& name) const;
	std::vector<std::string> text_column(const std::string& name) const;
	std::string meta(const std::string& key) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}
