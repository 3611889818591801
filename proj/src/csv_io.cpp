#include "collapse/csv_io.hpp"

#include "collapse/errors.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace collapse
{

namespace
{

std::ofstream open_output(const std::filesystem::path& path)
{
	if(path.has_parent_path())
	{
		std::error_code ec;
		std::filesystem::create_directories(path.parent_path(), ec);
		if(ec)
			throw NumericalError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
	}
	std::ofstream out(path, std::ios::binary);
	if(!out)
		throw NumericalError("cannot open " + path.string() + " for writing");
	return out;
}

void write_metadata(std::ostream& out, const Metadata& meta)
{
	for(const auto& [k, v] : meta.entries)
		out << "# " << k << ": " << v << '\n';
}

void write_row(std::ostream& out, const std::vector<std::string>& cells)
{
	for(std::size_t i = 0; i < cells.size(); ++i)
	{
		if(i)
			out << ',';
		out << cells[i];
	}
	out << '\n';
}

std::vector<std::string> state_cells(double t, const Vector& amp_eig, double expA, double drift)
{
	const cx_double c0 = amp_eig(0);
	const cx_double c1 = amp_eig(1);
	const cx_double r01 = c0 * std::conj(c1);
	return {format_double(t), format_double(2.0 * r01.real()), format_double(-2.0 * r01.imag()),
		format_double(std::norm(c0) - std::norm(c1)), format_double(c0.real()), format_double(c0.imag()),
		format_double(c1.real()), format_double(c1.imag()), format_double(std::norm(c0)),
		format_double(std::norm(c1)), format_double(expA), format_double(drift)};
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
	out.flush();
	if(!out)
		throw NumericalError("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line)
{
	std::vector<std::string> cells;
	std::string cell;
	std::istringstream in(line);
	while(std::getline(in, cell, ','))
		cells.push_back(cell);
	if(!line.empty() && line.back() == ',')
		cells.emplace_back();
	return cells;
}

}

void Metadata::add(std::string key, std::string value)
{
	entries.emplace_back(std::move(key), std::move(value));
}

void Metadata::add(std::string key, double value)
{
	entries.emplace_back(std::move(key), format_double(value));
}

void Metadata::add_timestamp()
{
	const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
	char buf[32];
	std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
	add("created", std::string(buf));
}

std::string format_double(double v)
{
	if(v == 0.0)
		v = 0.0; // drop the sign of -0
	char buf[64];
	const auto res = std::to_chars(buf, buf + sizeof buf, v);
	return std::string(buf, res.ptr);
}

std::string format_matrix(const Matrix& m)
{
	std::string s = "[";
	for(Eigen::Index i = 0; i < m.rows(); ++i)
	{
		s += i ? ", [" : "[";
		for(Eigen::Index j = 0; j < m.cols(); ++j)
		{
			if(j)
				s += ", ";
			s += format_double(m(i, j).real());
			if(m(i, j).imag() != 0.0)
				s += (m(i, j).imag() < 0.0 ? "" : "+") + format_double(m(i, j).imag()) + "j";
		}
		s += "]";
	}
	return s + "]";
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
	const Matrix& eigenbasis, const Metadata& meta)
{
	auto out = open_output(path);
	write_metadata(out, meta);
	write_row(out, kDeterministicColumns);
	const Matrix to_eig = eigenbasis.adjoint();
	for(std::size_t k = 0; k < traj.size(); ++k)
		write_row(out, state_cells(traj.times[k], to_eig * traj.states[k].amplitudes(), traj.expA[k],
			traj.norm_drift[k]));
	finish(out, path);
}

void write_stochastic_csv(const std::filesystem::path& path, const StochasticTrajectory& traj,
	const Matrix& eigenbasis, const Metadata& meta)
{
	auto out = open_output(path);
	write_metadata(out, meta);
	auto header = kDeterministicColumns;
	header.emplace_back("W");
	write_row(out, header);
	const Matrix to_eig = eigenbasis.adjoint();
	for(std::size_t k = 0; k < traj.size(); ++k)
	{
		auto cells = state_cells(traj.times[k], to_eig * traj.states[k].amplitudes(), traj.expA[k],
			traj.norm_error[k]);
		cells.push_back(format_double(traj.wiener[k]));
		write_row(out, cells);
	}
	finish(out, path);
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
	const std::vector<std::vector<std::string>>& rows, const Metadata& meta)
{
	auto out = open_output(path);
	write_metadata(out, meta);
	write_row(out, header);
	for(const auto& row : rows)
	{
		if(row.size() != header.size())
			throw NumericalError("row width does not match header in " + path.string());
		write_row(out, row);
	}
	finish(out, path);
}

std::size_t CsvTable::column_index(const std::string& name) const
{
	for(std::size_t i = 0; i < header.size(); ++i)
		if(header[i] == name)
			return i;
	throw ValidationError("missing column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const
{
	const std::size_t c = column_index(name);
	std::vector<double> out;
	out.reserve(rows.size());
	for(const auto& row : rows)
	{
		double v = 0.0;
		const std::string& cell = row.at(c);
		const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
		if(res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
			throw ValidationError("column '" + name + "' has non-numeric cell \"" + cell + "\"");
		out.push_back(v);
	}
	return out;
}

std::vector<std::string> CsvTable::text_column(const std::string& name) const
{
	const std::size_t c = column_index(name);
	std::vector<std::string> out;
	out.reserve(rows.size());
	for(const auto& row : rows)
		out.push_back(row.at(c));
	return out;
}

std::string CsvTable::meta(const std::string& key) const
{
	for(const auto& [k, v] : metadata)
		if(k == key)
			return v;
	throw ValidationError("missing metadata key '" + key + "'");
}

CsvTable read_csv(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if(!in)
		throw NumericalError("cannot open " + path.string());
	CsvTable table;
	std::string line;
	bool have_header = false;
	while(std::getline(in, line))
	{
		if(line.empty())
			continue;
		if(line.front() == '#')
		{
			const auto colon = line.find(": ");
			if(colon != std::string::npos && line.size() > 2)
				table.metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
			continue;
		}
		auto cells = split(line);
		if(!have_header)
		{
			table.header = std::move(cells);
			have_header = true;
			continue;
		}
		if(cells.size() != table.header.size())
			throw ValidationError(path.string() + ": row width does not match header");
		table.rows.push_back(std::move(cells));
	}
	if(!have_header)
		throw ValidationError(path.string() + ": no header row");
	return table;
}

}
