#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dppmix/config.hpp"
#include "dppmix/trace.hpp"

namespace dppmix {

inline constexpr int kTraceFormatVersion = 1;

// Headered comma-separated numeric table.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  // Index of a named column; throws DataError when absent.
  int column(const std::string& name) const;
};

Table read_csv(std::istream& in, const std::string& source = "input");
Table read_csv(const std::filesystem::path& path);

// Response (already multiplied by the configured scale) and covariates; x has
// zero columns when no covariates are mapped.
struct Dataset {
  std::vector<double> y;
  Eigen::MatrixXd x;

  int n() const { return static_cast<int>(y.size()); }
};

Dataset load_dataset(const DataSpec& spec);

// trace.csv: "#" header lines (version, model, n_items, p, truncation, window,
// move counts) then one row per (kept sample, component). labels.csv: one row
// per kept sample with 1-based labels.
void write_trace(const Trace& trace, std::ostream& trace_out, std::ostream& labels_out);
void write_trace(const Trace& trace, const std::filesystem::path& dir);
Trace read_trace(std::istream& trace_in, std::istream& labels_in);
Trace read_trace(const std::filesystem::path& dir);

// "key = value" lines as written to summary files.
std::map<std::string, std::string> read_key_values(std::istream& in);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dppmix
