#pragma once

// diagnostics.csv: header
//   t,E,E_kin,E_pot,M,var_x,dilation,conformal,R1,R2,R1_shell,conc_R<R>...,lq_<q>...
// numbers in shortest round-trip form, empty cells for absent values, LF endings.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpdisp/core_model.hpp"

namespace vpdisp {

class CsvParseError : public std::runtime_error {
 public:
  CsvParseError(const std::string& message, std::size_t row);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Shortest decimal string that parses back to the same double.
std::string format_number(double x);

std::string diagnostics_header(const std::vector<double>& R_grid, const std::vector<double>& q_list);

std::string format_diagnostics_row(const DiagnosticsRecord& rec, const std::vector<double>& R_grid,
                                   const std::vector<double>& q_list);

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records,
                           const std::vector<double>& R_grid, const std::vector<double>& q_list);

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records,
                           const std::vector<double>& R_grid, const std::vector<double>& q_list);

struct DiagnosticsTable {
  std::vector<double> R_grid;
  std::vector<double> q_list;
  std::vector<DiagnosticsRecord> records;
};

/// Parses a diagnostics CSV; rows are numbered from 1 for the header.
DiagnosticsTable read_diagnostics_csv(std::istream& in);
DiagnosticsTable read_diagnostics_csv(const std::filesystem::path& path);

/// Snapshot file: r,w,ell,mass,group.
void write_snapshot_csv(const std::filesystem::path& path, const Ensemble& e);

}  // namespace vpdisp
