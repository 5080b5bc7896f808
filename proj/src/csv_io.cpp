#include "vpdisp/csv_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace vpdisp {

CsvParseError::CsvParseError(const std::string& message, std::size_t row)
    : std::runtime_error("row " + std::to_string(row) + ": " + message), row_(row) {}

std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

namespace {

const std::vector<std::string> kFixedColumns = {"t",         "E",         "E_kin", "E_pot", "M",  "var_x",
                                                "dilation",  "conformal", "R1",    "R2",    "R1_shell"};

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; }

std::optional<double> find_value(const std::vector<std::pair<double, double>>& pairs, double key) {
  for (const auto& [k, v] : pairs)
    if (k == key) return v;
  return std::nullopt;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::optional<double> parse_cell(const std::string& s, std::size_t row, const std::string& column) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw CsvParseError("column `" + column + "`: malformed number `" + s + "`", row);
  return v;
}

double required(const std::optional<double>& v, std::size_t row, const std::string& column) {
  if (!v) throw CsvParseError("column `" + column + "` must not be empty", row);
  return *v;
}

}  // namespace

std::string diagnostics_header(const std::vector<double>& R_grid, const std::vector<double>& q_list) {
  std::string h;
  for (std::size_t i = 0; i < kFixedColumns.size(); ++i) {
    if (i) h += ',';
    h += kFixedColumns[i];
  }
  for (double R : R_grid) h += ",conc_R" + format_number(R);
  for (double q : q_list) h += ",lq_" + format_number(q);
  return h;
}

std::string format_diagnostics_row(const DiagnosticsRecord& rec, const std::vector<double>& R_grid,
                                   const std::vector<double>& q_list) {
  std::string row = format_number(rec.time);
  const auto add = [&row](const std::string& s) {
    row += ',';
    row += s;
  };
  add(format_number(rec.energy_total));
  add(cell(rec.energy_kinetic));
  add(cell(rec.energy_potential));
  add(format_number(rec.mass));
  add(format_number(rec.variance));
  add(cell(rec.dilation_moment));
  add(cell(rec.conformal_moment));
  add(format_number(rec.inner_radius));
  add(format_number(rec.outer_radius));
  add(cell(rec.inner_radius_shell));
  for (double R : R_grid) add(cell(find_value(rec.concentration, R)));
  for (double q : q_list) add(cell(find_value(rec.lq_norms, q)));
  return row;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records,
                           const std::vector<double>& R_grid, const std::vector<double>& q_list) {
  out << diagnostics_header(R_grid, q_list) << '\n';
  for (const auto& rec : records) out << format_diagnostics_row(rec, R_grid, q_list) << '\n';
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records,
                           const std::vector<double>& R_grid, const std::vector<double>& q_list) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_diagnostics_csv(out, records, R_grid, q_list);
}

DiagnosticsTable read_diagnostics_csv(std::istream& in) {
  DiagnosticsTable table;
  std::string line;
  if (!std::getline(in, line)) throw CsvParseError("missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < kFixedColumns.size())
    throw CsvParseError("header has " + std::to_string(header.size()) + " columns, expected at least " +
                            std::to_string(kFixedColumns.size()),
                        1);
  for (std::size_t i = 0; i < kFixedColumns.size(); ++i)
    if (header[i] != kFixedColumns[i])
      throw CsvParseError("column " + std::to_string(i + 1) + " is `" + header[i] + "`, expected `" +
                              kFixedColumns[i] + "`",
                          1);
  enum class Kind { conc, lq };
  std::vector<std::pair<Kind, double>> extra;
  for (std::size_t i = kFixedColumns.size(); i < header.size(); ++i) {
    const std::string& name = header[i];
    const auto parse_suffix = [&](std::size_t skip) {
      const std::string s = name.substr(skip);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw CsvParseError("malformed column name `" + name + "`", 1);
      return v;
    };
    if (name.rfind("conc_R", 0) == 0) {
      extra.emplace_back(Kind::conc, parse_suffix(6));
      table.R_grid.push_back(extra.back().second);
    } else if (name.rfind("lq_", 0) == 0) {
      extra.emplace_back(Kind::lq, parse_suffix(3));
      table.q_list.push_back(extra.back().second);
    } else {
      throw CsvParseError("unexpected column `" + name + "`", 1);
    }
  }

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw CsvParseError("expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(cells.size()),
                          row);
    std::vector<std::optional<double>> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) v[i] = parse_cell(cells[i], row, header[i]);
    DiagnosticsRecord rec;
    rec.time = required(v[0], row, "t");
    rec.energy_total = required(v[1], row, "E");
    rec.energy_kinetic = v[2];
    rec.energy_potential = v[3];
    rec.mass = required(v[4], row, "M");
    rec.variance = required(v[5], row, "var_x");
    rec.dilation_moment = v[6];
    rec.conformal_moment = v[7];
    rec.inner_radius = required(v[8], row, "R1");
    rec.outer_radius = required(v[9], row, "R2");
    rec.inner_radius_shell = v[10];
    for (std::size_t j = 0; j < extra.size(); ++j) {
      const auto& val = v[kFixedColumns.size() + j];
      if (!val) continue;
      auto& target = extra[j].first == Kind::conc ? rec.concentration : rec.lq_norms;
      target.emplace_back(extra[j].second, *val);
    }
    if (!table.records.empty() && !(rec.time > table.records.back().time))
      throw CsvParseError("time column is not strictly increasing", row);
    table.records.push_back(std::move(rec));
  }
  return table;
}

DiagnosticsTable read_diagnostics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvParseError("cannot open " + path.string(), 0);
  return read_diagnostics_csv(in);
}

void write_snapshot_csv(const std::filesystem::path& path, const Ensemble& e) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "r,w,ell,mass,group\n";
  for (Eigen::Index i = 0; i < e.size(); ++i)
    out << format_number(e.r[i]) << ',' << format_number(e.w[i]) << ',' << format_number(e.ell[i]) << ','
        << format_number(e.mass[i]) << ',' << group_name(e.group[static_cast<std::size_t>(i)]) << '\n';
}

}  // namespace vpdisp
