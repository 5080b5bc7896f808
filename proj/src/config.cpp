#include "vpdisp/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vpdisp/errors.hpp"

namespace vpdisp {

ConfigError::ConfigError(const std::string& message, std::string field, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      field_(std::move(field)),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

ConfigMap ConfigMap::parse(std::string_view text) {
  ConfigMap map;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected `key = value`", {}, line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("missing key before `=`", {}, line_no);
    if (map.find(key)) throw ConfigError("duplicate key `" + key + "`", key, line_no);
    map.entries_.push_back({key, value, line_no});
    if (end == text.size()) break;
  }
  return map;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const ConfigEntry* ConfigMap::find(std::string_view key) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.key == key; });
  return it == entries_.end() ? nullptr : &*it;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  for (auto& e : entries_)
    if (e.key == key) {
      e.value = value;
      return;
    }
  entries_.push_back({key, value, 0});
}

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::shell:
      return "shell";
    case Scenario::core:
      return "core";
    case Scenario::shell_plus_core:
      return "shell_plus_core";
    case Scenario::kurth:
      break;
  }
  return "kurth";
}

double parse_number(std::string_view text) {
  text = trim(text);
  const auto parse_plain = [](std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
      throw DomainError("not a number: `" + std::string(s) + "`");
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double den = parse_plain(text.substr(slash + 1));
    if (den == 0.0) throw DomainError("zero denominator in `" + std::string(text) + "`");
    return parse_plain(text.substr(0, slash)) / den;
  }
  return parse_plain(text);
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    out.push_back(parse_number(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

namespace {

using Setter = std::function<void(RunConfig&, std::string_view)>;

double number(std::string_view v) { return parse_number(v); }

int count(std::string_view v) {
  const double x = parse_number(v);
  if (x != std::floor(x) || x < 0 || x > 1e9) throw DomainError("expected a non-negative integer");
  return static_cast<int>(x);
}

bool boolean(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DomainError("expected true or false");
}

struct KeySpec {
  Setter apply;
  bool scalar;
};

const std::map<std::string, KeySpec, std::less<>>& key_table() {
  static const std::map<std::string, KeySpec, std::less<>> table = {
      {"scenario",
       {[](RunConfig& c, std::string_view v) {
          if (v == "shell")
            c.scenario = Scenario::shell;
          else if (v == "core")
            c.scenario = Scenario::core;
          else if (v == "shell_plus_core")
            c.scenario = Scenario::shell_plus_core;
          else if (v == "kurth")
            c.scenario = Scenario::kurth;
          else
            throw DomainError("expected shell, core, shell_plus_core or kurth");
        },
        false}},
      {"seed",
       {[](RunConfig& c, std::string_view v) {
          std::uint64_t s = 0;
          const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
          if (ec != std::errc{} || ptr != v.data() + v.size()) throw DomainError("expected an unsigned integer");
          c.seed = s;
        },
        true}},
      {"output_dir", {[](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); }, false}},
      {"threads", {[](RunConfig& c, std::string_view v) { c.threads = static_cast<unsigned>(std::max(1, count(v))); }, true}},
      {"t_end", {[](RunConfig& c, std::string_view v) { c.integrator.t_end = number(v); }, true}},
      {"dt_initial", {[](RunConfig& c, std::string_view v) { c.integrator.dt_initial = number(v); }, true}},
      {"dt_safety", {[](RunConfig& c, std::string_view v) { c.integrator.dt_safety = number(v); }, true}},
      {"output_cadence", {[](RunConfig& c, std::string_view v) { c.integrator.output_cadence = number(v); }, true}},
      {"reflection", {[](RunConfig& c, std::string_view v) { c.integrator.reflection_enabled = boolean(v); }, false}},
      {"R_grid", {[](RunConfig& c, std::string_view v) { c.diagnostics.R_grid = parse_number_list(v); }, false}},
      {"q_list", {[](RunConfig& c, std::string_view v) { c.diagnostics.q_list = parse_number_list(v); }, false}},
      {"n_bins", {[](RunConfig& c, std::string_view v) { c.diagnostics.n_bins = count(v); }, true}},
      {"binning",
       {[](RunConfig& c, std::string_view v) {
          if (v == "uniform")
            c.diagnostics.binning = Binning::uniform;
          else if (v == "equal_mass")
            c.diagnostics.binning = Binning::equal_mass;
          else
            throw DomainError("expected uniform or equal_mass");
        },
        false}},
      {"snapshot_times", {[](RunConfig& c, std::string_view v) { c.snapshot_times = parse_number_list(v); }, false}},
      {"shell.mass", {[](RunConfig& c, std::string_view v) { c.shell.mass = number(v); }, true}},
      {"shell.r_inner", {[](RunConfig& c, std::string_view v) { c.shell.r_inner = number(v); }, true}},
      {"shell.r_outer", {[](RunConfig& c, std::string_view v) { c.shell.r_outer = number(v); }, true}},
      {"shell.w_min", {[](RunConfig& c, std::string_view v) { c.shell.w_min = number(v); }, true}},
      {"shell.w_max", {[](RunConfig& c, std::string_view v) { c.shell.w_max = number(v); }, true}},
      {"shell.ell_min", {[](RunConfig& c, std::string_view v) { c.shell.ell_min = number(v); }, true}},
      {"shell.ell_max", {[](RunConfig& c, std::string_view v) { c.shell.ell_max = number(v); }, true}},
      {"shell.count", {[](RunConfig& c, std::string_view v) { c.shell.count = count(v); }, true}},
      {"core.mass", {[](RunConfig& c, std::string_view v) { c.core.mass = number(v); }, true}},
      {"core.radius", {[](RunConfig& c, std::string_view v) { c.core.radius = number(v); }, true}},
      {"core.count", {[](RunConfig& c, std::string_view v) { c.core.count = count(v); }, true}},
      {"core.profile",
       {[](RunConfig& c, std::string_view v) {
          if (v == "uniform")
            c.core.profile = CoreProfile::uniform;
          else if (v == "table")
            c.core.profile = CoreProfile::table;
          else
            throw DomainError("expected uniform or table");
        },
        false}},
      {"core.table",
       {[](RunConfig& c, std::string_view v) {
          // r:M pairs separated by commas
          c.core.table.clear();
          std::size_t pos = 0;
          while (pos < v.size()) {
            const auto comma = std::min(v.find(',', pos), v.size());
            const auto item = trim(v.substr(pos, comma - pos));
            const auto colon = item.find(':');
            if (colon == std::string_view::npos) throw DomainError("expected r:M pairs");
            c.core.table.emplace_back(parse_number(item.substr(0, colon)), parse_number(item.substr(colon + 1)));
            pos = comma + 1;
          }
        },
        false}},
      {"kurth.k", {[](RunConfig& c, std::string_view v) { c.kurth_k = number(v); }, true}},
  };
  return table;
}

}  // namespace

bool is_scalar_key(std::string_view key) {
  const auto& table = key_table();
  const auto it = table.find(key);
  return it != table.end() && it->second.scalar;
}

RunConfig build_run_config(const ConfigMap& map) {
  RunConfig c;
  c.source = map;
  const auto& table = key_table();
  if (!map.find("scenario")) throw ConfigError("missing required key `scenario`", "scenario");
  for (const auto& e : map.entries()) {
    const auto it = table.find(e.key);
    if (it == table.end()) throw ConfigError("unknown key `" + e.key + "`", e.key, e.line);
    try {
      it->second.apply(c, e.value);
    } catch (const DomainError& err) {
      throw ConfigError("invalid value for `" + e.key + "`: " + err.what(), e.key, e.line);
    }
  }
  c.shell.seed = c.seed;
  c.core.seed = c.seed + 0x9e3779b9ULL;

  const auto line_of = [&](std::string_view key) {
    const auto* e = map.find(key);
    return e ? e->line : 0;
  };
  const auto check = [&](bool ok, std::string_view key, const std::string& what) {
    if (!ok) throw ConfigError("invalid value for `" + std::string(key) + "`: " + what, std::string(key), line_of(key));
  };
  const auto& in = c.integrator;
  check(in.dt_initial > 0.0, "dt_initial", "must be positive");
  check(in.dt_safety > 0.0 && in.dt_safety <= 1.0, "dt_safety", "must lie in (0, 1]");
  check(in.output_cadence > 0.0, "output_cadence", "must be positive");
  check(in.t_end >= 0.0 && std::isfinite(in.t_end), "t_end", "must be finite and non-negative");
  for (double R : c.diagnostics.R_grid) check(R > 0.0, "R_grid", "radii must be positive");
  for (double q : c.diagnostics.q_list) check(q >= 1.0, "q_list", "exponents must be >= 1");
  for (double t : c.snapshot_times) check(t >= 0.0 && t <= in.t_end, "snapshot_times", "times must lie in [0, t_end]");
  check(std::isfinite(c.kurth_k), "kurth.k", "must be finite");
  c.diagnostics.threads = c.threads;

  const auto validate_spec = [&](auto&& spec, std::string_view prefix) {
    try {
      spec.validate();
    } catch (const DomainError& err) {
      throw ConfigError(std::string(prefix) + ": " + err.what(), std::string(prefix));
    }
  };
  if (c.scenario == Scenario::shell || c.scenario == Scenario::shell_plus_core) validate_spec(c.shell, "shell");
  if (c.scenario == Scenario::core || c.scenario == Scenario::shell_plus_core) validate_spec(c.core, "core");
  if (c.scenario == Scenario::shell_plus_core && !(c.shell.r_inner > c.core.outer_radius()))
    throw ConfigError("shell.r_inner must exceed the core radius", "shell.r_inner", line_of("shell.r_inner"));
  return c;
}

}  // namespace vpdisp
