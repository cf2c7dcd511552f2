#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "trdsa/analytics.hpp"
#include "trdsa/errors.hpp"
#include "trdsa/params.hpp"
#include "trdsa/simulator.hpp"

namespace trdsa::sweep {

enum class Target { q, p_tr, p_tu, lead_pmf };

inline std::string_view to_string(Target t) {
  switch (t) {
    case Target::q: return "Q";
    case Target::p_tr: return "P_tr";
    case Target::p_tu: return "P_tu";
    case Target::lead_pmf: return "lead_pmf";
  }
  return "?";
}

inline Target parse_target(std::string_view name) {
  if (name == "Q" || name == "q") return Target::q;
  if (name == "P_tr" || name == "p_tr" || name == "tr") return Target::p_tr;
  if (name == "P_tu" || name == "p_tu" || name == "tu") return Target::p_tu;
  if (name == "lead_pmf" || name == "lead") return Target::lead_pmf;
  throw ValidationError("unknown sweep target '" + std::string(name) + "'");
}

/// Sweep parameters by name: share (I), z (Z), window (L), l, m, n, k.
inline const std::vector<std::string>& required_params(Target t) {
  static const std::vector<std::string> q{"share", "l", "m", "n"};
  static const std::vector<std::string> tr{"share", "z", "window"};
  static const std::vector<std::string> tu{"share", "z"};
  static const std::vector<std::string> lead{"share", "z", "k"};
  switch (t) {
    case Target::q: return q;
    case Target::p_tr: return tr;
    case Target::p_tu: return tu;
    case Target::lead_pmf: return lead;
  }
  return q;
}

/// 12 significant digits, locale independent.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

/// Exact share for a swept value: the 12-digit decimal shown in the output.
inline HashShare share_from_value(double v) { return HashShare::parse(format_number(v)); }

struct SweepSpec {
  std::vector<Target> targets;
  std::string axis;
  std::vector<double> values;
  std::map<std::string, double> fixed;
  bool with_simulation = false;
  sim::SimConfig sim{};
  /// Adds the l -> infinity limit P(m) next to Q.
  bool with_limit = false;

  [[nodiscard]] bool has(Target t) const { return std::find(targets.begin(), targets.end(), t) != targets.end(); }

  /// Parameter names that every row must bind.
  [[nodiscard]] std::vector<std::string> parameters() const {
    std::vector<std::string> out;
    for (auto t : targets) {
      for (const auto& p : required_params(t)) {
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
      }
    }
    return out;
  }

  void validate() const {
    if (targets.empty()) throw ValidationError("sweep needs at least one target");
    const bool attack_family = std::all_of(targets.begin(), targets.end(),
                                           [](Target t) { return t == Target::p_tr || t == Target::p_tu; });
    if (targets.size() > 1 && !attack_family) {
      throw ValidationError("only P_tr and P_tu can share one sweep");
    }
    const auto params = parameters();
    if (std::find(params.begin(), params.end(), axis) == params.end()) {
      throw ValidationError("sweep axis '" + axis + "' is not a parameter of the target");
    }
    for (const auto& p : params) {
      if (p != axis && !fixed.count(p)) throw ValidationError("sweep is missing a fixed value for '" + p + "'");
    }
    for (const auto& [name, _] : fixed) {
      if (name == axis) throw ValidationError("'" + name + "' is both the axis and fixed");
      if (std::find(params.begin(), params.end(), name) == params.end()) {
        throw ValidationError("fixed parameter '" + name + "' is not used by the target");
      }
    }
    if (values.empty()) throw ValidationError("sweep axis has no values");
    const bool increasing = values.size() < 2 || values[1] > values[0];
    for (std::size_t j = 1; j < values.size(); ++j) {
      if (increasing ? !(values[j] > values[j - 1]) : !(values[j] < values[j - 1])) {
        throw ValidationError("sweep axis values must be strictly ordered");
      }
    }
    for (const auto& [name, v] : fixed) check_value(name, v);
    for (double v : values) check_value(axis, v);
    if (with_simulation) {
      if (has(Target::lead_pmf)) throw ValidationError("lead_pmf sweeps have no simulation");
      if (!has(Target::q) && !has(Target::p_tr)) throw ValidationError("P_tu alone has no finite simulation");
      sim.validate();
    }
    if (with_limit && !has(Target::q)) throw ValidationError("the limit column applies to Q sweeps only");
  }

 private:
  static void check_value(const std::string& name, double v) {
    if (name == "share") {
      (void)share_from_value(v);
      return;
    }
    if (!std::isfinite(v) || v != std::floor(v)) {
      throw ValidationError("parameter '" + name + "' must be an integer (got " + format_number(v) + ")");
    }
    const double lo = name == "m" ? -1.0 : (name == "l" || name == "window") ? 1.0 : 0.0;
    if (v < lo) throw ValidationError("parameter '" + name + "' must be >= " + format_number(lo));
  }
};

using Cell = std::variant<std::int64_t, std::uint64_t, double>;

/// One row per evaluation; the column set is fixed for the whole table.
struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::vector<std::string> columns_for(const SweepSpec& spec) {
  std::vector<std::string> cols{"share_i"};
  if (spec.has(Target::q)) {
    cols.insert(cols.end(), {"window_l", "lag_m", "elapsed_n", "q_closed"});
    if (spec.with_limit) cols.emplace_back("q_limit");
  } else if (spec.has(Target::lead_pmf)) {
    cols.insert(cols.end(), {"depth_z", "lead_k", "lead_pmf", "lead_tail"});
  } else {
    cols.emplace_back("depth_z");
    if (spec.has(Target::p_tr)) cols.insert(cols.end(), {"window_l", "p_tr"});
    if (spec.has(Target::p_tu)) cols.emplace_back("p_tu");
  }
  if (spec.with_simulation) cols.insert(cols.end(), {"p_hat", "stderr", "runs", "seed"});
  return cols;
}

namespace detail {

inline long as_long(double v) { return static_cast<long>(std::llround(v)); }

inline double max_over(const SweepSpec& spec, const std::string& name) {
  if (name == spec.axis) return *std::max_element(spec.values.begin(), spec.values.end());
  return spec.fixed.at(name);
}

template <class T>
void evaluate_into(const SweepSpec& spec, SweepTable& table) {
  using analytics::CoefficientTable;
  std::optional<CoefficientTable> coefficients;
  if (spec.has(Target::q)) {
    long rows = 0;
    long lags = 0;
    // Largest l - n over the sweep; each binding is either fixed or swept.
    for (double v : spec.values) {
      auto bind = [&](const std::string& p) { return p == spec.axis ? v : spec.fixed.at(p); };
      rows = std::max(rows, as_long(bind("l")) - as_long(bind("n")));
    }
    lags = std::max(0L, as_long(max_over(spec, "m")));
    coefficients.emplace(static_cast<std::size_t>(std::max(0L, rows - 1)), static_cast<std::size_t>(lags));
  } else if (spec.has(Target::p_tr)) {
    coefficients.emplace(analytics::table_for_attack(as_long(max_over(spec, "window")), as_long(max_over(spec, "z"))));
  }

  for (double v : spec.values) {
    auto bind = [&](const std::string& p) { return p == spec.axis ? v : spec.fixed.at(p); };
    const HashShare share = share_from_value(bind("share"));
    std::vector<Cell> row{share.value()};
    std::optional<sim::EmpiricalEstimate> est;
    if (spec.has(Target::q)) {
      const RaceQuery query{as_long(bind("l")), as_long(bind("m")), as_long(bind("n"))};
      row.insert(row.end(), {Cell{std::int64_t{query.deadline}}, Cell{std::int64_t{query.lag}},
                             Cell{std::int64_t{query.elapsed}}});
      row.emplace_back(analytics::catch_up_probability<T>(query, share, *coefficients).to_double());
      if (spec.with_limit) row.emplace_back(analytics::tu_catch_up_probability<T>(query.lag, share).to_double());
      if (spec.with_simulation) est = sim::simulate_race(query, share, spec.sim);
    } else if (spec.has(Target::lead_pmf)) {
      const long z = as_long(bind("z"));
      const long k = as_long(bind("k"));
      row.insert(row.end(), {Cell{std::int64_t{z}}, Cell{std::int64_t{k}}});
      row.emplace_back(analytics::lead_pmf<T>(share, z, k).to_double());
      row.emplace_back(analytics::lead_tail<T>(share, z).to_double());
    } else {
      const long z = as_long(bind("z"));
      row.emplace_back(std::int64_t{z});
      if (spec.has(Target::p_tr)) {
        const AttackParams params{share, z, as_long(bind("window"))};
        row.emplace_back(std::int64_t{params.window});
        row.emplace_back(analytics::tr_success_probability<T>(params, *coefficients).to_double());
        if (spec.with_simulation) est = sim::simulate_attack(params, spec.sim);
      }
      if (spec.has(Target::p_tu)) row.emplace_back(analytics::tu_success_probability<T>(share, z).to_double());
    }
    if (est) {
      row.insert(row.end(), {Cell{est->p_hat}, Cell{est->std_error}, Cell{est->runs}, Cell{est->seed}});
    }
    table.rows.push_back(std::move(row));
  }
}

}  // namespace detail

/// Evaluates every spec in order into one table. All specs must produce the
/// same columns.
inline SweepTable evaluate(const std::vector<SweepSpec>& specs, Backend backend = Backend::float_compensated) {
  if (specs.empty()) throw ValidationError("nothing to sweep");
  SweepTable table;
  table.columns = columns_for(specs.front());
  for (const auto& spec : specs) {
    spec.validate();
    if (columns_for(spec) != table.columns) throw ValidationError("sweep parts disagree on their column set");
  }
  for (const auto& spec : specs) {
    if (backend == Backend::float_compensated) {
      detail::evaluate_into<double>(spec, table);
    } else {
      detail::evaluate_into<Rational>(spec, table);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Presets reproducing the figure data.

inline std::vector<double> int_range(long from, long to) {
  std::vector<double> out;
  for (long v = from; v <= to; ++v) out.push_back(static_cast<double>(v));
  return out;
}

/// 0, 0.05, ..., 0.95 built from exact decimals.
inline std::vector<double> share_grid() {
  std::vector<double> out;
  for (int j = 0; j < 20; ++j) out.push_back(static_cast<double>(j) / 20.0);
  return out;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig-pi", "fig-pl", "fig-vs", "fig-vsl", "fig-vsz", "fig-vsz1"};
  return names;
}

/// Named figure presets. The fig-pi share values are a free choice; the
/// source figure's legend values are not recoverable.
inline std::vector<SweepSpec> preset(std::string_view name) {
  std::vector<SweepSpec> out;
  if (name == "fig-pi") {
    for (double i : {0.2, 0.3, 0.4, 0.5}) {
      out.push_back({{Target::q}, "m", int_range(1, 60), {{"share", i}, {"l", 40}, {"n", 0}}});
    }
  } else if (name == "fig-pl") {
    for (double remaining : {5.0, 10.0, 20.0, 40.0}) {
      out.push_back({{Target::q}, "m", int_range(1, 10), {{"share", 0.4}, {"l", remaining}, {"n", 0}}});
    }
  } else if (name == "fig-vs") {
    for (double i : {0.4, 0.6}) {
      SweepSpec spec{{Target::q}, "l", int_range(1, 300), {{"share", i}, {"m", 3}, {"n", 0}}};
      spec.with_limit = true;
      out.push_back(spec);
    }
  } else if (name == "fig-vsl") {
    for (double window : {1.0, 2.0, 10.0, 20.0, 50.0}) {
      out.push_back({{Target::p_tr, Target::p_tu}, "share", share_grid(), {{"z", 4}, {"window", window}}});
    }
  } else if (name == "fig-vsz") {
    for (double z : {2.0, 4.0, 8.0}) {
      out.push_back({{Target::p_tr, Target::p_tu}, "share", share_grid(), {{"z", z}, {"window", 10}}});
    }
  } else if (name == "fig-vsz1") {
    for (double i : {0.3, 0.6}) {
      out.push_back({{Target::p_tr}, "z", int_range(0, 12), {{"share", i}, {"window", 10}}});
    }
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "'");
  }
  return out;
}

inline void attach_simulation(std::vector<SweepSpec>& specs, const sim::SimConfig& config) {
  for (auto& spec : specs) {
    spec.with_simulation = true;
    spec.sim = config;
  }
}

// ---------------------------------------------------------------------------
// Spec files (JSON): one object or an array of objects.
//
//   {"target": ["P_tr", "P_tu"], "axis": "share", "values": [0, 0.1, 0.2],
//    "fixed": {"z": 4, "window": 10}, "limit": false,
//    "simulate": {"runs": 10000, "seed": 42, "parallelism": 4}}

inline SweepSpec spec_from_json(const nlohmann::json& j) {
  SweepSpec spec;
  try {
    const auto& target = j.at("target");
    if (target.is_array()) {
      for (const auto& t : target) spec.targets.push_back(parse_target(t.get<std::string>()));
    } else {
      spec.targets.push_back(parse_target(target.get<std::string>()));
    }
    spec.axis = j.at("axis").get<std::string>();
    spec.values = j.at("values").get<std::vector<double>>();
    if (j.contains("fixed")) spec.fixed = j.at("fixed").get<std::map<std::string, double>>();
    spec.with_limit = j.value("limit", false);
    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      spec.with_simulation = true;
      spec.sim.runs = s.value("runs", std::uint64_t{10000});
      spec.sim.seed = s.at("seed").get<std::uint64_t>();
      spec.sim.parallelism = s.value("parallelism", 1U);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed sweep spec: ") + e.what());
  }
  return spec;
}

inline std::vector<SweepSpec> specs_from_json(const nlohmann::json& j) {
  std::vector<SweepSpec> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(spec_from_json(item));
  } else {
    out.push_back(spec_from_json(j));
  }
  return out;
}

inline std::vector<SweepSpec> load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read sweep spec '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("sweep spec '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return specs_from_json(j);
}

// ---------------------------------------------------------------------------
// Output.

inline std::string format_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
          return format_number(v);
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

inline void write_csv(const SweepTable& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
    out << '\n';
  }
}

inline void write_json(const SweepTable& table, std::ostream& out) {
  auto rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
              // Round through the 12-digit text so JSON and CSV agree.
              obj[table.columns[c]] = std::stod(format_number(v));
            } else {
              obj[table.columns[c]] = v;
            }
          },
          row[c]);
    }
    rows.push_back(std::move(obj));
  }
  out << rows.dump(2) << '\n';
}

enum class Format { csv, json };

inline std::string render(const SweepTable& table, Format format) {
  std::ostringstream out;
  if (format == Format::csv) {
    write_csv(table, out);
  } else {
    write_json(table, out);
  }
  return out.str();
}

/// Writes `content` next to `path` under a temporary name, then renames it
/// into place; readers never see a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

/// Minimal reader for the CSV this module writes (numeric cells, no quoting).
inline std::vector<std::map<std::string, std::string>> read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ValidationError("csv row width differs from header");
    std::map<std::string, std::string> row;
    for (std::size_t c = 0; c < cells.size(); ++c) row[header[c]] = cells[c];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace trdsa::sweep
