#pragma once

// File formats: JSON inputs (distributions, utilities, tables, datasets,
// models) and the versioned CSV output.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "brdm/error.hpp"
#include "brdm/inference.hpp"
#include "brdm/multitask.hpp"
#include "brdm/scalar.hpp"
#include "brdm/simplex.hpp"

namespace brdm::io {

using json = nlohmann::json;

inline constexpr std::string_view csv_schema = "# brdm-csv v1";

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::invalid_argument, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(errc::invalid_argument, "'" + path + "' is not valid JSON: " + e.what());
  }
}

namespace detail {

/// A bare array, or an object holding the array under `key`.
inline const json& unwrap(const json& j, std::string_view key) {
  if (j.is_object()) {
    const std::string k(key);
    if (!j.contains(k)) fail(errc::invalid_argument, "expected a '" + k + "' entry");
    return j.at(k);
  }
  return j;
}

inline const json& as_array(const json& j, std::string_view what) {
  if (!j.is_array()) fail(errc::invalid_argument, std::string(what) + " must be a JSON array");
  return j;
}

}  // namespace detail

inline double number_of(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return to_double(parse_rational(v.get<std::string>()));
  fail(errc::invalid_argument, "expected a number or a rational string");
}

/// Strings such as "1/6" parse exactly; JSON numbers are rationalized.
inline rational rational_of(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return rational(v.get<long long>());
  if (v.is_number()) return rationalize(v.get<double>());
  fail(errc::invalid_argument, "expected a number or a rational string");
}

inline std::vector<double> numbers(const json& j, std::string_view what) {
  std::vector<double> out;
  for (const auto& v : detail::as_array(j, what)) out.push_back(number_of(v));
  return out;
}

inline dist parse_dist(const json& j) { return dist::validate(numbers(detail::unwrap(j, "weights"), "distribution")); }

inline exact_dist parse_exact_dist(const json& j) {
  std::vector<rational> w;
  for (const auto& v : detail::as_array(detail::unwrap(j, "weights"), "distribution")) w.push_back(rational_of(v));
  return exact_dist::validate(std::move(w));
}

inline utility_vector parse_utility(const json& j) {
  return utility_vector(numbers(detail::unwrap(j, "values"), "utility"));
}

inline utility_table parse_utility_table(const json& j) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : detail::as_array(detail::unwrap(j, "table"), "utility table")) rows.push_back(numbers(r, "utility row"));
  return utility_table::from_rows(rows);
}

/// Samples are world-point values (1-based by default) mapped to indices.
inline dataset parse_dataset(const json& j, const world_model& model) {
  dataset d;
  for (const auto& v : detail::as_array(detail::unwrap(j, "samples"), "samples")) {
    const double x = number_of(v);
    auto pts = model.points();
    std::size_t k = 0;
    while (k < pts.size() && pts[k] != x) ++k;
    if (k == pts.size()) fail(errc::invalid_argument, "sample " + std::to_string(x) + " is not a world point");
    d.samples.push_back(k);
  }
  return d;
}

/// {world_points: N or [..], grid: {mu_range, sigma_range, counts}, prior: "uniform"}.
inline world_model parse_model(const json& j) {
  if (!j.is_object()) fail(errc::invalid_argument, "model file must be a JSON object");
  std::vector<double> points = integer_points(20);
  if (j.contains("world_points")) {
    const auto& wp = j.at("world_points");
    if (wp.is_number_integer()) {
      const auto n = wp.get<long long>();
      if (n < 1) fail(errc::invalid_argument, "world_points must be positive");
      points = integer_points(static_cast<std::size_t>(n));
    } else {
      points = numbers(wp, "world_points");
    }
  }
  grid_config cfg;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    auto range = [&](const char* key, auto& lo, auto& hi) {
      if (!g.contains(key)) return;
      auto r = numbers(g.at(key), key);
      if (r.size() != 2 || !(r[0] <= r[1])) fail(errc::invalid_argument, std::string(key) + " must be [lo, hi]");
      lo = r[0];
      hi = r[1];
    };
    range("mu_range", cfg.mu_lo, cfg.mu_hi);
    range("sigma_range", cfg.sigma_lo, cfg.sigma_hi);
    if (g.contains("counts")) {
      auto c = numbers(g.at("counts"), "counts");
      if (c.size() != 2 || c[0] < 1 || c[1] < 1) fail(errc::invalid_argument, "counts must be [mu_count, sigma_count]");
      cfg.mu_count = static_cast<std::size_t>(c[0]);
      cfg.sigma_count = static_cast<std::size_t>(c[1]);
    }
    if (!(cfg.sigma_lo > 0)) fail(errc::invalid_argument, "sigma_range must be positive");
  }
  if (j.contains("prior") && j.at("prior") != "uniform") fail(errc::invalid_argument, "only a uniform grid prior is supported");
  return world_model::mixture_grid(std::move(points), cfg);
}

/// "start:stop:step", inclusive of stop up to rounding, or a comma list.
inline std::vector<double> parse_grid(std::string_view text) {
  auto to_num = [&](std::string_view s) {
    const std::string str(s);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(str, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != str.size() || !std::isfinite(v)) fail(errc::invalid_argument, "bad grid value '" + str + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto a = text.find(':'), b = text.find(':', a + 1);
    if (b == std::string_view::npos) fail(errc::invalid_argument, "grid must be start:stop:step");
    const double start = to_num(text.substr(0, a)), stop = to_num(text.substr(a + 1, b - a - 1)),
                 step = to_num(text.substr(b + 1));
    if (!(step > 0) || stop < start) fail(errc::invalid_argument, "grid needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto next = text.find(',', pos);
    if (next == std::string_view::npos) next = text.size();
    out.push_back(to_num(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

/// Shortest decimal that round-trips, so repeated runs write identical bytes.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

class csv_table {
 public:
  explicit csv_table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) fail(errc::invalid_argument, "CSV row has the wrong number of cells");
    rows_.push_back(std::move(cells));
  }

  void add_row(std::span<const double> values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_number(v));
    add_row(std::move(cells));
  }

  std::string str() const {
    std::ostringstream os;
    os << csv_schema << '\n';
    write_line(os, columns_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::invalid_argument, "cannot write '" + path + "'");
  out << contents;
}

}  // namespace brdm::io
