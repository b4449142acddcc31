#pragma once

// Telemetry CSV ingestion and preprocessing: parse, sort, average
// duplicate timestamps, bin onto a regular clock, split chronologically,
// and center for the zero-at-origin process models.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wlgp/grid.hpp"

namespace wlgp {

// Unusable input data: missing columns, too many malformed rows, series
// too short for the requested operation.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvOptions {
  std::string time_column = "timestamp";
  std::string x_column = "location-long";
  std::string y_column = "location-lat";
  // rows that fail to parse are skipped as long as their fraction stays
  // at or below this; beyond it the file is rejected
  double max_malformed_fraction = 0.01;
};

struct TelemetryData {
  std::vector<double> epoch_seconds;  // sorted, duplicates averaged away
  std::vector<double> x;              // longitude track
  std::vector<double> y;              // latitude track
  std::size_t skipped_rows = 0;
  std::size_t averaged_duplicates = 0;
  std::vector<std::string> warnings;
};

namespace tdetail {

// days since 1970-01-01 for a proleptic Gregorian date
inline long long days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() ||
      !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

// "YYYY-MM-DD HH:MM:SS[.fff][Z]" (or with 'T') as seconds since epoch;
// a plain number is taken as epoch seconds directly.
inline std::optional<double> parse_time(const std::string& raw) {
  if (auto num = parse_number(raw)) return num;
  int year = 0, mon = 0, day = 0, hh = 0, mm = 0;
  double ss = 0.0;
  char sep = 0;
  const int got = std::sscanf(raw.c_str(), "%4d-%2d-%2d%c%2d:%2d:%lf", &year,
                              &mon, &day, &sep, &hh, &mm, &ss);
  if (got != 7 || (sep != ' ' && sep != 'T')) return std::nullopt;
  if (mon < 1 || mon > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 ||
      ss < 0.0 || ss >= 61.0) {
    return std::nullopt;
  }
  return static_cast<double>(days_from_civil(year, mon, day)) * 86400.0 +
         hh * 3600.0 + mm * 60.0 + ss;
}

// one CSV record; commas inside double quotes do not split, doubled
// quotes inside a quoted field unescape to one
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace tdetail

inline TelemetryData load_telemetry_csv(std::istream& in,
                                        const CsvOptions& opt = {}) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV: empty input");
  const std::vector<std::string> header = tdetail::split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw DataError("CSV: missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ti = column(opt.time_column);
  const std::size_t xi = column(opt.x_column);
  const std::size_t yi = column(opt.y_column);

  struct Row {
    double t, x, y;
  };
  std::vector<Row> rows;
  std::size_t skipped = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = tdetail::split_csv_line(line);
    const std::size_t need = std::max({ti, xi, yi}) + 1;
    std::optional<double> t, x, y;
    if (fields.size() >= need) {
      t = tdetail::parse_time(fields[ti]);
      x = tdetail::parse_number(fields[xi]);
      y = tdetail::parse_number(fields[yi]);
    }
    if (!t || !x || !y) {
      ++skipped;
      continue;
    }
    rows.push_back({*t, *x, *y});
  }
  const std::size_t total = rows.size() + skipped;
  if (total == 0) throw DataError("CSV: no data rows");
  if (static_cast<double>(skipped) >
      opt.max_malformed_fraction * static_cast<double>(total)) {
    throw DataError("CSV: " + std::to_string(skipped) + " of " +
                    std::to_string(total) + " rows malformed");
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.t < b.t; });

  TelemetryData out;
  out.skipped_rows = skipped;
  if (skipped > 0) {
    out.warnings.push_back("skipped " + std::to_string(skipped) +
                           " malformed row(s)");
  }
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    double sx = 0.0, sy = 0.0;
    while (j < rows.size() && rows[j].t == rows[i].t) {
      sx += rows[j].x;
      sy += rows[j].y;
      ++j;
    }
    const double m = static_cast<double>(j - i);
    out.epoch_seconds.push_back(rows[i].t);
    out.x.push_back(sx / m);
    out.y.push_back(sy / m);
    if (j - i > 1) out.averaged_duplicates += j - i - 1;
    i = j;
  }
  if (out.averaged_duplicates > 0) {
    out.warnings.push_back("averaged " +
                           std::to_string(out.averaged_duplicates) +
                           " duplicate-timestamp row(s)");
  }
  return out;
}

struct TelemetrySeries {
  std::vector<double> time_minutes;  // strictly increasing
  std::vector<double> value;
};

// minutes since the first record, for one coordinate
inline TelemetrySeries minutes_series(const std::vector<double>& epoch_seconds,
                                      const std::vector<double>& value) {
  if (epoch_seconds.size() != value.size()) {
    throw std::invalid_argument("minutes_series: size mismatch");
  }
  TelemetrySeries out;
  out.time_minutes.reserve(epoch_seconds.size());
  const double t0 = epoch_seconds.empty() ? 0.0 : epoch_seconds.front();
  for (double t : epoch_seconds) out.time_minutes.push_back((t - t0) / 60.0);
  out.value = value;
  return out;
}

// Average records into consecutive windows of width delta starting at the
// first record.  Each nonempty window contributes one point at its
// midpoint; empty windows are skipped.
inline TelemetrySeries bin_average(const TelemetrySeries& s,
                                   double delta_minutes = 0.5) {
  if (!(delta_minutes > 0.0)) {
    throw std::invalid_argument("bin_average: delta must be positive");
  }
  if (s.time_minutes.size() != s.value.size()) {
    throw std::invalid_argument("bin_average: size mismatch");
  }
  TelemetrySeries out;
  if (s.time_minutes.empty()) return out;
  const double t0 = s.time_minutes.front();
  long long bin = -1;
  double sum = 0.0;
  long long count = 0;
  auto flush = [&]() {
    if (count > 0) {
      out.time_minutes.push_back(t0 + (static_cast<double>(bin) + 0.5) *
                                          delta_minutes);
      out.value.push_back(sum / static_cast<double>(count));
    }
  };
  for (std::size_t i = 0; i < s.time_minutes.size(); ++i) {
    if (s.time_minutes[i] < t0) {
      throw std::invalid_argument("bin_average: times must be sorted");
    }
    const long long b =
        static_cast<long long>(std::floor((s.time_minutes[i] - t0) /
                                          delta_minutes));
    if (b != bin) {
      flush();
      bin = b;
      sum = 0.0;
      count = 0;
    }
    sum += s.value[i];
    ++count;
  }
  flush();
  return out;
}

// chronological split: the first floor(fraction * n) points train
inline std::pair<TelemetrySeries, TelemetrySeries> split_fraction(
    const TelemetrySeries& s, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("split_fraction: fraction in [0,1]");
  }
  const std::size_t n = s.time_minutes.size();
  const std::size_t k =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  TelemetrySeries train, test;
  train.time_minutes.assign(s.time_minutes.begin(), s.time_minutes.begin() + k);
  train.value.assign(s.value.begin(), s.value.begin() + k);
  test.time_minutes.assign(s.time_minutes.begin() + k, s.time_minutes.end());
  test.value.assign(s.value.begin() + k, s.value.end());
  return {std::move(train), std::move(test)};
}

struct CenteredSeries {
  TimeGrid grid;           // first retained point sits one spacing in
  Eigen::VectorXd values;  // first observation subtracted
  double origin_time = 0.0;
  double origin_value = 0.0;
};

// Pin the first observation as the process origin: subtract its value
// from the rest, drop it (it is identically zero there), and measure time
// from it.  On a gapless regular grid the first retained time equals the
// bin width.
inline CenteredSeries center_series(const TelemetrySeries& s) {
  if (s.time_minutes.size() != s.value.size()) {
    throw std::invalid_argument("center_series: size mismatch");
  }
  if (s.time_minutes.size() < 2) {
    throw DataError("center_series: need at least two points");
  }
  CenteredSeries out;
  out.origin_time = s.time_minutes.front();
  out.origin_value = s.value.front();
  const std::size_t n = s.time_minutes.size() - 1;
  out.grid.times.resize(n);
  out.values.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    out.grid.times[i] = s.time_minutes[i + 1] - out.origin_time;
    out.values[static_cast<Eigen::Index>(i)] =
        s.value[i + 1] - out.origin_value;
  }
  validate_grid(out.grid);
  return out;
}

}  // namespace wlgp
