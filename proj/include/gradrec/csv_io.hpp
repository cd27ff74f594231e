#ifndef GRADREC_CSV_IO_HPP
#define GRADREC_CSV_IO_HPP

// CSV formats used by the command-line tool:
//   signal files       header "n,value"; an empty value marks a missing sample
//   nonuniform files   header "t,value"; one row per measured instant
//   trace files        header "m,delta,beta_deg,measure,tr_db"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gradrec/errors.hpp"
#include "gradrec/nonuniform.hpp"
#include "gradrec/reconstruct.hpp"
#include "gradrec/spectral.hpp"

namespace gradrec::csv {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
}

/// Shortest round-trip representation.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void expect_header(std::istream& in, std::string_view expected) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV input; expected header '" + std::string(expected) + "'");
  if (trim(line) != expected) {
    throw InputError("unexpected CSV header '" + trim(line) + "'; expected '" + std::string(expected) + "'");
  }
}

/// A uniformly sampled signal with some samples absent.
struct MaskedSignal {
  std::vector<double> values;  ///< zero at missing positions
  SampleSet samples;
};

inline MaskedSignal read_masked_signal(std::istream& in) {
  expect_header(in, "n,value");
  std::map<std::size_t, std::optional<double>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 2) throw InputError("line " + std::to_string(line_no) + ": expected 2 fields");
    const double idx = parse_double(f[0], line_no);
    if (idx < 0 || idx != std::floor(idx)) throw InputError("line " + std::to_string(line_no) + ": bad index");
    const auto n = static_cast<std::size_t>(idx);
    if (rows.count(n)) throw InputError("line " + std::to_string(line_no) + ": duplicate index " + f[0]);
    rows[n] = f[1].empty() ? std::nullopt : std::optional<double>(parse_double(f[1], line_no));
  }
  if (rows.size() < 2) throw InputError("signal file needs at least 2 rows");
  const std::size_t n = rows.size();
  if (rows.rbegin()->first != n - 1) throw InputError("signal indices must cover 0.." + std::to_string(n - 1));
  MaskedSignal out;
  out.values.assign(n, 0.0);
  std::vector<bool> missing(n, false);
  for (const auto& [i, v] : rows) {
    if (v) {
      if (!std::isfinite(*v)) throw InputError("sample " + std::to_string(i) + " is not finite");
      out.values[i] = *v;
    } else {
      missing[i] = true;
    }
  }
  out.samples = SampleSet(std::move(missing));
  return out;
}

inline void write_signal(std::ostream& out, std::span<const double> values, const SampleSet* mask = nullptr) {
  out << "n,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << i << ',';
    if (!(mask && mask->is_missing(i))) out << format_double(values[i]);
    out << '\n';
  }
}

inline std::vector<NonuniformSample> read_nonuniform(std::istream& in) {
  expect_header(in, "t,value");
  std::vector<NonuniformSample> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 2) throw InputError("line " + std::to_string(line_no) + ": expected 2 fields");
    out.push_back({parse_double(f[0], line_no), parse_double(f[1], line_no)});
  }
  if (out.empty()) throw InputError("nonuniform file has no samples");
  return out;
}

/// Assigns each instant to its nearest grid slot round(t/dt).
inline std::map<std::size_t, NonuniformSample> assign_slots(const std::vector<NonuniformSample>& samples,
                                                            std::size_t n, double dt) {
  std::map<std::size_t, NonuniformSample> out;
  for (const auto& s : samples) {
    const double pos = std::round(s.t / dt);
    if (pos < 0 || pos >= static_cast<double>(n)) {
      throw InputError("instant t=" + format_double(s.t) + " falls outside the " + std::to_string(n) + "-slot grid");
    }
    const auto slot = static_cast<std::size_t>(pos);
    if (!out.emplace(slot, s).second) {
      throw InputError("two instants map to grid slot " + std::to_string(slot));
    }
  }
  return out;
}

inline void write_nonuniform(std::ostream& out, const std::map<std::size_t, NonuniformSample>& samples) {
  out << "t,value\n";
  for (const auto& [slot, s] : samples) out << format_double(s.t) << ',' << format_double(s.value) << '\n';
}

inline void write_trace(std::ostream& out, const ReconResult& r) {
  out << "m,delta,beta_deg,measure,tr_db\n";
  for (const auto& rec : r.trace) {
    out << rec.m << ',' << format_double(rec.delta) << ',' << format_double(rec.beta_deg) << ','
        << format_double(rec.measure) << ',' << format_double(rec.tr_db) << '\n';
  }
}

/// Comma-separated list of non-negative integers, e.g. "3,5,9".
inline std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (const auto& f : split(text)) {
    if (f.empty() || f.find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("bad index '" + f + "' in list '" + text + "'");
    }
    out.push_back(static_cast<std::size_t>(std::stoull(f)));
  }
  return out;
}

}  // namespace gradrec::csv

#endif  // GRADREC_CSV_IO_HPP
