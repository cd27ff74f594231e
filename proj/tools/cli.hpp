#ifndef GRADREC_TOOLS_CLI_HPP
#define GRADREC_TOOLS_CLI_HPP

// Command-line front end. run_cli() holds all the logic so tests can drive it
// with in-memory streams; main.cpp only forwards argv.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gradrec/gradrec.hpp"

namespace gradrec::cli {

/// Reads --config files written as JSON. Top-level scalars set global
/// options; an object keyed by a subcommand name sets that subcommand's
/// options. Arrays become multi-value inputs.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConfigError("writing JSON configuration is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config root must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config key '" + key + "' must hold a scalar or a list of scalars");
  }

  static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, v] : obj.items()) {
      if (v.is_object()) {
        auto p = parents;
        p.push_back(key);
        collect(v, p, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (v.is_array()) {
        for (const auto& e : v) item.inputs.push_back(scalar(e, key));
      } else {
        item.inputs.push_back(scalar(v, key));
      }
      items.push_back(std::move(item));
    }
  }
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string output;
  std::string format;  ///< empty: text for uniqueness, csv elsewhere
};

struct ReconFlags {
  double tmax_db = -100.0;
  double angle_deg = 170.0;
  double step_divisor = std::sqrt(10.0);
  std::optional<double> delta;
  std::optional<double> target_precision_db;
  std::size_t inner_cap = 2000;
  std::size_t outer_cap = 50;

  void attach(CLI::App* sub) {
    sub->add_option("--tmax-db", tmax_db, "Stop when the change ratio T_r falls below this (dB)")->capture_default_str();
    sub->add_option("--target-precision-db", target_precision_db, "Stopping threshold overriding --tmax-db (dB)");
    sub->add_option("--angle-deg", angle_deg, "Gradient angle that triggers a step reduction (degrees)")
        ->capture_default_str();
    sub->add_option("--step-divisor", step_divisor, "Factor dividing the step at each reduction")->capture_default_str();
    sub->add_option("--delta", delta, "Initial step (default: largest available |sample|)");
    sub->add_option("--inner-cap", inner_cap, "Iteration cap per step value")->capture_default_str();
    sub->add_option("--outer-cap", outer_cap, "Cap on the number of step values")->capture_default_str();
  }

  ReconConfig config() const {
    ReconConfig c;
    c.t_max_db = tmax_db;
    c.target_precision_db = target_precision_db;
    c.angle_threshold_deg = angle_deg;
    c.step_divisor = step_divisor;
    c.delta_init = delta;
    c.inner_iter_cap = inner_cap;
    c.outer_iter_cap = outer_cap;
    c.validate();
    return c;
  }
};

namespace detail {

inline std::ifstream open_input(const std::string& path, const std::string& flag) {
  std::ifstream in(path);
  if (!in) throw InputError(flag + ": cannot open '" + path + "'");
  return in;
}

/// Writes to the --output file when given, else to the supplied stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("--output: cannot write '" + path + "'");
      out_ = &file_;
    }
  }
  std::ostream& get() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline void write_file(const std::string& path, const std::string& flag, const auto& writer) {
  std::ofstream f(path);
  if (!f) throw InputError(flag + ": cannot write '" + path + "'");
  writer(f);
}

inline nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return csv::format_double(v);
}

inline nlohmann::json trace_json(const ReconResult& r) {
  auto arr = nlohmann::json::array();
  for (const auto& it : r.trace) {
    arr.push_back({{"m", it.m},
                   {"delta", number(it.delta)},
                   {"beta_deg", number(it.beta_deg)},
                   {"measure", number(it.measure)},
                   {"tr_db", number(it.tr_db)}});
  }
  return arr;
}

inline Signal read_truth(const std::string& path) {
  auto in = open_input(path, "--srr");
  auto ms = csv::read_masked_signal(in);
  if (ms.samples.missing_count() != 0) throw InputError("--srr: reference signal '" + path + "' has missing samples");
  return Signal(std::move(ms.values));
}

inline void report_recon(std::ostream& out, std::ostream& err, const std::string& format, const Signal& y,
                         const SampleSet& samples, const ReconResult& r, std::optional<double> srr_db,
                         const nlohmann::json& extra = nlohmann::json::object()) {
  if (format == "json") {
    nlohmann::json j = extra;
    j["n"] = y.size();
    j["values"] = y.values();
    j["missing"] = samples.missing();
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["step_reductions"] = r.outer.size();
    if (srr_db) j["srr_db"] = number(*srr_db);
    j["trace"] = trace_json(r);
    out << j.dump(2) << '\n';
    return;
  }
  csv::write_signal(out, y.view());
  err << "iterations=" << r.iterations << " converged=" << (r.converged ? "true" : "false")
      << " step_reductions=" << r.outer.size();
  if (srr_db) err << " srr_db=" << csv::format_double(*srr_db);
  for (const auto& [k, v] : extra.items()) err << ' ' << k << '=' << v.dump();
  err << '\n';
}

inline void print_uniqueness_text(std::ostream& out, const UniquenessReport& rep, std::optional<bool> oracle) {
  out << "N=" << rep.n << " r=" << rep.r << " s=" << rep.sparsity << '\n';
  out << std::setw(3) << "h" << std::setw(10) << "Q_2^h" << std::setw(12) << "S_2^(r-h)" << std::setw(9) << "margin"
      << '\n';
  for (const auto& row : rep.rows) {
    out << std::setw(3) << row.h << std::setw(10) << row.q_stride << std::setw(12) << row.s_term << std::setw(9)
        << row.margin << '\n';
  }
  out << "worst-case max s: " << rep.worst_case_max_s << '\n';
  if (oracle) out << "rank oracle: " << (*oracle ? "unique" : "not unique") << '\n';
  out << "verdict: " << (rep.unique ? "unique" : "not certified") << '\n';
}

inline nlohmann::json uniqueness_json(const UniquenessReport& rep, std::optional<bool> oracle) {
  nlohmann::json j;
  j["n"] = rep.n;
  j["r"] = rep.r;
  j["s"] = rep.sparsity;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rep.rows) {
    j["rows"].push_back({{"h", row.h}, {"Q", row.q_stride}, {"S", row.s_term}, {"margin", row.margin}});
  }
  j["worst_case_max_s"] = rep.worst_case_max_s;
  j["unique"] = rep.unique;
  j["verdict"] = rep.unique ? "unique" : "not certified";
  if (oracle) j["oracle_unique"] = *oracle;
  return j;
}

inline nlohmann::json record_json(const TrialRecord& r) {
  return {{"s", r.s},
          {"M", r.m},
          {"trial", r.trial},
          {"srr_db", number(r.srr_db)},
          {"full_recovery", r.full_recovery},
          {"iterations", r.iterations},
          {"elapsed_s", r.elapsed_seconds},
          {"detected_sparse", r.detected_sparse}};
}

inline nlohmann::json summary_json(const CellSummary& c) {
  return {{"s", c.s},
          {"M", c.m},
          {"mean_srr_db", number(c.mean_srr_db)},
          {"recovery_pct", c.recovery_pct},
          {"mean_iter", c.mean_iterations},
          {"mean_elapsed_s", c.mean_elapsed_seconds}};
}

inline void print_summary_text(std::ostream& out, const std::vector<CellSummary>& cells) {
  out << std::setw(4) << "s" << std::setw(6) << "M" << std::setw(14) << "mean_srr_db" << std::setw(14)
      << "recovery_pct" << std::setw(12) << "mean_iter" << std::setw(16) << "mean_elapsed_s" << '\n';
  out << std::fixed;
  for (const auto& c : cells) {
    out << std::setw(4) << c.s << std::setw(6) << c.m << std::setw(14) << std::setprecision(2) << c.mean_srr_db
        << std::setw(14) << std::setprecision(1) << c.recovery_pct << std::setw(12) << std::setprecision(1)
        << c.mean_iterations << std::setw(16) << std::setprecision(6) << c.mean_elapsed_seconds << '\n';
  }
  out << std::defaultfloat;
}

inline std::vector<std::size_t> default_s_values(std::size_t n) {
  std::vector<std::size_t> v;
  for (std::size_t s = 2; s <= n / 2; s *= 2) v.push_back(s);
  return v;
}

inline std::vector<std::size_t> default_m_values(std::size_t n) { return {n / 4, n / 2, 3 * n / 4}; }

}  // namespace detail

/// Builds the parser. Options bind into the returned state, so the App must
/// not outlive it.
struct CliState {
  GlobalOptions global;
  ReconFlags recon;
  ReconFlags grid_recon = [] {
    ReconFlags f;
    f.tmax_db = grid_recon_defaults().t_max_db;
    return f;
  }();

  std::string input, trace_path, srr_path, truth_path, summary_path;
  std::size_t n = 0, s = 2, m = 0, trial = 0, trials = 100, jobs = 1;
  double dt = 1.0, threshold_db = 100.0, detect_fraction = 0.5;
  std::optional<double> snr_db;
  std::optional<std::string> missing, available;
  std::string support, mode = "uniform";
  std::vector<std::size_t> s_values, m_values;
  bool oracle = false;
};

inline std::unique_ptr<CLI::App> build_app(CliState& st) {
  auto app = std::make_unique<CLI::App>(
      "Sparse signal reconstruction from incomplete samples by adaptive gradient descent on the "
      "l1 spectral measure.",
      "gradrec");
  app->config_formatter(std::make_shared<JsonConfig>());
  app->set_config("--config", "", "Read option values from a JSON file");
  app->add_option("--seed", st.global.seed, "Base seed for every random draw")->capture_default_str();
  app->add_option("--output", st.global.output, "Write the main result here instead of stdout");
  app->add_option("--format", st.global.format, "Output format (default: text for uniqueness, csv otherwise)")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  app->set_help_all_flag("--help-all", "Print help for every subcommand and exit");
  app->require_subcommand(1);
  app->fallthrough();

  auto* rec = app->add_subcommand("reconstruct", "Fill in the missing samples of a uniformly sampled signal");
  rec->add_option("--input", st.input, "Signal CSV 'n,value'; an empty value marks a missing sample")->required();
  rec->add_option("--trace", st.trace_path, "Write the per-iteration trace CSV here");
  rec->add_option("--srr", st.srr_path, "Complete reference signal CSV; reports the SRR against it");
  st.recon.attach(rec);

  auto* nu = app->add_subcommand("nonuniform", "Reconstruct a uniform-grid signal from nonuniform samples");
  nu->add_option("--input", st.input, "Sample CSV 't,value'")->required();
  nu->add_option("--n", st.n, "Number of grid slots N (even)")->required();
  nu->add_option("--dt", st.dt, "Grid spacing")->capture_default_str();
  nu->add_option("--trace", st.trace_path, "Write the per-iteration trace CSV here");
  nu->add_option("--srr", st.srr_path, "Complete reference signal CSV; reports the SRR against it");
  st.recon.attach(nu);

  auto* uq = app->add_subcommand("uniqueness", "Check the uniqueness certificate for a missing set and support");
  uq->add_option("--n", st.n, "Signal length N = 2^r")->required();
  auto* miss = uq->add_option("--missing", st.missing, "Comma-separated missing sample positions");
  auto* avail = uq->add_option("--available", st.available, "Comma-separated available positions (instead of --missing)");
  miss->excludes(avail);
  uq->add_option("--support", st.support, "Comma-separated DFT support indices")->required();
  uq->add_flag("--oracle", st.oracle, "Also run the exhaustive rank check (N <= 16)");

  auto add_gen_options = [&](CLI::App* sub) {
    sub->add_option("--n", st.n, "Signal length N")->required();
    sub->add_option("--s", st.s, "Sparsity s = 2K (even)")->capture_default_str();
    sub->add_option("--m", st.m, "Number of available samples M")->required();
    sub->add_option("--trial", st.trial, "Trial index, as in the grid output")->capture_default_str();
    sub->add_option("--truth", st.truth_path, "Also write the complete signal here");
  };
  auto* gen = app->add_subcommand("gen", "Generate a multitone test signal with missing samples");
  add_gen_options(gen);
  gen->add_option("--snr-db", st.snr_db, "Add white Gaussian noise at this SNR");

  auto* gnu = app->add_subcommand("gen-nonuniform", "Generate jittered samples of a multitone test signal");
  add_gen_options(gnu);
  gnu->add_option("--dt", st.dt, "Grid spacing")->capture_default_str();

  auto* grid = app->add_subcommand("grid", "Run a Monte Carlo grid over sparsity and available-sample count");
  grid->add_option("--n", st.n, "Signal length N")->required();
  grid->add_option("--s", st.s_values, "Sparsity values (default: 2, 4, 8, ... up to N/2)")->delimiter(',');
  grid->add_option("--m", st.m_values, "Available-sample counts (default: N/4, N/2, 3N/4)")->delimiter(',');
  grid->add_option("--trials", st.trials, "Realizations per cell")->capture_default_str();
  grid->add_option("--snr-db", st.snr_db, "Add white Gaussian noise at this SNR");
  grid->add_option("--mode", st.mode, "Sampling mode")
      ->check(CLI::IsMember({"uniform", "nonuniform"}))
      ->capture_default_str();
  grid->add_option("--threshold-db", st.threshold_db, "SRR above which a trial counts as a full recovery")
      ->capture_default_str();
  grid->add_option("--detect-fraction", st.detect_fraction,
                   "A result counts as sparse when its l1/4 measure is below this fraction of N")
      ->capture_default_str();
  grid->add_option("--dt", st.dt, "Grid spacing for nonuniform mode")->capture_default_str();
  grid->add_option("--jobs", st.jobs, "Worker threads")->capture_default_str();
  grid->add_option("--summary", st.summary_path, "Write the per-cell summary CSV here");
  st.grid_recon.attach(grid);
  return app;
}

namespace detail {

inline int do_reconstruct(const CliState& st, std::ostream& out, std::ostream& err) {
  auto in = open_input(st.input, "--input");
  const auto ms = csv::read_masked_signal(in);
  const auto cfg = st.recon.config();
  const auto r = reconstruct(ms.values, ms.samples, cfg);
  std::optional<double> srr_db;
  if (!st.srr_path.empty()) srr_db = srr(read_truth(st.srr_path), r.reconstructed);
  if (!st.trace_path.empty()) write_file(st.trace_path, "--trace", [&](std::ostream& f) { csv::write_trace(f, r); });
  Sink sink(st.global.output, out);
  report_recon(sink.get(), err, st.global.format, r.reconstructed, ms.samples, r, srr_db);
  return 0;
}

inline int do_nonuniform(const CliState& st, std::ostream& out, std::ostream& err) {
  auto in = open_input(st.input, "--input");
  const auto samples = csv::assign_slots(csv::read_nonuniform(in), st.n, st.dt);
  const auto cfg = st.recon.config();
  const auto res = reconstruct_nonuniform(samples, st.n, st.dt, cfg);
  std::optional<double> srr_db;
  if (!st.srr_path.empty()) srr_db = srr(read_truth(st.srr_path), res.recon.reconstructed);
  if (!st.trace_path.empty()) {
    write_file(st.trace_path, "--trace", [&](std::ostream& f) { csv::write_trace(f, res.recon); });
  }
  std::vector<bool> mask(st.n, true);
  for (const auto& [slot, v] : samples) mask[slot] = false;
  Sink sink(st.global.output, out);
  report_recon(sink.get(), err, st.global.format, res.recon.reconstructed, SampleSet(std::move(mask)), res.recon,
               srr_db, {{"condition", res.condition_estimate}});
  return 0;
}

inline int do_uniqueness(const CliState& st, std::ostream& out) {
  if (!st.missing && !st.available) throw InputError("uniqueness: one of --missing or --available is required");
  const auto samples = st.missing ? SampleSet::from_missing(st.n, csv::parse_index_list(*st.missing))
                                  : SampleSet::from_available(st.n, csv::parse_index_list(*st.available));
  const auto support = csv::parse_index_list(st.support);
  const auto rep = check_uniqueness(support, samples);
  std::optional<bool> oracle;
  if (st.oracle) oracle = oracle_unique(support, samples, support.size());
  Sink sink(st.global.output, out);
  if (st.global.format == "json") {
    sink.get() << uniqueness_json(rep, oracle).dump(2) << '\n';
  } else if (st.global.format == "csv") {
    sink.get() << "h,Q,S,margin\n";
    for (const auto& row : rep.rows) {
      sink.get() << row.h << ',' << row.q_stride << ',' << row.s_term << ',' << row.margin << '\n';
    }
  } else {
    print_uniqueness_text(sink.get(), rep, oracle);
  }
  return 0;
}

inline int do_gen(const CliState& st, std::ostream& out) {
  const auto inst = make_trial_instance(st.n, st.s, st.m, st.global.seed, st.trial, st.snr_db);
  if (!st.truth_path.empty()) {
    write_file(st.truth_path, "--truth", [&](std::ostream& f) { csv::write_signal(f, inst.truth.signal.view()); });
  }
  Sink sink(st.global.output, out);
  if (st.global.format == "json") {
    nlohmann::json j{{"n", st.n},
                     {"values", inst.observed.values()},
                     {"missing", inst.samples.missing()},
                     {"support", inst.truth.support}};
    sink.get() << j.dump(2) << '\n';
  } else {
    csv::write_signal(sink.get(), inst.observed.view(), &inst.samples);
  }
  return 0;
}

inline int do_gen_nonuniform(const CliState& st, std::ostream& out) {
  if (st.n % 2 != 0) throw InputError("--n: nonuniform sampling needs an even N, got " + std::to_string(st.n));
  const auto inst = make_trial_instance(st.n, st.s, st.m, st.global.seed, st.trial);
  const auto samples = trial_jittered_samples(inst, st.s, st.global.seed, st.trial, st.dt);
  if (!st.truth_path.empty()) {
    write_file(st.truth_path, "--truth", [&](std::ostream& f) { csv::write_signal(f, inst.truth.signal.view()); });
  }
  Sink sink(st.global.output, out);
  if (st.global.format == "json") {
    auto rows = nlohmann::json::array();
    for (const auto& [slot, v] : samples) rows.push_back({{"t", v.t}, {"value", v.value}});
    sink.get() << nlohmann::json{{"n", st.n}, {"dt", st.dt}, {"samples", rows}}.dump(2) << '\n';
  } else {
    csv::write_nonuniform(sink.get(), samples);
  }
  return 0;
}

inline int do_grid(const CliState& st, std::ostream& out, std::ostream& err) {
  GridSpec spec;
  spec.n = st.n;
  spec.s_values = st.s_values.empty() ? default_s_values(st.n) : st.s_values;
  spec.m_values = st.m_values.empty() ? default_m_values(st.n) : st.m_values;
  spec.trials = st.trials;
  spec.seed = st.global.seed;
  spec.noise_snr_db = st.snr_db;
  spec.mode = st.mode == "nonuniform" ? SamplingMode::nonuniform : SamplingMode::uniform;
  spec.full_recovery_threshold_db = st.threshold_db;
  spec.detection_fraction = st.detect_fraction;
  spec.dt = st.dt;
  spec.recon = st.grid_recon.config();
  spec.jobs = st.jobs;
  const auto records = run_grid(spec);
  const auto cells = aggregate(records);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.error.empty() ? 0 : 1;
  if (failed) err << failed << " trial(s) failed; first error: "
                  << std::find_if(records.begin(), records.end(), [](const auto& r) { return !r.error.empty(); })->error
                  << '\n';
  if (!st.summary_path.empty()) {
    write_file(st.summary_path, "--summary", [&](std::ostream& f) { write_summary_csv(f, cells); });
  }
  Sink sink(st.global.output, out);
  if (st.global.format == "json") {
    nlohmann::json j{{"trials", nlohmann::json::array()}, {"summary", nlohmann::json::array()}};
    for (const auto& r : records) j["trials"].push_back(record_json(r));
    for (const auto& c : cells) j["summary"].push_back(summary_json(c));
    sink.get() << j.dump(2) << '\n';
  } else if (st.global.format == "text") {
    print_summary_text(sink.get(), cells);
  } else {
    write_trials_csv(sink.get(), records);
  }
  return 0;
}

}  // namespace detail

/// Exit codes: 0 success, 1 bad input or usage, 2 numerical failure.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliState st;
  auto app = build_app(st);
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app->parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app->help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    const auto* sub = app->get_subcommands().front();
    const std::string name = sub->get_name();
    if (st.global.format.empty()) st.global.format = name == "uniqueness" ? "text" : "csv";
    if (name == "reconstruct") return detail::do_reconstruct(st, out, err);
    if (name == "nonuniform") return detail::do_nonuniform(st, out, err);
    if (name == "uniqueness") return detail::do_uniqueness(st, out);
    if (name == "gen") return detail::do_gen(st, out);
    if (name == "gen-nonuniform") return detail::do_gen_nonuniform(st, out);
    return detail::do_grid(st, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gradrec::cli

#endif  // GRADREC_TOOLS_CLI_HPP
