#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adapt.hpp"
#include "envelope.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "report.hpp"
#include "special_fn.hpp"
#include "spectral.hpp"

namespace ngg::cli {

using report::json;

enum ExitCode : int { kOk = 0, kRuntime = 1, kUsage = 2 };

// Bad flags or flag combinations; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline LatentSpace parse_space(const std::string& text) {
  try {
    return LatentSpace::parse(text);
  } catch (const std::exception& e) {
    throw UsageError("invalid --space '" + text + "': " + e.what());
  }
}

// --space wins over --dim; --dim d means sphere:d.
inline LatentSpace resolve_space(const std::string& space, std::optional<int> dim) {
  if (!space.empty() && dim) throw UsageError("--space and --dim are mutually exclusive");
  if (dim) return parse_space("sphere:" + std::to_string(*dim));
  return parse_space(space.empty() ? "sphere:3" : space);
}

// p1..p6, const:a, or a coefficient file with lines "l value".
inline Envelope parse_envelope(const std::string& spec, const LatentSpace& space) {
  static const std::regex builtin(R"(p(\d+))");
  std::smatch m;
  if (std::regex_match(spec, m, builtin)) {
    const int id = std::stoi(m[1]);
    if (id < 1 || id > 6) throw UsageError("unknown envelope '" + spec + "' (built-ins are p1..p6)");
    return builtin_envelope(id);
  }
  for (const std::string prefix : {"const:", "constant:"})
    if (spec.rfind(prefix, 0) == 0) {
      double a = 0;
      if (!io::detail::parse_number(std::string_view(spec).substr(prefix.size()), a))
        throw UsageError("invalid constant envelope '" + spec + "'");
      return constant_envelope(a);
    }
  if (!std::filesystem::is_regular_file(spec))
    throw UsageError("unknown envelope '" + spec + "' (expected p1..p6, const:a or a coefficient file)");
  const auto coeffs = io::read_coefficients(spec);
  const HarmonicBasis basis(space, static_cast<int>(coeffs.size()) - 1);
  return envelope_from_coefficients(basis, coeffs, spec);
}

inline std::string output_stem(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.extension() == ".json") return (p.parent_path() / p.stem()).string();
  return path;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("write failed for " + path);
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_text(path, text);
}

inline std::vector<double> grid(int points) {
  if (points < 2) throw UsageError("--grid needs at least 2 points");
  std::vector<double> t(points);
  for (int k = 0; k < points; ++k) t[k] = k + 1 == points ? 1.0 : -1.0 + 2.0 * k / (points - 1);
  return t;
}

inline json grid_json(const Envelope& p, const std::vector<double>& ts) {
  std::vector<double> vs;
  for (double t : ts) vs.push_back(p(t));
  return json{{"t", report::numbers(ts)}, {"p", report::numbers(vs)}};
}

inline std::string grid_csv(const Envelope& p, const std::vector<double>& ts) {
  std::string s = "t,p\n";
  for (double t : ts) s += report::format_double(t) + "," + report::format_double(p(t)) + "\n";
  return s;
}

struct SimulateFlags {
  std::string space, envelope, out, dump_dir, dump_format = "rle";
  std::vector<std::int64_t> n;
  int replicates = 1, r_max = 4, threads = 0, truth_degree = 64;
  double kappa = 0.25;
  std::uint64_t seed = 0;
  std::optional<int> fixed_r;
  bool include_zero = false;
};

struct EstimateFlags {
  std::string input, space, out, format = "json";
  std::optional<int> dim;
  int r_max = 4, grid = 201;
  double kappa = 0.25;
  bool include_zero = false;
};

struct CoefsFlags {
  std::string envelope, space, out;
  std::optional<int> dim;
  int degree = 6;
  bool quadrature = false;
};

struct EvalFlags {
  std::string estimate, stages, envelope, space, out;
  std::optional<int> dim;
  int grid = 201;
  bool unclamped = false;
};

inline int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  cfg.space = parse_space(f.space.empty() ? "sphere:3" : f.space);
  if (!cfg.space.samplable()) throw UsageError("latent sampling is not supported for " + cfg.space.to_string());
  cfg.envelope = parse_envelope(f.envelope, cfg.space);
  cfg.envelope_spec = f.envelope;
  cfg.n_values = f.n;
  cfg.replicates = f.replicates;
  cfg.r_max = f.r_max;
  cfg.kappa = f.kappa;
  cfg.include_zero = f.include_zero;
  cfg.fixed_R = f.fixed_r;
  cfg.base_seed = f.seed;
  cfg.threads = f.threads;
  cfg.truth_degree = f.truth_degree;
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  } catch (const LimitError& e) {
    throw UsageError(e.what());
  }

  const auto rep = run_experiment(cfg);
  write_text(f.out, report::experiment_json(rep).dump(2) + "\n");
  const auto stem = output_stem(f.out);
  {
    std::ostringstream csv;
    report::write_replicates_csv(csv, rep);
    write_text(stem + ".replicates.csv", csv.str());
  }
  {
    std::ostringstream csv;
    report::write_risk_csv(csv, rep);
    write_text(stem + ".risk.csv", csv.str());
  }
  if (!f.dump_dir.empty()) {
    std::filesystem::create_directories(f.dump_dir);
    const auto fmt = f.dump_format == "dense" ? io::AdjacencyFormat::Dense : io::AdjacencyFormat::Rle;
    for (const auto& r : rep.records) {
      const auto g = simulate_graph(cfg.space, cfg.envelope, r.n, r.seed, false);
      const auto path = std::filesystem::path(f.dump_dir) /
                        ("adjacency_n" + std::to_string(r.n) + "_r" + std::to_string(r.replicate) + ".txt");
      io::write_adjacency(path.string(), g.adjacency, fmt);
    }
  }

  int failed = 0;
  for (const auto& s : rep.summaries) {
    failed += s.failed;
    out << "n=" << s.n << " ok=" << s.succeeded << " failed=" << s.failed << " R^ histogram:";
    for (auto [R, c] : s.selection_histogram) out << " " << R << ":" << c;
    out << " mean delta2^2=" << report::format_double(s.mean_selected_risk) << "\n";
  }
  for (const auto& r : rep.records)
    if (!r.ok()) err << "replicate n=" << r.n << " r=" << r.replicate << " failed: " << r.error << "\n";
  return failed == 0 ? kOk : kRuntime;
}

inline int cmd_estimate(const EstimateFlags& f, std::ostream& out, std::ostream& err) {
  const auto space = resolve_space(f.space, f.dim);
  if (f.r_max < (f.include_zero ? 0 : 1)) throw UsageError("--r-max must be at least 1");
  if (f.r_max > kDefaultOrderingCap)
    throw UsageError("--r-max exceeds the ordering cap " + std::to_string(kDefaultOrderingCap));
  if (!(f.kappa > 0)) throw UsageError("--kappa must be positive");
  const auto ts = grid(f.grid);

  const auto graph = io::read_graph(f.input);
  for (const auto& w : graph.warnings) err << "warning: " << w << "\n";
  const std::int64_t n = graph.adjacency.size();
  const HarmonicBasis basis(space, f.r_max);
  const std::int64_t cum = basis.cumulative_dim(f.r_max);
  if (n < cum)
    throw UsageError("graph has n = " + std::to_string(n) + " nodes but R~(" + std::to_string(f.r_max) +
                     ") = " + std::to_string(cum) + "; try a smaller --r-max");
  if (2 * cum > n)
    err << "warning: 2 R~(r_max) = " << 2 * cum << " exceeds n = " << n
        << "; the adaptive selection is outside its guaranteed regime\n";

  const auto spectrum = eigenvalues_symmetric(graph.adjacency.to_dense(1.0 / static_cast<double>(n)));
  AdaptConfig cfg{f.r_max, f.kappa, n, f.include_zero};
  cfg.validate(basis, false);
  const auto result = adaptive_estimate(spectrum, basis, cfg);

  json j = report::header("estimate");
  j["config"] = json{{"input", f.input},       {"input_format", graph.format}, {"space", space.to_string()},
                     {"r_max", f.r_max},       {"kappa", report::number(f.kappa)},
                     {"include_zero", f.include_zero}, {"grid", f.grid}};
  j["n"] = n;
  j["edges"] = graph.adjacency.edge_count();
  j["warnings"] = graph.warnings;
  j["spectrum"] = report::numbers(spectrum.values);
  json per = json::array();
  for (const auto& row : result.per_R) {
    auto e = report::estimate_json(result.estimates.at(row.R));
    e["bias"] = report::number(row.bias);
    e["penalty"] = report::number(row.penalty);
    e["objective"] = report::number(row.objective);
    per.push_back(std::move(e));
  }
  j["per_R"] = std::move(per);
  j["selected_R"] = result.selected_R;
  j["stage_values"] = report::numbers(result.estimates.at(result.selected_R).stage_values);
  j["envelope"] = grid_json(result.envelope, ts);

  if (f.format == "json") {
    emit(f.out, j.dump(2) + "\n", out);
  } else {
    emit(f.out, grid_csv(result.envelope, ts), out);
  }
  if (!f.out.empty() && f.out != "-")
    out << "n=" << n << " selected R=" << result.selected_R << " -> " << f.out << "\n";
  return kOk;
}

inline int cmd_coefs(const CoefsFlags& f, std::ostream& out, std::ostream&) {
  const auto space = resolve_space(f.space, f.dim);
  if (f.degree < 0) throw UsageError("--degree must be non-negative");
  const auto p = parse_envelope(f.envelope, space);
  const HarmonicBasis basis(space, f.degree);
  std::vector<double> c(f.degree + 1, 0.0);
  if (!f.quadrature && p.has_known_coeffs_for(space)) {
    for (auto [l, v] : *p.known_coeffs)
      if (l <= f.degree) c[l] = v;
  } else {
    c = envelope_coefficients(basis, p, f.degree);
  }
  std::string s = "l,d_l,coefficient\n";
  for (int l = 0; l <= f.degree; ++l)
    s += std::to_string(l) + "," + std::to_string(basis.dim(l)) + "," + report::format_double(c[l]) + "\n";
  emit(f.out, s, out);
  return kOk;
}

inline std::vector<double> parse_stage_list(const std::string& text) {
  std::vector<double> v;
  for (auto tok : io::detail::split_ws(text)) {
    double x = 0;
    if (!io::detail::parse_number(tok, x)) throw UsageError("invalid --stages entry '" + std::string(tok) + "'");
    v.push_back(x);
  }
  if (v.empty()) throw UsageError("--stages is empty");
  return v;
}

inline int cmd_eval(const EvalFlags& f, std::ostream& out, std::ostream&) {
  const int sources = !f.estimate.empty() + !f.stages.empty() + !f.envelope.empty();
  if (sources != 1) throw UsageError("give exactly one of --estimate, --stages, --envelope");
  const auto ts = grid(f.grid);
  LatentSpace space = resolve_space(f.space, f.dim);
  std::vector<double> stages;
  if (!f.estimate.empty()) {
    if (!f.space.empty() || f.dim) throw UsageError("--estimate carries its own space");
    std::ifstream in(f.estimate);
    if (!in) throw ParseError("cannot open " + f.estimate);
    json j;
    try {
      j = json::parse(in);
      space = LatentSpace::parse(j.at("config").at("space").get<std::string>());
      stages = j.at("stage_values").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ParseError(f.estimate + ": not an estimate report (" + e.what() + ")");
    }
  } else if (!f.stages.empty()) {
    stages = parse_stage_list(f.stages);
  }
  Envelope p;
  if (!stages.empty()) {
    const HarmonicBasis basis(space, static_cast<int>(stages.size()) - 1);
    SpectrumEstimate est;
    est.R = static_cast<int>(stages.size()) - 1;
    est.stage_values = stages;
    p = reconstruct_envelope(est, basis, !f.unclamped);
  } else {
    p = parse_envelope(f.envelope, space);
  }
  emit(f.out, grid_csv(p, ts), out);
  return kOk;
}

}  // namespace detail

// Entry point shared by the executable and the tests. args excludes the
// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Nonparametric latent-distance graphs: simulate, estimate envelopes from spectra."};
  app.name("ngg");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  detail::SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiment: simulate graphs and estimate the envelope");
  simulate->add_option("--space", sim.space, "Latent space: sphere:d, rp:d or cp:d (default sphere:3)");
  simulate->add_option("--envelope", sim.envelope, "p1..p6, const:a, or a coefficient file")->required();
  simulate->add_option("--n", sim.n, "Graph size(s), comma separated")->required()->delimiter(',')->check(
      CLI::PositiveNumber);
  simulate->add_option("--replicates", sim.replicates, "Replicates per n")->check(CLI::PositiveNumber);
  simulate->add_option("--r-max", sim.r_max, "Largest candidate resolution")->capture_default_str();
  simulate->add_option("--kappa", sim.kappa, "Penalty constant")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Base seed; replicate r uses seed + r");
  simulate->add_option("--out", sim.out, "Report path (JSON); CSV tables are written next to it")->required();
  simulate->add_option("--fixed-r", sim.fixed_r, "Fit only this resolution (no adaptation)");
  simulate->add_flag("--include-zero", sim.include_zero, "Add R = 0 to the candidate resolutions");
  auto* dump = simulate->add_option("--dump-adjacency", sim.dump_dir, "Directory for per-replicate adjacency dumps");
  simulate->add_option("--dump-format", sim.dump_format, "rle or dense")
      ->check(CLI::IsMember({"rle", "dense"}))
      ->needs(dump);
  simulate->add_option("--threads", sim.threads, "Worker threads (capped by NGG_THREADS)");
  simulate->add_option("--truth-degree", sim.truth_degree, "Highest degree of the reference spectrum")
      ->capture_default_str();

  detail::EstimateFlags est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the envelope from an observed graph");
  estimate->add_option("--input", est.input, "Edge list or adjacency dump")->required();
  auto* dim_opt = estimate->add_option("--dim", est.dim, "Sphere dimension d (latent space S^{d-1})");
  estimate->add_option("--space", est.space, "Latent space: sphere:d, rp:d, cp:d, hp:d, op")->excludes(dim_opt);
  estimate->add_option("--r-max", est.r_max, "Largest candidate resolution")->capture_default_str();
  estimate->add_option("--kappa", est.kappa, "Penalty constant")->capture_default_str();
  estimate->add_option("--grid", est.grid, "Envelope grid points on [-1, 1]")->capture_default_str();
  estimate->add_option("--out", est.out, "Output path (default stdout)");
  estimate->add_option("--format", est.format, "json or csv (envelope grid only)")
      ->check(CLI::IsMember({"json", "csv"}));
  estimate->add_flag("--include-zero", est.include_zero, "Add R = 0 to the candidate resolutions");

  detail::CoefsFlags co;
  auto* coefs = app.add_subcommand("coefs", "Print true envelope coefficients and multiplicities as CSV");
  coefs->add_option("--envelope", co.envelope, "p1..p6, const:a, or a coefficient file")->required();
  auto* co_dim = coefs->add_option("--dim", co.dim, "Sphere dimension d");
  coefs->add_option("--space", co.space, "Latent space")->excludes(co_dim);
  coefs->add_option("--degree", co.degree, "Highest degree R")->capture_default_str();
  coefs->add_option("--out", co.out, "Output path (default stdout)");
  coefs->add_flag("--quadrature", co.quadrature, "Integrate numerically even when exact values are known");

  detail::EvalFlags ev;
  auto* eval = app.add_subcommand("eval-envelope", "Evaluate an envelope on a grid as CSV");
  eval->add_option("--estimate", ev.estimate, "JSON written by the estimate command");
  eval->add_option("--stages", ev.stages, "Stage values p^_0,...,p^_R");
  eval->add_option("--envelope", ev.envelope, "p1..p6, const:a, or a coefficient file");
  auto* ev_dim = eval->add_option("--dim", ev.dim, "Sphere dimension d");
  eval->add_option("--space", ev.space, "Latent space")->excludes(ev_dim);
  eval->add_option("--grid", ev.grid, "Grid points on [-1, 1]")->capture_default_str();
  eval->add_option("--out", ev.out, "Output path (default stdout)");
  eval->add_flag("--unclamped", ev.unclamped, "Skip clamping the reconstruction to [0, 1]");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsage;
  }

  try {
    if (simulate->parsed()) return detail::cmd_simulate(sim, out, err);
    if (estimate->parsed()) return detail::cmd_estimate(est, out, err);
    if (coefs->parsed()) return detail::cmd_coefs(co, out, err);
    if (eval->parsed()) return detail::cmd_eval(ev, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace ngg::cli
