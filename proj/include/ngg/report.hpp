#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "harness.hpp"

namespace ngg::report {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Non-finite values become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

// %.17g; exact for round trips through text.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json header(const std::string& command) {
  return json{{"schema", kSchemaVersion}, {"tool", "ngg"}, {"build", build_id()}, {"command", command}};
}

inline json estimate_json(const SpectrumEstimate& est) {
  return json{{"R", est.R},
              {"stages", numbers(est.stage_values)},
              {"ordering", est.ordering.to_string()},
              {"score", number(est.score)}};
}

inline json adapt_rows_json(const std::vector<AdaptRow>& rows) {
  json a = json::array();
  for (const auto& r : rows)
    a.push_back(json{{"R", r.R}, {"bias", number(r.bias)}, {"penalty", number(r.penalty)},
                     {"objective", number(r.objective)}});
  return a;
}

inline json config_json(const ExperimentConfig& c) {
  return json{{"space", c.space.to_string()},
              {"envelope", c.envelope_spec},
              {"n", c.n_values},
              {"replicates", c.replicates},
              {"r_max", c.r_max},
              {"kappa", number(c.kappa)},
              {"include_zero", c.include_zero},
              {"fixed_r", c.fixed_R ? json(*c.fixed_R) : json(nullptr)},
              {"seed", c.base_seed},
              {"truth_degree", c.truth_degree}};
}

// Self-describing report. Wall-clock times are deliberately left out so that
// identical configurations give byte-identical files; they go to the CSV.
inline json experiment_json(const ExperimentReport& rep) {
  json j = header("simulate");
  j["config"] = config_json(rep.config);
  j["truth"] = json{{"coefficients", numbers(rep.truth.coefficients)},
                    {"analytic", rep.truth.analytic},
                    {"tail_mass", number(rep.truth.tail_mass)}};
  json records = json::array();
  for (const auto& r : rep.records) {
    json rec{{"n", r.n}, {"replicate", r.replicate}, {"seed", r.seed},
             {"error", r.ok() ? json(nullptr) : json(r.error)}};
    if (r.ok()) {
      rec["edges"] = r.edges;
      rec["selected_R"] = r.selected_R;
      json ests = json::array();
      for (const auto& [R, est] : r.estimates) {
        auto e = estimate_json(est);
        e["risk_truncated"] = number(r.risk_fixed.at(R));
        e["risk_full"] = number(r.risk_full.at(R));
        ests.push_back(std::move(e));
      }
      rec["estimates"] = std::move(ests);
      rec["adapt"] = adapt_rows_json(r.per_R);
      rec["selected_risk"] = number(r.selected_risk);
      rec["coefficient_error"] = numbers(r.coef_error);
    }
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  json sums = json::array();
  for (const auto& s : rep.summaries) {
    json hist = json::object();
    for (auto [R, count] : s.selection_histogram) hist[std::to_string(R)] = count;
    json per = json::array();
    for (const auto& r : s.per_R)
      per.push_back(json{{"R", r.R},
                         {"mean_risk_truncated", number(r.mean_risk_fixed)},
                         {"mean_risk_full", number(r.mean_risk_full)},
                         {"mean_stage", numbers(r.mean_stage)},
                         {"bias", numbers(r.bias)},
                         {"mean_abs_error", numbers(r.mean_abs_error)}});
    sums.push_back(json{{"n", s.n},
                        {"succeeded", s.succeeded},
                        {"failed", s.failed},
                        {"selection_histogram", std::move(hist)},
                        {"mean_selected_risk", number(s.mean_selected_risk)},
                        {"median_selected_risk", number(s.median_selected_risk)},
                        {"per_R", std::move(per)}});
  }
  j["summaries"] = std::move(sums);
  j["risk_slope"] = optional_number(rep.risk_slope);
  return j;
}

// One row per replicate, including per-phase wall times.
inline void write_replicates_csv(std::ostream& out, const ExperimentReport& rep) {
  out << "n,replicate,seed,ok,selected_R,edges,selected_risk,stages,t_sample,t_eigensolve,t_fit,t_adapt,error\n";
  for (const auto& r : rep.records) {
    std::string stages;
    if (r.ok())
      for (double v : r.estimates.at(r.selected_R).stage_values)
        stages += (stages.empty() ? "" : ";") + format_double(v);
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    out << r.n << "," << r.replicate << "," << r.seed << "," << (r.ok() ? 1 : 0) << ","
        << (r.ok() ? std::to_string(r.selected_R) : "") << "," << r.edges << ","
        << (r.ok() ? format_double(r.selected_risk) : "") << "," << stages << ","
        << format_double(r.times.sample) << "," << format_double(r.times.eigensolve) << ","
        << format_double(r.times.fit) << "," << format_double(r.times.adapt) << "," << err << "\n";
  }
}

// One row per (n, R): the fixed-resolution risk curve.
inline void write_risk_csv(std::ostream& out, const ExperimentReport& rep) {
  out << "n,R,mean_risk_truncated,mean_risk_full,selected\n";
  for (const auto& s : rep.summaries)
    for (const auto& r : s.per_R) {
      const auto it = s.selection_histogram.find(r.R);
      out << s.n << "," << r.R << "," << format_double(r.mean_risk_fixed) << ","
          << format_double(r.mean_risk_full) << "," << (it == s.selection_histogram.end() ? 0 : it->second)
          << "\n";
    }
}

}  // namespace ngg::report
