#pragma once

// Command implementations behind the fermsim executable. Each returns a
// process exit code: 0 success, 1 usage error, 2 model error, 3 numerical
// invariant violation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fermsim/error.hpp"
#include "fermsim/evolver.hpp"
#include "fermsim/liouvillian.hpp"
#include "fermsim/model.hpp"
#include "fermsim/observables.hpp"
#include "fermsim/operators.hpp"
#include "fermsim/presets.hpp"

namespace fermsim::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kModel = 2, kNumerical = 3 };

struct ObservableSet {
  bool occupations = true;
  bool cross_populations = true;
  bool concurrence = true;
  bool linear_entropy = true;
  bool diagnostics = true;
  bool explicit_choice = false;  // false: drop groups that do not apply to the model

  /// Comma-separated subset of occupations, cross_populations, concurrence,
  /// linear_entropy, diagnostics.
  static ObservableSet parse(std::string_view list) {
    ObservableSet set{false, false, false, false, false, true};
    std::size_t pos = 0;
    while (pos <= list.size()) {
      const std::size_t comma = std::min(list.find(',', pos), list.size());
      const std::string_view item = list.substr(pos, comma - pos);
      if (item == "occupations") set.occupations = true;
      else if (item == "cross_populations") set.cross_populations = true;
      else if (item == "concurrence") set.concurrence = true;
      else if (item == "linear_entropy") set.linear_entropy = true;
      else if (item == "diagnostics") set.diagnostics = true;
      else if (!item.empty()) throw std::invalid_argument("unknown observable '" + std::string(item) + "'");
      pos = comma + 1;
    }
    return set;
  }
};

struct RunConfig {
  std::string model_path;  // exactly one of model_path / preset
  std::string preset;
  double t_max = 0.0;
  double dt_out = 0.0;
  Method method = Method::expm;
  ObservableSet observables;
  std::string out;
  std::optional<double> probe_coupling;  // overrides the 1-5 density term
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) out += (c ? "," : "") + table.header[c];
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_number(row[c]);
    out += '\n';
  }
  return out;
}

/// Columns: t, n1..nN, p_1001, p_0110, p_1010, p_0101, concurrence,
/// linear_entropy, trace_dev, min_eig. Two-qubit quantities and the linear
/// entropy refer to the reduced state of sites 1..min(N, 4).
inline CsvTable observable_table(const Trajectory& traj, ObservableSet obs) {
  const int n = traj.n_sites;
  const bool molecule = n >= 4;
  if (!molecule) {
    if (obs.explicit_choice && (obs.cross_populations || obs.concurrence))
      throw std::invalid_argument("cross_populations and concurrence need at least 4 sites");
    obs.cross_populations = obs.concurrence = false;
  }
  std::vector<int> keep;
  for (int s = 1; s <= std::min(n, 4); ++s) keep.push_back(s);

  CsvTable table;
  table.header.push_back("t");
  if (obs.occupations)
    for (int i = 1; i <= n; ++i) table.header.push_back("n" + std::to_string(i));
  if (obs.cross_populations) table.header.insert(table.header.end(), {"p_1001", "p_0110", "p_1010", "p_0101"});
  if (obs.concurrence) table.header.push_back("concurrence");
  if (obs.linear_entropy) table.header.push_back("linear_entropy");
  if (obs.diagnostics) table.header.insert(table.header.end(), {"trace_dev", "min_eig"});

  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Operator rho = traj.density(k);
    const Operator reduced = n > 4 ? partial_trace(rho, keep) : rho;
    std::vector<double> row{traj.times[k]};
    if (obs.occupations)
      for (int i = 1; i <= n; ++i) row.push_back(occupation(rho, i));
    if (obs.cross_populations) {
      const CrossPopulations p = cross_populations(reduced);
      row.insert(row.end(), {p.p1001, p.p0110, p.p1010, p.p0101});
    }
    if (obs.concurrence) row.push_back(concurrence(extract_two_qubit(reduced).state));
    if (obs.linear_entropy) row.push_back(linear_entropy(reduced));
    if (obs.diagnostics) row.insert(row.end(), {traj.diagnostics[k].trace_deviation, traj.diagnostics[k].min_eigenvalue});
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline ModelSpec resolve_model(const RunConfig& config) {
  ModelSpec spec = config.preset.empty() ? load_model(config.model_path) : load_preset(config.preset);
  if (config.probe_coupling) spec = with_probe_coupling(std::move(spec), *config.probe_coupling);
  return spec;
}

inline Trajectory simulate(const ModelSpec& spec, double t_max, double dt_out, Method method) {
  return evolve(assemble(spec), initial_density(spec), TimeGrid::uniform(t_max, dt_out), {method, std::nullopt});
}

inline int write_file(const std::filesystem::path& path, const std::string& contents, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    err << "error: cannot write " << path.string() << "\n";
    return kUsage;
  }
  out << contents;
  out.close();
  if (!out) {
    err << "error: failed writing " << path.string() << "\n";
    return kUsage;
  }
  return kSuccess;
}

inline int cmd_run(const RunConfig& config, std::ostream& err) {
  if (config.model_path.empty() == config.preset.empty()) {
    err << "error: give exactly one of --model or --preset\n";
    return kUsage;
  }
  if (!config.preset.empty() && !preset_text(config.preset)) {
    err << "error: unknown preset '" << config.preset << "'\n";
    return kUsage;
  }
  if (!(config.t_max > 0.0) || !(config.dt_out > 0.0)) {
    err << "error: --t-max and --dt-out must be positive\n";
    return kUsage;
  }
  if (config.out.empty()) {
    err << "error: --out is required\n";
    return kUsage;
  }
  try {
    const ModelSpec spec = resolve_model(config);
    const Trajectory traj = simulate(spec, config.t_max, config.dt_out, config.method);
    const std::string csv = to_csv(observable_table(traj, config.observables));
    if (const int rc = write_file(config.out, csv, err); rc != kSuccess) return rc;
    if (const std::string bad = health_violation(traj); !bad.empty()) {
      err << "error: trajectory health check failed: " << bad << "\n";
      return kNumerical;
    }
    return kSuccess;
  } catch (const ModelError& e) {
    err << "error: " << (config.preset.empty() ? config.model_path + ": " : "") << e.what() << "\n";
    return kModel;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

struct CheckResult {
  std::string group;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_deviation < tolerance; }
};

inline std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> results;

  {
    double dev = 0.0;
    for (int d = 1; d <= 6; ++d) {
      const Operator id = identity_on(d);
      for (int m = 1; m <= d; ++m)
        for (int l = 1; l <= d; ++l) {
          const Operator dm = annihilator(m, d), dl = annihilator(l, d);
          dev = std::max(dev, (anticommutator(dm, dl.adjoint()) - (m == l ? id : Operator(0 * id))).cwiseAbs().maxCoeff());
          dev = std::max(dev, anticommutator(dm, dl).cwiseAbs().maxCoeff());
        }
    }
    results.push_back({"jw_anticommutation", dev, 1e-12});
  }
  {
    double dev = 0.0;
    for (int n = 1; n <= 5; ++n) {
      const Operator id = identity_on(n);
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
          const Operator si = system_jump(i, n), sj = system_jump(j, n);
          dev = std::max(dev, (anticommutator(si, sj.adjoint()) - (i == j ? id : Operator(0 * id))).cwiseAbs().maxCoeff());
          dev = std::max(dev, anticommutator(si, sj).cwiseAbs().maxCoeff());
        }
    }
    results.push_back({"system_jump_anticommutation", dev, 1e-12});
  }
  {
    double dev = 0.0;
    double trace_dev = 0.0;
    for (int n = 1; n <= 4; ++n)
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
          for (Sign s : {Sign::plus, Sign::minus}) {
            const Operator recipe = build_dissipator(i, j, s, n);
            dev = std::max(dev, (recipe - oracle_dissipator(i, j, s, n)).cwiseAbs().maxCoeff());
            trace_dev = std::max(trace_dev, trace_preservation_defect(recipe));
          }
    results.push_back({"recipe_vs_oracle", dev, 1e-12});
    const ModelSpec fig3 = load_preset("fig3");
    trace_dev = std::max(trace_dev, trace_preservation_defect(assemble_at(fig3, 0.0)));
    results.push_back({"trace_preservation", trace_dev, 1e-10});
  }
  {
    const ModelSpec spec = parse_model("sites 1\nreservoir src 1 1 1 1\ninit fock 0\n");
    const Trajectory traj = simulate(spec, 10.0, 0.1, Method::expm);
    double dev = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k)
      dev = std::max(dev, std::abs(occupation(traj.density(k), 1) - (1.0 - std::exp(-traj.times[k]))));
    results.push_back({"single_site_filling", dev, 1e-8});
  }
  {
    const ModelSpec spec = parse_model("sites 1\nreservoir src 1 1 1 1\nreservoir drn 1 1 1 0\n");
    const Operator rho = steady_state(assemble(spec));
    results.push_back({"source_drain_steady_state", std::abs(occupation(rho, 1) - 0.5), 1e-9});
  }
  {
    // Hermiticity preservation with cross couplings on a random state.
    const ModelSpec spec = parse_model(
        "sites 3\nhop 1 3 0.4\ndensity 1 2 0.7\nreservoir a 1 1 0.8 0.3\nreservoir a 1 3 0.5 0.3\n"
        "reservoir a 3 1 0.5 0.3\nreservoir b 2 3 0.6 0.9\nreservoir b 3 2 0.6 0.9\n");
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;
    Operator g(8, 8);
    for (Index k = 0; k < g.size(); ++k) g(k) = Complex(gauss(rng), gauss(rng));
    Operator rho = g * g.adjoint();
    rho /= rho.trace();
    const Operator image = unvec(assemble_at(spec, 0.0) * vec(rho));
    results.push_back({"hermiticity_preservation", hermiticity_defect(image), 1e-10});
  }
  return results;
}

inline int cmd_check(std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_checks()) {
    char line[160];
    std::snprintf(line, sizeof line, "%s  %-30s max_dev=%.3e  tol=%.0e\n", r.passed() ? "PASS" : "FAIL", r.group.c_str(),
                  r.max_deviation, r.tolerance);
    out << line;
    ok = ok && r.passed();
  }
  out << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? kSuccess : kNumerical;
}

struct SweepConfig {
  std::string preset = "fig5_sweep";
  std::vector<double> probe_couplings{0.0, 1.0, 2.0, 3.0};
  std::string out_dir;
  double t_max = 300.0;
  double dt_out = 0.1;
  Method method = Method::expm;
};

inline std::string sweep_file_name(double up) { return "up_" + format_number(up) + ".csv"; }

inline int cmd_sweep(const SweepConfig& config, std::ostream& err) {
  if (!preset_text(config.preset)) {
    err << "error: unknown preset '" << config.preset << "'\n";
    return kUsage;
  }
  if (config.probe_couplings.empty() || config.out_dir.empty() || !(config.t_max > 0.0) || !(config.dt_out > 0.0)) {
    err << "error: sweep needs --up values, --out-dir and positive --t-max/--dt-out\n";
    return kUsage;
  }
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    err << "error: cannot create " << config.out_dir << ": " << ec.message() << "\n";
    return kUsage;
  }

  struct Outcome {
    int code = kSuccess;
    std::string message;
  };
  std::vector<std::future<Outcome>> jobs;
  for (double up : config.probe_couplings) {
    jobs.push_back(std::async(std::launch::async, [&config, up]() -> Outcome {
      RunConfig run;
      run.preset = config.preset;
      run.t_max = config.t_max;
      run.dt_out = config.dt_out;
      run.method = config.method;
      run.probe_coupling = up;
      run.out = (std::filesystem::path(config.out_dir) / sweep_file_name(up)).string();
      std::ostringstream msg;
      const int code = cmd_run(run, msg);
      return {code, msg.str()};
    }));
  }
  int code = kSuccess;
  for (auto& job : jobs) {
    const Outcome o = job.get();
    err << o.message;
    if (o.code != kSuccess && code == kSuccess) code = o.code;
  }
  return code;
}

}  // namespace fermsim::cli
