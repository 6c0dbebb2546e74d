// Acceptance suite: one PASS/FAIL line per criterion. `--only N` runs a single
// criterion; the exit code is nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fermsim/cli.hpp"
#include "fermsim/fermsim.hpp"

namespace {

using namespace fermsim;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

double max_abs(const Operator& m) { return m.cwiseAbs().maxCoeff(); }

Operator jump_from_factors(int i, int n) {
  Operator sm = Operator::Zero(2, 2);
  sm(1, 0) = 1.0;
  Operator z = Operator::Identity(2, 2);
  z(1, 1) = -1.0;
  Operator out = Operator::Identity(1, 1);
  for (int k = 1; k <= n; ++k) {
    const Operator f = k < i ? Operator(Operator::Identity(2, 2)) : (k == i ? sm : z);
    out = Eigen::kroneckerProduct(out, f).eval();
  }
  return out;
}

// Superoperator of the single-reservoir maps written with vec(AXB) = (Bᵀ ⊗ A) vec(X).
Operator direct_dissipator(int i, int j, bool plus, int n) {
  const Operator si = jump_from_factors(i, n), sj = jump_from_factors(j, n);
  const Operator a = plus ? si : Operator(si.adjoint());
  const Operator b = plus ? sj : Operator(sj.adjoint());
  const Operator id = Operator::Identity(si.rows(), si.cols());
  return Eigen::kroneckerProduct(id, Operator(a * b.adjoint())) - Eigen::kroneckerProduct(Operator(b.transpose()), Operator(a.adjoint())) +
         Eigen::kroneckerProduct(Operator((b * a.adjoint()).transpose()), id) -
         Eigen::kroneckerProduct(Operator(a.transpose()), Operator(b.adjoint()));
}

Trajectory run_preset(const ModelSpec& spec, double t_max, double dt, EvolveOptions options = {}) {
  return evolve(assemble(spec), initial_density(spec), TimeGrid::uniform(t_max, dt), options);
}

struct MoleculeSeries {
  std::vector<double> concurrence, entropy, n1;
  std::vector<CrossPopulations> pops;
};

MoleculeSeries molecule_series(const Trajectory& traj) {
  MoleculeSeries s;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Operator rho = traj.density(k);
    const Operator reduced = partial_trace(rho, {1, 2, 3, 4});
    s.concurrence.push_back(concurrence(extract_two_qubit(reduced).state));
    s.entropy.push_back(linear_entropy(reduced));
    s.n1.push_back(occupation(rho, 1));
    s.pops.push_back(cross_populations(reduced));
  }
  return s;
}

Outcome criterion1() {
  double dev = 0.0;
  for (int d = 1; d <= 6; ++d) {
    const Operator id = identity_on(d);
    for (int m = 1; m <= d; ++m)
      for (int l = 1; l <= d; ++l) {
        const Operator dm = annihilator(m, d), dl = annihilator(l, d);
        const Operator mixed = anticommutator(dm, dl.adjoint()) - (m == l ? id : Operator(Operator::Zero(id.rows(), id.cols())));
        dev = std::max({dev, max_abs(mixed), max_abs(anticommutator(dm, dl))});
      }
  }
  return {dev < 1e-12, fmt("max deviation %.3e (tol 1e-12)", dev)};
}

Outcome criterion2() {
  double dev = 0.0;
  for (int n = 1; n <= 4; ++n)
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j)
        for (bool plus : {true, false})
          dev = std::max(dev, max_abs(build_dissipator(i, j, plus ? Sign::plus : Sign::minus, n) - direct_dissipator(i, j, plus, n)));
  return {dev < 1e-12, fmt("max elementwise difference %.3e (tol 1e-12)", dev)};
}

Outcome criterion3() {
  bool exact = true;
  Operator sp = Operator::Zero(2, 2), sm = Operator::Zero(2, 2);
  sp(0, 1) = 1.0;
  sm(1, 0) = 1.0;
  const Operator id2 = Operator::Identity(2, 2);
  for (bool plus : {true, false}) {
    const Operator up = plus ? sp : sm, down = plus ? sm : sp;
    auto chain = [&](int pos_a, const Operator& a, int pos_b, const Operator& b) {
      Operator out = Operator::Identity(1, 1);
      for (int k = 1; k <= 10; ++k) {
        Operator f = id2;
        if (k == pos_a) f = a;
        if (k == pos_b) f = (k == pos_a) ? Operator(a * b) : b;
        out = Eigen::kroneckerProduct(out, f).eval();
      }
      return out;
    };
    const Operator expected =
        chain(10, down * up, 0, id2) + chain(5, down * up, 0, id2) - 2.0 * chain(5, up, 10, up);
    exact = exact && build_dissipator(5, 5, plus ? Sign::plus : Sign::minus, 5) == expected;
  }
  return {exact, exact ? "exact elementwise match for both signs" : "mismatch"};
}

Outcome criterion4() {
  const ModelSpec spec = parse_model("sites 1\nreservoir src 1 1 1 1\ninit fock 0\n");
  const Trajectory traj = run_preset(spec, 10.0, 0.01);
  double dev = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k)
    dev = std::max(dev, std::abs(occupation(traj.density(k), 1) - (1.0 - std::exp(-traj.times[k]))));
  return {dev < 1e-8, fmt("max |n(t) - (1 - e^-t)| = %.3e (tol 1e-8)", dev)};
}

Outcome criterion5() {
  const ModelSpec spec = parse_model("sites 1\nreservoir src 1 1 1 1\nreservoir drn 1 1 1 0\n");
  const double n = occupation(steady_state(assemble(spec)), 1);
  return {std::abs(n - 0.5) <= 1e-9, fmt("steady occupation %.12f (target 0.5 +- 1e-9)", n)};
}

Outcome criterion6() {
  const ModelSpec spec = with_probe_coupling(load_preset("fig3"), 0.0);
  const MoleculeSeries s = molecule_series(run_preset(spec, 60.0, 0.01));
  const double c_max = *std::max_element(s.concurrence.begin(), s.concurrence.end());
  const double s_max = *std::max_element(s.entropy.begin(), s.entropy.end());
  // Return of <N1> to 1 after the first departure.
  double closest = 1.0;
  bool departed = false;
  for (double n1 : s.n1) {
    if (n1 < 0.5) departed = true;
    if (departed) closest = std::min(closest, std::abs(1.0 - n1));
  }
  const bool ok = c_max >= 0.999 && s_max < 1e-6 && departed && closest < 1e-4;
  return {ok, fmt("C_max %.6f (>= 0.999), S_max %.3e (< 1e-6), min |1 - <N1>| after departure %.3e (< 1e-4)", c_max,
                  s_max, closest)};
}

Outcome criterion7() {
  const MoleculeSeries s = molecule_series(run_preset(load_preset("fig3"), 300.0, 1.0));
  const CrossPopulations& p = s.pops.back();
  const double worst = std::max({std::abs(p.p1001 - 0.25), std::abs(p.p0110 - 0.25), std::abs(p.p1010 - 0.25),
                                 std::abs(p.p0101 - 0.25)});
  const double entropy = s.entropy.back();
  const bool ok = worst <= 0.01 && std::abs(entropy - 0.75) <= 0.01;
  return {ok, fmt("at t=300: max |P - 0.25| %.3e (<= 0.01), S %.6f (0.75 +- 0.01)", worst, entropy)};
}

Outcome criterion8() {
  const ModelSpec spec = with_probe_coupling(load_preset("fig5_sweep"), 1.0);
  const Trajectory traj = run_preset(spec, 150.0, 0.1);
  const MoleculeSeries s = molecule_series(traj);
  const auto deaths = detect_sudden_death(traj.times, s.concurrence);
  if (deaths.empty()) return {false, "no sudden-death interval detected in [0, 150]"};
  const auto& first = deaths.front();
  const bool ok = first.onset >= 70.0 && first.onset <= 110.0 && first.rebirth.has_value();
  return {ok, fmt("first death onset %.2f, rebirth %.2f (onset window [70, 110], rebirth required)", first.onset,
                  first.rebirth.value_or(std::nan("")))};
}

Outcome criterion9() {
  std::vector<double> crossing;
  for (double up : {1.0, 2.0, 3.0}) {
    const ModelSpec spec = with_probe_coupling(load_preset("fig5_sweep"), up);
    const Trajectory traj = run_preset(spec, 100.0, 0.05);
    const MoleculeSeries s = molecule_series(traj);
    double first = std::nan("");
    for (std::size_t k = 0; k < traj.size(); ++k)
      if (s.entropy[k] > 0.5) {
        first = traj.times[k];
        break;
      }
    crossing.push_back(first);
  }
  const bool ok = crossing[0] > crossing[1] && crossing[1] > crossing[2];
  return {ok, fmt("first S > 0.5 at t = %.2f, %.2f, %.2f for U_p = 1, 2, 3 (strictly decreasing)", crossing[0],
                  crossing[1], crossing[2])};
}

Outcome criterion10() {
  const ModelSpec spec = load_preset("fig3");
  const cli::ObservableSet all{};
  const auto a = cli::observable_table(run_preset(spec, 50.0, 0.5), all);
  const auto b = cli::observable_table(run_preset(spec, 50.0, 0.5, {Method::rk4, 0.005}), all);
  double dev = 0.0;
  // Skip the diagnostics columns (trace_dev, min_eig); they are not observables.
  const std::size_t columns = a.header.size() - 2;
  for (std::size_t r = 0; r < a.rows.size(); ++r)
    for (std::size_t c = 1; c < columns; ++c) dev = std::max(dev, std::abs(a.rows[r][c] - b.rows[r][c]));
  return {dev < 1e-5, fmt("max |expm - rk4| over all observables %.3e (tol 1e-5)", dev)};
}

Outcome criterion11() {
  std::string detail;
  bool ok = true;
  for (auto name : preset_names()) {
    const Trajectory traj = run_preset(load_preset(name), 300.0, 0.5);
    double trace = 0.0, herm = 0.0, eig = 0.0;
    for (const auto& d : traj.diagnostics) {
      trace = std::max(trace, d.trace_deviation);
      herm = std::max(herm, d.hermiticity_defect);
      eig = std::min(eig, d.min_eigenvalue);
    }
    const bool good = health_violation(traj).empty();
    ok = ok && good;
    detail += std::string(name) + fmt(": trace %.1e herm %.1e min_eig %.1e; ", trace, herm, eig);
  }
  return {ok, detail + "bounds 1e-8 / 1e-8 / -1e-7"};
}

struct Criterion {
  int id;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, 1, criterion1},   {2, 10, criterion2},  {3, 5, criterion3},   {4, 1, criterion4},
      {5, 1, criterion5},   {6, 30, criterion6},  {7, 60, criterion7},  {8, 60, criterion8},
      {9, 180, criterion9}, {10, 120, criterion10}, {11, 0, criterion11},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = c.budget_s <= 0 || elapsed < c.budget_s;
    const bool passed = o.passed && in_budget;
    char timing[96];
    if (c.budget_s > 0)
      std::snprintf(timing, sizeof timing, "[%.2f s, budget %.0f s%s]", elapsed, c.budget_s, in_budget ? "" : " EXCEEDED");
    else
      std::snprintf(timing, sizeof timing, "[%.2f s]", elapsed);
    std::printf("criterion %2d: %s  %s %s\n", c.id, passed ? "PASS" : "FAIL", o.detail.c_str(), timing);
    std::fflush(stdout);
    if (!passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
