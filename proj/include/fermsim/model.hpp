#pragma once

// Declarative model description and its line-oriented text format:
//
//   sites <N>
//   onsite <i> <energy>
//   hop <i> <j> <amplitude>
//   density <i> <j> <strength>
//   reservoir <name> <i> <j> <gamma> <fermi>
//   profile <name> <t_start> <value>     # repeatable, |u(t)|^2 steps
//   init fock <bits>
//   init density <path>                  # relative to the model file
//
// Energies are in units of J with hbar = 1. '#' starts a comment.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "fermsim/error.hpp"
#include "fermsim/operators.hpp"

namespace fermsim {

enum class TermKind { onsite, hop, density_density };

struct HamiltonianTerm {
  TermKind kind = TermKind::onsite;
  int site_a = 1;
  int site_b = 0;  // unused for onsite
  double strength = 0.0;

  friend bool operator==(const HamiltonianTerm&, const HamiltonianTerm&) = default;
};

/// One step of a piecewise-constant |u(t)|^2 profile, valid from `t_start`
/// until the next step (the last step extends to infinity).
struct ProfileStep {
  double t_start = 0.0;
  double value = 1.0;

  friend bool operator==(const ProfileStep&, const ProfileStep&) = default;
};

struct ReservoirAttachment {
  std::string name;
  int site_i = 1;
  int site_j = 1;
  double gamma = 0.0;
  double fermi = 0.0;
  std::vector<ProfileStep> profile;  // empty: constant 1

  friend bool operator==(const ReservoirAttachment&, const ReservoirAttachment&) = default;
};

struct DensityFile {
  std::string path;
  Operator matrix;

  friend bool operator==(const DensityFile& a, const DensityFile& b) {
    return a.path == b.path && a.matrix.rows() == b.matrix.rows() && a.matrix.cols() == b.matrix.cols() &&
           a.matrix == b.matrix;
  }
};

using InitialState = std::variant<FockLabel, DensityFile>;

struct ModelSpec {
  int n_sites = 0;
  std::vector<HamiltonianTerm> terms;
  std::vector<ReservoirAttachment> reservoirs;
  InitialState initial_state;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// f = 1 / (1 + exp(beta * eps)), eps measured from the chemical potential.
inline double fermi_factor(double beta, double eps) {
  if (!(beta >= 0.0)) throw std::invalid_argument("fermi_factor: beta must be nonnegative");
  const double x = beta * eps;
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

inline double profile_value(const std::vector<ProfileStep>& profile, double t) {
  if (!(t >= 0.0)) throw std::out_of_range("time " + std::to_string(t) + " outside profile coverage [0, inf)");
  if (profile.empty()) return 1.0;
  if (t < profile.front().t_start)
    throw std::out_of_range("time " + std::to_string(t) + " precedes the first profile step");
  double value = profile.front().value;
  for (const auto& step : profile) {
    if (step.t_start > t) break;
    value = step.value;
  }
  return value;
}

/// Gamma_ij(t) = gamma * |u(t)|^2.
inline double rate_at(const ReservoirAttachment& att, double t) { return att.gamma * profile_value(att.profile, t); }

inline Operator initial_density(const ModelSpec& spec) {
  if (const auto* fock = std::get_if<FockLabel>(&spec.initial_state)) return fock->projector();
  return std::get<DensityFile>(spec.initial_state).matrix;
}

/// H = Σ ε_i d_i†d_i + Σ t_ij (d_i†d_j + d_j†d_i) + Σ U_ij N_i N_j.
inline Operator build_hamiltonian(const ModelSpec& spec) {
  const int n = spec.n_sites;
  Operator h = Operator::Zero(fock_dimension(n), fock_dimension(n));
  for (const auto& term : spec.terms) {
    switch (term.kind) {
      case TermKind::onsite:
        h += term.strength * (creator(term.site_a, n) * annihilator(term.site_a, n));
        break;
      case TermKind::hop: {
        const Operator forward = creator(term.site_a, n) * annihilator(term.site_b, n);
        h += term.strength * (forward + forward.adjoint());
        break;
      }
      case TermKind::density_density:
        h += term.strength * (number_op(term.site_a, n) * number_op(term.site_b, n));
        break;
    }
  }
  require_hermitian(h, "build_hamiltonian");
  return h;
}

/// Replace every density-density term on the unordered pair {i, j} by a
/// single term of the given strength (appended if none exists).
inline ModelSpec with_density_coupling(ModelSpec spec, int i, int j, double strength) {
  std::erase_if(spec.terms, [&](const HamiltonianTerm& t) {
    return t.kind == TermKind::density_density &&
           ((t.site_a == i && t.site_b == j) || (t.site_a == j && t.site_b == i));
  });
  spec.terms.push_back({TermKind::density_density, i, j, strength});
  return spec;
}

namespace detail {

inline std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
    words.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return words;
}

inline double parse_real(std::string_view word, int line, std::string_view field) {
  double value = 0.0;
  const char* first = word.data();
  const char* last = word.data() + word.size();
  if (!word.empty() && word.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value))
    throw ModelError(line, "expected a real number for " + std::string(field) + ", got '" + std::string(word) + "'");
  return value;
}

inline int parse_int(std::string_view word, int line, std::string_view field) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc{} || ptr != word.data() + word.size())
    throw ModelError(line, "expected an integer for " + std::string(field) + ", got '" + std::string(word) + "'");
  return value;
}

inline int parse_site(std::string_view word, int line, int n_sites) {
  const int site = parse_int(word, line, "site index");
  if (site < 1 || site > n_sites)
    throw ModelError(line, "site index " + std::to_string(site) + " out of range 1.." + std::to_string(n_sites));
  return site;
}

inline void expect_arity(const std::vector<std::string_view>& words, std::size_t n, int line) {
  if (words.size() != n)
    throw ModelError(line, "'" + std::string(words.front()) + "' expects " + std::to_string(n - 1) +
                               " arguments, got " + std::to_string(words.size() - 1));
}

inline Operator read_density_file(const std::filesystem::path& path, int n_sites, int line) {
  std::ifstream in(path);
  if (!in) throw ModelError(line, "cannot open density-matrix file " + path.string());
  const Index dim = fock_dimension(n_sites);
  Operator rho(dim, dim);
  Index row = 0;
  std::string text;
  while (std::getline(in, text)) {
    if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    const auto words = split_words(text);
    if (words.empty()) continue;
    if (row >= dim) throw ModelError(line, path.string() + ": more than " + std::to_string(dim) + " rows");
    if (static_cast<Index>(words.size()) != 2 * dim)
      throw ModelError(line, path.string() + ": row " + std::to_string(row + 1) + " needs " +
                                 std::to_string(2 * dim) + " numbers (re im pairs)");
    for (Index c = 0; c < dim; ++c)
      rho(row, c) = Complex(parse_real(words[static_cast<std::size_t>(2 * c)], line, "density entry"),
                            parse_real(words[static_cast<std::size_t>(2 * c + 1)], line, "density entry"));
    ++row;
  }
  if (row != dim) throw ModelError(line, path.string() + ": expected " + std::to_string(dim) + " rows");
  if (hermiticity_defect(rho) >= kHermitianTolerance) throw ModelError(line, "initial density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0)) > kPsdTolerance)
    throw ModelError(line, "initial density matrix does not have unit trace");
  if (herm_eig(rho).values.minCoeff() < -kPsdTolerance)
    throw ModelError(line, "initial density matrix is not positive semidefinite");
  return rho;
}

}  // namespace detail

/// Parse and validate a model file. `base_dir` resolves relative paths of
/// `init density` directives.
inline ModelSpec parse_model(std::string_view text, const std::filesystem::path& base_dir = {}) {
  ModelSpec spec;
  bool have_init = false;
  struct PendingProfile {
    int line;
    std::string name;
    ProfileStep step;
  };
  std::vector<PendingProfile> profiles;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto words = detail::split_words(line);
    if (words.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    const std::string_view directive = words.front();
    if (directive == "sites") {
      if (spec.n_sites != 0) throw ModelError(line_no, "'sites' declared twice");
      detail::expect_arity(words, 2, line_no);
      const int n = detail::parse_int(words[1], line_no, "site count");
      if (n < 1 || n > 12) throw ModelError(line_no, "site count " + std::to_string(n) + " outside 1..12");
      spec.n_sites = n;
      spec.initial_state = FockLabel(std::vector<bool>(static_cast<std::size_t>(n), false));
      continue;
    }
    if (directive != "onsite" && directive != "hop" && directive != "density" && directive != "reservoir" &&
        directive != "profile" && directive != "init")
      throw ModelError(line_no, "unknown directive '" + std::string(directive) + "'");
    if (spec.n_sites == 0) throw ModelError(line_no, "'sites' must be declared before '" + std::string(directive) + "'");
    const int n = spec.n_sites;

    if (directive == "onsite") {
      detail::expect_arity(words, 3, line_no);
      spec.terms.push_back({TermKind::onsite, detail::parse_site(words[1], line_no, n), 0,
                            detail::parse_real(words[2], line_no, "energy")});
    } else if (directive == "hop" || directive == "density") {
      detail::expect_arity(words, 4, line_no);
      const int a = detail::parse_site(words[1], line_no, n);
      const int b = detail::parse_site(words[2], line_no, n);
      if (a == b) throw ModelError(line_no, "'" + std::string(directive) + "' needs two distinct sites");
      spec.terms.push_back({directive == "hop" ? TermKind::hop : TermKind::density_density, a, b,
                            detail::parse_real(words[3], line_no, "strength")});
    } else if (directive == "reservoir") {
      detail::expect_arity(words, 6, line_no);
      ReservoirAttachment att;
      att.name = std::string(words[1]);
      att.site_i = detail::parse_site(words[2], line_no, n);
      att.site_j = detail::parse_site(words[3], line_no, n);
      att.gamma = detail::parse_real(words[4], line_no, "gamma");
      att.fermi = detail::parse_real(words[5], line_no, "fermi");
      if (att.gamma < 0.0) throw ModelError(line_no, "gamma must be nonnegative");
      if (att.fermi < 0.0 || att.fermi > 1.0)
        throw ModelError(line_no, "fermi " + std::string(words[5]) + " outside [0, 1]");
      for (const auto& other : spec.reservoirs) {
        if (other.name != att.name) continue;
        if (other.site_i == att.site_i && other.site_j == att.site_j)
          throw ModelError(line_no, "duplicate reservoir coupling " + att.name + " (" + std::to_string(att.site_i) +
                                        "," + std::to_string(att.site_j) + ")");
        if (other.fermi != att.fermi)
          throw ModelError(line_no, "reservoir " + att.name + " declared with two different fermi factors");
      }
      spec.reservoirs.push_back(std::move(att));
    } else if (directive == "profile") {
      detail::expect_arity(words, 4, line_no);
      PendingProfile p{line_no, std::string(words[1]),
                       {detail::parse_real(words[2], line_no, "t_start"), detail::parse_real(words[3], line_no, "value")}};
      if (p.step.value < 0.0) throw ModelError(line_no, "profile value must be nonnegative");
      profiles.push_back(std::move(p));
    } else {  // init
      if (have_init) throw ModelError(line_no, "'init' declared twice");
      detail::expect_arity(words, 3, line_no);
      if (words[1] == "fock") {
        FockLabel label;
        try {
          label = FockLabel::parse(words[2]);
        } catch (const std::invalid_argument& e) {
          throw ModelError(line_no, e.what());
        }
        if (label.size() != n)
          throw ModelError(line_no, "Fock label '" + std::string(words[2]) + "' has " + std::to_string(label.size()) +
                                        " sites, expected " + std::to_string(n));
        spec.initial_state = std::move(label);
      } else if (words[1] == "density") {
        const std::string path(words[2]);
        spec.initial_state = DensityFile{path, detail::read_density_file(base_dir / path, n, line_no)};
      } else {
        throw ModelError(line_no, "unknown init kind '" + std::string(words[1]) + "' (expected fock or density)");
      }
      have_init = true;
    }
    if (eol == text.size()) break;
  }
  if (spec.n_sites == 0) throw ModelError(0, "model declares no 'sites'");

  for (const auto& p : profiles) {
    bool found = false;
    for (auto& att : spec.reservoirs) {
      if (att.name != p.name) continue;
      found = true;
      if (att.profile.empty() ? p.step.t_start != 0.0 : p.step.t_start <= att.profile.back().t_start)
        throw ModelError(p.line, att.profile.empty() ? "first profile step of " + p.name + " must start at t = 0"
                                                     : "profile steps of " + p.name + " must be strictly increasing");
      att.profile.push_back(p.step);
    }
    if (!found) throw ModelError(p.line, "profile for unknown reservoir '" + p.name + "'");
  }
  return spec;
}

inline ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError(0, "cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str(), path.parent_path());
}

namespace detail {

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Canonical text form; parse_model(serialize_model(s)) == s.
inline std::string serialize_model(const ModelSpec& spec) {
  using detail::format_real;
  std::string out = "sites " + std::to_string(spec.n_sites) + "\n";
  for (const auto& t : spec.terms) {
    switch (t.kind) {
      case TermKind::onsite:
        out += "onsite " + std::to_string(t.site_a) + " " + format_real(t.strength) + "\n";
        break;
      case TermKind::hop:
      case TermKind::density_density:
        out += std::string(t.kind == TermKind::hop ? "hop " : "density ") + std::to_string(t.site_a) + " " +
               std::to_string(t.site_b) + " " + format_real(t.strength) + "\n";
        break;
    }
  }
  for (const auto& r : spec.reservoirs)
    out += "reservoir " + r.name + " " + std::to_string(r.site_i) + " " + std::to_string(r.site_j) + " " +
           format_real(r.gamma) + " " + format_real(r.fermi) + "\n";
  std::vector<std::string> written;
  for (const auto& r : spec.reservoirs) {
    if (r.profile.empty() || std::find(written.begin(), written.end(), r.name) != written.end()) continue;
    written.push_back(r.name);
    for (const auto& step : r.profile)
      out += "profile " + r.name + " " + format_real(step.t_start) + " " + format_real(step.value) + "\n";
  }
  if (const auto* fock = std::get_if<FockLabel>(&spec.initial_state))
    out += "init fock " + fock->str() + "\n";
  else
    out += "init density " + std::get<DensityFile>(spec.initial_state).path + "\n";
  return out;
}

}  // namespace fermsim
