#pragma once

// Built-in models for the two coupled double-dot molecules (dots 1-2 and 3-4)
// read out by a charge probe on dot 5. Dot 5 is filled by a source (f = 1) and
// emptied by a drain (f = 0) and couples capacitively to dot 1 only.
//
// The probe level energy and the initial probe occupation are free choices:
// both presets set the level to 0 and start with the probe empty.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "fermsim/model.hpp"

namespace fermsim {

namespace detail {

// Delta = sqrt(3)/8, U_a = 3/4, U_b = 1/4 in units of J; hop amplitude is -Delta.
inline constexpr std::string_view kMoleculeBlock = R"(sites 5
onsite 1 0
onsite 2 0
onsite 3 0
onsite 4 0
onsite 5 0
hop 1 2 -0.21650635094610965
hop 3 4 -0.21650635094610965
density 1 3 0.75
density 2 4 0.75
density 1 4 0.25
density 2 3 0.25
)";

inline constexpr std::string_view kProbeBlock = R"(reservoir src 5 5 1 1
reservoir drn 5 5 1 0
init fock 10010
)";

}  // namespace detail

inline const std::array<std::string_view, 3>& preset_names() {
  static const std::array<std::string_view, 3> names{"fig3", "fig4_moleculepop", "fig5_sweep"};
  return names;
}

/// Model text of a preset, or nullopt for an unknown name.
inline std::optional<std::string> preset_text(std::string_view name) {
  const std::string header = "# preset " + std::string(name) + "\n";
  const auto body = [&](std::string_view probe_coupling) {
    return header + std::string(detail::kMoleculeBlock) + std::string(probe_coupling) +
           std::string(detail::kProbeBlock);
  };
  if (name == "fig3" || name == "fig4_moleculepop") return body("density 1 5 3\n");
  // Base point of the U_p sweep; `fermsim sweep` overrides the 1-5 coupling.
  if (name == "fig5_sweep") return body("density 1 5 1\n");
  return std::nullopt;
}

inline ModelSpec load_preset(std::string_view name) {
  const auto text = preset_text(name);
  if (!text) throw ModelError(0, "unknown preset '" + std::string(name) + "'");
  return parse_model(*text);
}

/// Probe coupling U_p sits on the density term between dots 1 and 5.
inline ModelSpec with_probe_coupling(ModelSpec spec, double up) { return with_density_coupling(std::move(spec), 1, 5, up); }

}  // namespace fermsim
