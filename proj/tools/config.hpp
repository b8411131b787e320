#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "qpmfs/solver.hpp"

namespace qpmfs::cli {

inline constexpr const char* kConfigFormat = "qpmfs-config-1";
inline constexpr const char* kResultFormat = "qpmfs-result-1";

/// Configuration problem; what() names the offending key.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct RunConfig {
  ShapeTag shape = ShapeTag::smooth;
  ShapeParams shape_params;
  BcKind bc = BcKind::neumann;
  double k = 0;
  double theta = 0, phi = 0;
  std::optional<Vec3> kvec;  ///< overrides k and the angles
  cplx k_minus = 0.0;
  double amplitude = 1.0;
  std::optional<Lattice> lattice;
  PeriodicParams numerics;
  std::string out_dir = ".";

  IncidentWave incident() const;
  GeneratingCurve curve() const;
  /// Throws ConfigError when no lattice was given.
  const Lattice& require_lattice() const;
};

/// Parses and validates a config tree. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Applies "a.b.c=value" to the tree; value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Config tree with every default filled in. Parameters resolved by the
/// problem (M, q, M1, z0) are taken from pb when given.
nlohmann::json resolved_config(const RunConfig& cfg, const PeriodicProblem* pb = nullptr);

nlohmann::json to_json(cplx z);

}  // namespace qpmfs::cli
