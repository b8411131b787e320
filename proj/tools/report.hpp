#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "qpmfs/basiscmp.hpp"
#include "qpmfs/diagnostics.hpp"

namespace qpmfs::cli {

nlohmann::json wood_json(const WoodReport& w);

/// Contents of result.json for a periodic solve.
nlohmann::json result_json(const RunConfig& cfg, const PeriodicProblem& pb,
                           const SolveResult& res, const ErrorReport& err,
                           const WoodReport& wood, bool timings);

/// Side-car metadata for a CSV file: format version, kind and the resolved
/// config.
nlohmann::json csv_meta(const std::string& kind, const nlohmann::json& config);

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);
void write_basis_csv(std::ostream& os, const BasisComparison& cmp);

/// Axis-aligned slice: the coordinate `axis` fixed at `at`, the other two
/// (in x, y, z order) sampled on uniform grids [lo, hi] with n points.
struct SliceSpec {
  char axis = 'y';
  double at = 0;
  double u_lo = -1, u_hi = 1, v_lo = -1, v_hi = 1;
  int nu = 2, nv = 2;
};
SliceSpec parse_slice(const std::string& plane, const std::string& u, const std::string& v);
std::vector<Vec3> slice_points(const SliceSpec& s);

/// x,y,z,re_u,im_u,re_ut,im_ut,inside. Inside the central obstacle u and u^t
/// hold the interior field for transmission problems and are empty otherwise.
void write_field_csv(std::ostream& os, const PeriodicProblem& pb, const SolveResult& res,
                     const std::vector<Vec3>& points);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace qpmfs::cli
