#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qpmfs/types.hpp"

namespace qpmfs {

enum class ShapeTag { smooth, wiggly, cup, sphere, custom };

ShapeTag parse_shape_tag(const std::string& name);
std::string to_string(ShapeTag tag);

/// Curve sample used to define custom shapes.
struct CurveSample {
  double t, rho, z, drho, dz;
};

/// Shape parameters. Fields irrelevant to a tag are ignored.
struct ShapeParams {
  double scale = 1.0;       ///< uniform scaling of the profile
  double amplitude = 0.3;   ///< smooth/wiggly bump amplitude
  double cup_a = 0.2;       ///< cup half-thickness
  double cup_b = pi / 6.0;  ///< cup opening half-angle
  double cup_c = -1.0;      ///< smoothing constant in s_a; negative means c = a
  std::vector<CurveSample> table;  ///< custom shape samples, t ascending on [0, pi]
};

/// Value and first derivative of the profile at one parameter.
struct CurveEval {
  double rho, z, drho, dz;
  double speed() const { return std::hypot(drho, dz); }
};

namespace detail {
class Profile {
 public:
  virtual ~Profile() = default;
  virtual CurveEval eval(double t) const = 0;
  /// rho(t) + i z(t) continued to complex t (analytic profiles only).
  virtual cplx zeta(cplx t) const;
  virtual bool analytic() const { return true; }
  virtual std::size_t sample_count() const { return 0; }
};
}  // namespace detail

/// Generating curve (rho(t), z(t)), t in [0, pi], of an axisymmetric body.
/// Immutable; cheap to copy.
class GeneratingCurve {
 public:
  GeneratingCurve(ShapeTag tag, std::shared_ptr<const detail::Profile> profile);

  ShapeTag tag() const { return tag_; }
  CurveEval eval(double t) const { return profile_->eval(t); }
  PlanePoint point(double t) const {
    const auto e = eval(t);
    return {e.rho, e.z};
  }
  double speed(double t) const { return eval(t).speed(); }
  cplx zeta(cplx t) const { return profile_->zeta(t); }
  bool analytic() const { return profile_->analytic(); }
  std::size_t sample_count() const { return profile_->sample_count(); }

  /// +1 when the curve closed by its mirror image is counterclockwise in
  /// the (rho, z) plane, -1 otherwise.
  int orientation() const { return orientation_; }
  /// Outward unit normal at parameter t.
  PlanePoint normal(double t) const;
  double z_min() const { return zmin_; }
  double z_max() const { return zmax_; }
  double rho_max() const { return rhomax_; }
  /// Winding number of the closed curve (curve plus mirror) about p.
  int winding(PlanePoint p) const;
  bool inside(PlanePoint p) const { return winding(p) != 0; }

 private:
  ShapeTag tag_;
  std::shared_ptr<const detail::Profile> profile_;
  std::vector<PlanePoint> polygon_;
  int orientation_ = 1;
  double zmin_ = 0, zmax_ = 0, rhomax_ = 0;
};

/// Builds a built-in or custom profile and validates it: rho > 0 inside
/// (0, pi), rho = 0 at the poles, nonvanishing speed, smooth closure and
/// no self intersection.
GeneratingCurve make_curve(ShapeTag tag, const ShapeParams& params = {});

struct BoundaryNodes {
  std::vector<double> t;
  std::vector<PlanePoint> points;
  std::vector<PlanePoint> normals;
  std::vector<double> speeds;
  std::size_t size() const { return t.size(); }
};

/// Midpoint-rule collocation nodes t_m = pi (m - 1/2) / M.
BoundaryNodes boundary_nodes(const GeneratingCurve& curve, int M);

enum class SourceScheme { normal_const, normal_speed, complexified };
enum class Side { interior, exterior };

SourceScheme parse_source_scheme(const std::string& name);
std::string to_string(SourceScheme s);

struct RingSourceSet {
  std::vector<PlanePoint> points;
  double tau = 0.0;
  SourceScheme scheme = SourceScheme::complexified;
  Side side = Side::interior;
  /// Signed displacement actually applied (sign picked by a winding test).
  double applied_tau = 0.0;
  std::size_t size() const { return points.size(); }
};

/// Places N ring sources displaced from the midpoint nodes t_j by tau using
/// one of three schemes: along the normal by tau, along the normal by
/// tau * speed, or by complexifying the parameter t -> t + i tau. The sign
/// of the displacement is chosen so the set lands on the requested side.
RingSourceSet place_sources(const GeneratingCurve& curve, int N, double tau,
                            SourceScheme scheme, Side side);

}  // namespace qpmfs
