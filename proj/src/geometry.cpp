#include "qpmfs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qpmfs/special_functions.hpp"

namespace qpmfs {

ShapeTag parse_shape_tag(const std::string& name) {
  if (name == "smooth") return ShapeTag::smooth;
  if (name == "wiggly") return ShapeTag::wiggly;
  if (name == "cup") return ShapeTag::cup;
  if (name == "sphere") return ShapeTag::sphere;
  if (name == "custom") return ShapeTag::custom;
  throw InputError("unknown shape tag '" + name + "'");
}

std::string to_string(ShapeTag tag) {
  switch (tag) {
    case ShapeTag::smooth: return "smooth";
    case ShapeTag::wiggly: return "wiggly";
    case ShapeTag::cup: return "cup";
    case ShapeTag::sphere: return "sphere";
    case ShapeTag::custom: return "custom";
  }
  return "?";
}

SourceScheme parse_source_scheme(const std::string& name) {
  if (name == "normal_const" || name == "a") return SourceScheme::normal_const;
  if (name == "normal_speed" || name == "b") return SourceScheme::normal_speed;
  if (name == "complexified" || name == "c") return SourceScheme::complexified;
  throw InputError("unknown source scheme '" + name + "'");
}

std::string to_string(SourceScheme s) {
  switch (s) {
    case SourceScheme::normal_const: return "normal_const";
    case SourceScheme::normal_speed: return "normal_speed";
    case SourceScheme::complexified: return "complexified";
  }
  return "?";
}

namespace detail {

cplx Profile::zeta(cplx) const {
  throw InputError("profile is not analytic; complexified sources unavailable");
}

namespace {

// r(theta) = scale (1 + amp cos(freq theta)), theta = t, measured from +z.
class PolarProfile final : public Profile {
 public:
  PolarProfile(double scale, double amp, int freq) : s_(scale), amp_(amp), f_(freq) {}

  CurveEval eval(double t) const override {
    const double r = s_ * (1.0 + amp_ * std::cos(f_ * t));
    const double dr = -s_ * amp_ * f_ * std::sin(f_ * t);
    const double st = std::sin(t), ct = std::cos(t);
    return {r * st, r * ct, dr * st + r * ct, dr * ct - r * st};
  }

  cplx zeta(cplx t) const override {
    const cplx r = s_ * (1.0 + amp_ * std::cos(static_cast<double>(f_) * t));
    return r * std::sin(t) + I * (r * std::cos(t));
  }

 private:
  double s_, amp_;
  int f_;
};

// Spherical shell with an opening of half-angle b about +z:
// r(t) = 1 - a erf(x/a), theta(t) = b - a + 2 (1 - (b-a)/pi) s_a(x),
// x = t - pi/2, with the rounded absolute value
// s_a(x) = x erf(x/a) + (c/sqrt(pi)) exp(-x^2/a^2).
class CupProfile final : public Profile {
 public:
  CupProfile(double scale, double a, double b, double c)
      : s_(scale), a_(a), b_(b), c_(c) {}

  CurveEval eval(double t) const override {
    const double x = t - pi / 2.0;
    const double g = std::exp(-x * x / (a_ * a_));
    const double e = std::erf(x / a_);
    const double r = 1.0 - a_ * e;
    const double dr = -2.0 / std::sqrt(pi) * g;
    const double fac = 2.0 * (1.0 - (b_ - a_) / pi);
    const double sa = x * e + c_ / std::sqrt(pi) * g;
    const double dsa = e + 2.0 * x / (a_ * std::sqrt(pi)) * (1.0 - c_ / a_) * g;
    const double th = b_ - a_ + fac * sa;
    const double dth = fac * dsa;
    const double st = std::sin(th), ct = std::cos(th);
    return {s_ * r * st, s_ * r * ct, s_ * (dr * st + r * ct * dth),
            s_ * (dr * ct - r * st * dth)};
  }

  cplx zeta(cplx t) const override {
    const cplx x = t - pi / 2.0;
    const cplx g = std::exp(-x * x / (a_ * a_));
    const cplx e = special::erf(x / a_);
    const cplx r = 1.0 - a_ * e;
    const double fac = 2.0 * (1.0 - (b_ - a_) / pi);
    const cplx th = b_ - a_ + fac * (x * e + c_ / std::sqrt(pi) * g);
    return s_ * r * std::sin(th) + I * (s_ * r * std::cos(th));
  }

 private:
  double s_, a_, b_, c_;
};

// Cubic Hermite interpolation of tabulated (t, rho, z, rho', z').
class TableProfile final : public Profile {
 public:
  TableProfile(std::vector<CurveSample> table, double scale)
      : table_(std::move(table)), s_(scale) {}

  CurveEval eval(double t) const override {
    auto it = std::upper_bound(table_.begin(), table_.end(), t,
                               [](double v, const CurveSample& c) { return v < c.t; });
    std::size_t i = (it == table_.begin()) ? 0 : static_cast<std::size_t>(it - table_.begin()) - 1;
    i = std::min(i, table_.size() - 2);
    const CurveSample& p0 = table_[i];
    const CurveSample& p1 = table_[i + 1];
    const double h = p1.t - p0.t;
    const double u = (t - p0.t) / h;
    const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
    const double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
    const double d00 = (6 * u * u - 6 * u) / h, d10 = 3 * u * u - 4 * u + 1;
    const double d01 = (-6 * u * u + 6 * u) / h, d11 = 3 * u * u - 2 * u;
    const double rho = h00 * p0.rho + h10 * h * p0.drho + h01 * p1.rho + h11 * h * p1.drho;
    const double z = h00 * p0.z + h10 * h * p0.dz + h01 * p1.z + h11 * h * p1.dz;
    const double drho = d00 * p0.rho + d10 * p0.drho + d01 * p1.rho + d11 * p1.drho;
    const double dz = d00 * p0.z + d10 * p0.dz + d01 * p1.z + d11 * p1.dz;
    return {s_ * rho, s_ * z, s_ * drho, s_ * dz};
  }

  bool analytic() const override { return false; }
  std::size_t sample_count() const override { return table_.size(); }

 private:
  std::vector<CurveSample> table_;
  double s_;
};

}  // namespace
}  // namespace detail

namespace {

constexpr int kPolygonSamples = 4096;

double cross(PlanePoint a, PlanePoint b, PlanePoint c) {
  return (b.rho - a.rho) * (c.z - a.z) - (c.rho - a.rho) * (b.z - a.z);
}

bool segments_cross(PlanePoint a, PlanePoint b, PlanePoint c, PlanePoint d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b);
  const double d3 = cross(a, b, c), d4 = cross(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 &&
         d3 != 0 && d4 != 0;
}

}  // namespace

GeneratingCurve::GeneratingCurve(ShapeTag tag, std::shared_ptr<const detail::Profile> profile)
    : tag_(tag), profile_(std::move(profile)) {
  const int n = kPolygonSamples;
  polygon_.reserve(2 * n);
  zmin_ = 1e300;
  zmax_ = -1e300;
  for (int i = 0; i <= n; ++i) {
    const PlanePoint p = point(pi * i / n);
    polygon_.push_back(p);
    zmin_ = std::min(zmin_, p.z);
    zmax_ = std::max(zmax_, p.z);
    rhomax_ = std::max(rhomax_, p.rho);
  }
  for (int i = n - 1; i >= 1; --i) {
    const PlanePoint p = polygon_[i];
    polygon_.push_back({-p.rho, p.z});
  }
  double area = 0.0;
  for (std::size_t i = 0; i < polygon_.size(); ++i) {
    const PlanePoint a = polygon_[i];
    const PlanePoint b = polygon_[(i + 1) % polygon_.size()];
    area += a.rho * b.z - b.rho * a.z;
  }
  orientation_ = area > 0 ? 1 : -1;
}

PlanePoint GeneratingCurve::normal(double t) const {
  const CurveEval e = eval(t);
  const double s = e.speed();
  return {orientation_ * e.dz / s, -orientation_ * e.drho / s};
}

int GeneratingCurve::winding(PlanePoint p) const {
  int w = 0;
  const std::size_t n = polygon_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PlanePoint a = polygon_[i];
    const PlanePoint b = polygon_[(i + 1) % n];
    if (a.z <= p.z) {
      if (b.z > p.z && cross(a, b, p) > 0) ++w;
    } else if (b.z <= p.z && cross(a, b, p) < 0) {
      --w;
    }
  }
  return w;
}

GeneratingCurve make_curve(ShapeTag tag, const ShapeParams& params) {
  if (!(params.scale > 0.0)) throw InputError("shape scale must be positive");
  std::shared_ptr<const detail::Profile> profile;
  switch (tag) {
    case ShapeTag::sphere:
      profile = std::make_shared<detail::PolarProfile>(params.scale, 0.0, 0);
      break;
    case ShapeTag::smooth:
      profile = std::make_shared<detail::PolarProfile>(params.scale, params.amplitude, 4);
      break;
    case ShapeTag::wiggly:
      profile = std::make_shared<detail::PolarProfile>(params.scale, params.amplitude, 8);
      break;
    case ShapeTag::cup: {
      const double a = params.cup_a, b = params.cup_b;
      if (!(a > 0.0 && a < 1.0))
        throw InputError("cup half-thickness a must lie in (0, 1)");
      if (!(b > 0.0 && b < pi / 2.0))
        throw InputError("cup opening half-angle b must lie in (0, pi/2)");
      const double c = params.cup_c < 0.0 ? a : params.cup_c;
      profile = std::make_shared<detail::CupProfile>(params.scale, a, b, c);
      break;
    }
    case ShapeTag::custom: {
      const auto& tab = params.table;
      if (tab.size() < 4) throw InputError("custom shape needs at least 4 samples");
      for (std::size_t i = 1; i < tab.size(); ++i)
        if (!(tab[i].t > tab[i - 1].t))
          throw InputError("custom shape samples must have increasing t");
      if (std::abs(tab.front().t) > 1e-12 || std::abs(tab.back().t - pi) > 1e-12)
        throw InputError("custom shape samples must span t in [0, pi]");
      profile = std::make_shared<detail::TableProfile>(tab, params.scale);
      break;
    }
  }
  if (std::abs(params.amplitude) >= 1.0 &&
      (tag == ShapeTag::smooth || tag == ShapeTag::wiggly))
    throw InputError("polar shape amplitude must be below 1");

  GeneratingCurve curve(tag, profile);

  // validation on a fine sampling
  const int n = 2048;
  double max_dz = 0.0;
  std::vector<PlanePoint> pts(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = pi * i / n;
    const CurveEval e = curve.eval(t);
    pts[i] = {e.rho, e.z};
    max_dz = std::max(max_dz, std::abs(e.dz));
    if (!(e.speed() > 0.0)) {
      std::ostringstream os;
      os << "generating curve has vanishing speed at t=" << t;
      throw InputError(os.str());
    }
    if (i > 0 && i < n && !(e.rho > 0.0)) {
      std::ostringstream os;
      os << "generating curve touches the axis at interior t=" << t;
      throw InputError(os.str());
    }
  }
  const double tol = 1e-12 * curve.rho_max();
  if (std::abs(pts.front().rho) > tol || std::abs(pts.back().rho) > tol)
    throw InputError("generating curve must meet the axis at t=0 and t=pi");
  const double dz0 = std::abs(curve.eval(0.0).dz), dz1 = std::abs(curve.eval(pi).dz);
  if (dz0 > 1e-12 * max_dz || dz1 > 1e-12 * max_dz)
    throw InputError("generating curve is not smooth at the poles (z'(0), z'(pi) != 0)");
  // self intersection of the polyline (non-adjacent segments)
  const int m = 512;
  std::vector<PlanePoint> coarse(m + 1);
  for (int i = 0; i <= m; ++i) coarse[i] = curve.point(pi * i / m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 2; j < m; ++j)
      if (segments_cross(coarse[i], coarse[i + 1], coarse[j], coarse[j + 1]))
        throw InputError("generating curve self-intersects");
  return curve;
}

BoundaryNodes boundary_nodes(const GeneratingCurve& curve, int M) {
  if (M < 2) throw InputError("boundary_nodes: M must be at least 2");
  BoundaryNodes nodes;
  nodes.t.resize(M);
  nodes.points.resize(M);
  nodes.normals.resize(M);
  nodes.speeds.resize(M);
  for (int m = 0; m < M; ++m) {
    const double t = pi * (m + 0.5) / M;
    const CurveEval e = curve.eval(t);
    nodes.t[m] = t;
    nodes.points[m] = {e.rho, e.z};
    nodes.speeds[m] = e.speed();
    nodes.normals[m] = curve.normal(t);
  }
  return nodes;
}

namespace {

std::vector<PlanePoint> displaced(const GeneratingCurve& curve, int N, double d,
                                  SourceScheme scheme) {
  std::vector<PlanePoint> out(N);
  for (int j = 0; j < N; ++j) {
    const double t = pi * (j + 0.5) / N;
    switch (scheme) {
      case SourceScheme::normal_const:
      case SourceScheme::normal_speed: {
        const CurveEval e = curve.eval(t);
        const PlanePoint nrm = curve.normal(t);
        const double step = scheme == SourceScheme::normal_const ? d : d * e.speed();
        out[j] = {e.rho - step * nrm.rho, e.z - step * nrm.z};
        break;
      }
      case SourceScheme::complexified: {
        const cplx w = curve.zeta(cplx{t, d});
        out[j] = {w.real(), w.imag()};
        break;
      }
    }
  }
  return out;
}

}  // namespace

RingSourceSet place_sources(const GeneratingCurve& curve, int N, double tau,
                            SourceScheme scheme, Side side) {
  if (N < 1) throw InputError("place_sources: N must be positive");
  if (tau == 0.0) throw InputError("place_sources: tau must be nonzero");
  if (scheme == SourceScheme::complexified && !curve.analytic())
    throw InputError("complexified sources need an analytic curve");
  if (curve.tag() == ShapeTag::custom && curve.sample_count() < static_cast<std::size_t>(16 * N))
    throw InputError("custom shape needs at least 16*N samples");

  // Positive d moves inward for the normal schemes; for the complexified
  // scheme the inward sign follows the curve orientation.
  const double mag = std::abs(tau);
  double natural = scheme == SourceScheme::complexified ? curve.orientation() * mag : mag;
  if (side == Side::exterior) natural = -natural;

  auto on_side = [&](const std::vector<PlanePoint>& pts) {
    for (const auto& p : pts)
      if (curve.inside(p) != (side == Side::interior)) return false;
    return true;
  };
  auto check_axis = [&](const std::vector<PlanePoint>& pts) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (!(pts[j].rho > 0.0)) {
        std::ostringstream os;
        os << "source " << j << " crossed the axis (rho=" << pts[j].rho << ")";
        throw InputError(os.str());
      }
    }
  };

  for (double d : {natural, -natural}) {
    std::vector<PlanePoint> pts = displaced(curve, N, d, scheme);
    if (d == natural) check_axis(pts);
    bool axis_ok = std::all_of(pts.begin(), pts.end(), [](auto p) { return p.rho > 0.0; });
    if (axis_ok && on_side(pts)) {
      RingSourceSet set;
      set.points = std::move(pts);
      set.tau = tau;
      set.scheme = scheme;
      set.side = side;
      set.applied_tau = d;
      return set;
    }
  }
  throw InputError(std::string("sources could not be placed on the ") +
                   (side == Side::interior ? "interior" : "exterior") +
                   " side; reduce tau");
}

}  // namespace qpmfs
