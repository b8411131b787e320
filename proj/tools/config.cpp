#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace qpmfs::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + where + key + "'");
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing required key '" + where + key + "'");
  return obj.at(key);
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + where + key + "' has the wrong type");
  }
}

cplx get_complex(const json& v, const std::string& name) {
  if (v.is_number()) return v.get<double>();
  if (v.is_object() && v.contains("re")) return {v.at("re").get<double>(), v.value("im", 0.0)};
  throw ConfigError("key '" + name + "' must be a number or {re, im}");
}

void positive(double v, const std::string& name) {
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError("'" + name + "' must be positive");
}

void nonnegative(double v, const std::string& name) {
  if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("'" + name + "' must be nonnegative");
}

}  // namespace

IncidentWave RunConfig::incident() const {
  IncidentWave w = kvec ? IncidentWave{} : IncidentWave::from_angles(k, theta, phi);
  if (kvec) w.kvec = *kvec;
  w.k_minus = k_minus;
  w.amplitude = amplitude;
  return w;
}

GeneratingCurve RunConfig::curve() const { return make_curve(shape, shape_params); }

const Lattice& RunConfig::require_lattice() const {
  if (!lattice) throw ConfigError("missing required key 'lattice'");
  return *lattice;
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  check_keys(j, "", {"format", "geometry", "bc", "incident", "lattice", "numerics", "output"});
  if (j.contains("format") && j.at("format") != kConfigFormat)
    throw ConfigError("unsupported config format '" + j.at("format").dump() + "'");

  const json& g = require(j, "geometry", "");
  check_keys(g, "geometry.", {"shape", "scale", "amplitude", "cup_a", "cup_b", "cup_c", "table"});
  try {
    c.shape = parse_shape_tag(require(g, "shape", "geometry.").get<std::string>());
  } catch (const json::exception&) {
    throw ConfigError("key 'geometry.shape' must be a string");
  }
  ShapeParams& sp = c.shape_params;
  sp.scale = get(g, "scale", "geometry.", sp.scale);
  sp.amplitude = get(g, "amplitude", "geometry.", sp.amplitude);
  sp.cup_a = get(g, "cup_a", "geometry.", sp.cup_a);
  sp.cup_b = get(g, "cup_b", "geometry.", sp.cup_b);
  sp.cup_c = get(g, "cup_c", "geometry.", sp.cup_c);
  positive(sp.scale, "geometry.scale");
  if (g.contains("table")) {
    for (const auto& row : g.at("table")) {
      if (!row.is_array() || row.size() != 5)
        throw ConfigError("geometry.table rows must be [t, rho, z, drho, dz]");
      sp.table.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                          row[3].get<double>(), row[4].get<double>()});
    }
  }
  if (c.shape == ShapeTag::custom && sp.table.empty())
    throw ConfigError("missing required key 'geometry.table' for the custom shape");

  const std::string bc = get<std::string>(j, "bc", "", "");
  if (bc.empty()) throw ConfigError("missing required key 'bc'");
  if (bc == "neumann") c.bc = BcKind::neumann;
  else if (bc == "transmission") c.bc = BcKind::transmission;
  else throw ConfigError("'bc' must be neumann or transmission");

  const json& inc = require(j, "incident", "");
  check_keys(inc, "incident.", {"k", "theta", "phi", "kvec", "k_minus", "amplitude"});
  if (inc.contains("kvec")) {
    const auto v = inc.at("kvec").get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("'incident.kvec' must have three entries");
    c.kvec = Vec3(v[0], v[1], v[2]);
    c.k = c.kvec->norm();
  } else {
    c.k = require(inc, "k", "incident.").get<double>();
    c.theta = get(inc, "theta", "incident.", 0.0);
    c.phi = get(inc, "phi", "incident.", 0.0);
  }
  positive(c.k, "incident.k");
  c.amplitude = get(inc, "amplitude", "incident.", 1.0);
  if (inc.contains("k_minus")) c.k_minus = get_complex(inc.at("k_minus"), "incident.k_minus");
  if (c.bc == BcKind::transmission) {
    if (!inc.contains("k_minus")) throw ConfigError("missing required key 'incident.k_minus'");
    positive(c.k_minus.real(), "incident.k_minus");
    nonnegative(c.k_minus.imag(), "incident.k_minus (imaginary part)");
  }

  if (j.contains("lattice")) {
    const json& l = j.at("lattice");
    check_keys(l, "lattice.", {"ex", "ey"});
    Lattice lat;
    lat.ex = require(l, "ex", "lattice.").get<double>();
    lat.ey = require(l, "ey", "lattice.").get<double>();
    positive(lat.ex, "lattice.ex");
    positive(lat.ey, "lattice.ey");
    c.lattice = lat;
  }

  PeriodicParams& p = c.numerics;
  if (j.contains("numerics")) {
    const json& n = j.at("numerics");
    const std::string w = "numerics.";
    check_keys(n, w, {"N", "M", "P", "q", "tau", "tau_minus", "scheme", "svd_tol", "p", "N0",
                      "M1", "z0", "aux", "N2", "proxy_R", "gmres_tol", "maxit", "q_svd_tol",
                      "backend"});
    p.mfs.N = get(n, "N", w, p.mfs.N);
    p.mfs.M = get(n, "M", w, p.mfs.M);
    p.mfs.P = get(n, "P", w, p.mfs.P);
    p.mfs.q = get(n, "q", w, p.mfs.q);
    p.mfs.tau = get(n, "tau", w, p.mfs.tau);
    p.mfs.tau_minus = get(n, "tau_minus", w, p.mfs.tau_minus);
    if (n.contains("scheme")) p.mfs.scheme = parse_source_scheme(n.at("scheme").get<std::string>());
    p.mfs.svd_tol = get(n, "svd_tol", w, p.mfs.svd_tol);
    p.p = get(n, "p", w, p.p);
    p.N0 = get(n, "N0", w, p.N0);
    p.M1 = get(n, "M1", w, p.M1);
    p.z0 = get(n, "z0", w, p.z0);
    const std::string aux = get<std::string>(n, "aux", w, "sph");
    if (aux == "sph") p.aux = AuxKind::spherical_harmonics;
    else if (aux == "proxy") p.aux = AuxKind::proxy_points;
    else throw ConfigError("'numerics.aux' must be sph or proxy");
    p.N2 = get(n, "N2", w, p.N2);
    p.proxy_R = get(n, "proxy_R", w, p.proxy_R);
    p.gmres_tol = get(n, "gmres_tol", w, p.gmres_tol);
    p.maxit = get(n, "maxit", w, p.maxit);
    p.q_svd_tol = get(n, "q_svd_tol", w, p.q_svd_tol);
    p.backend = get(n, "backend", w, p.backend);
  }
  positive(p.mfs.N, "numerics.N");
  nonnegative(p.mfs.M, "numerics.M");
  positive(p.mfs.P, "numerics.P");
  if (p.mfs.P % 2 != 0) throw ConfigError("'numerics.P' must be even");
  nonnegative(p.mfs.q, "numerics.q");
  if (p.mfs.q > 0 && p.mfs.q < p.mfs.P) throw ConfigError("'numerics.q' must be at least P");
  positive(p.mfs.tau, "numerics.tau");
  nonnegative(p.mfs.tau_minus, "numerics.tau_minus");
  positive(p.mfs.svd_tol, "numerics.svd_tol");
  nonnegative(p.p, "numerics.p");
  nonnegative(p.N0, "numerics.N0");
  nonnegative(p.M1, "numerics.M1");
  nonnegative(p.z0, "numerics.z0");
  if (p.aux == AuxKind::proxy_points) positive(p.N2, "numerics.N2");
  positive(p.proxy_R, "numerics.proxy_R");
  positive(p.gmres_tol, "numerics.gmres_tol");
  positive(p.maxit, "numerics.maxit");
  positive(p.q_svd_tol, "numerics.q_svd_tol");
  if (p.backend != "direct" && p.backend != "local")
    throw ConfigError("'numerics.backend' must be direct or local");

  if (j.contains("output")) {
    check_keys(j.at("output"), "output.", {"dir"});
    c.out_dir = get<std::string>(j.at("output"), "dir", "output.", c.out_dir);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

json to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json resolved_config(const RunConfig& c, const PeriodicProblem* pb) {
  json j;
  j["format"] = kConfigFormat;
  json g;
  g["shape"] = to_string(c.shape);
  g["scale"] = c.shape_params.scale;
  if (c.shape == ShapeTag::smooth || c.shape == ShapeTag::wiggly)
    g["amplitude"] = c.shape_params.amplitude;
  if (c.shape == ShapeTag::cup) {
    g["cup_a"] = c.shape_params.cup_a;
    g["cup_b"] = c.shape_params.cup_b;
    g["cup_c"] = c.shape_params.cup_c;
  }
  if (c.shape == ShapeTag::custom) {
    json t = json::array();
    for (const auto& s : c.shape_params.table) t.push_back({s.t, s.rho, s.z, s.drho, s.dz});
    g["table"] = t;
  }
  j["geometry"] = g;
  j["bc"] = c.bc == BcKind::neumann ? "neumann" : "transmission";
  json inc;
  if (c.kvec) {
    inc["kvec"] = {c.kvec->x(), c.kvec->y(), c.kvec->z()};
  } else {
    inc["k"] = c.k;
    inc["theta"] = c.theta;
    inc["phi"] = c.phi;
  }
  if (c.bc == BcKind::transmission) inc["k_minus"] = to_json(c.k_minus);
  inc["amplitude"] = c.amplitude;
  j["incident"] = inc;
  if (c.lattice) j["lattice"] = {{"ex", c.lattice->ex}, {"ey", c.lattice->ey}};
  const PeriodicParams& p = c.numerics;
  json n;
  n["N"] = p.mfs.N;
  n["M"] = pb ? static_cast<int>(pb->setup().nodes.size()) : p.mfs.resolved_M();
  n["P"] = p.mfs.P;
  n["q"] = pb ? pb->setup().q : p.mfs.q;
  n["tau"] = p.mfs.tau;
  n["tau_minus"] = p.mfs.tau_minus > 0 ? p.mfs.tau_minus : p.mfs.tau;
  n["scheme"] = to_string(p.mfs.scheme);
  n["svd_tol"] = p.mfs.svd_tol;
  n["p"] = p.p;
  n["N0"] = p.N0;
  n["M1"] = pb ? pb->cell().M1 : p.M1;
  n["z0"] = pb ? pb->cell().z0 : p.z0;
  n["aux"] = p.aux == AuxKind::spherical_harmonics ? "sph" : "proxy";
  n["N2"] = p.N2;
  n["proxy_R"] = p.proxy_R;
  n["gmres_tol"] = p.gmres_tol;
  n["maxit"] = p.maxit;
  n["q_svd_tol"] = p.q_svd_tol;
  n["backend"] = p.backend;
  j["numerics"] = n;
  j["output"] = {{"dir", c.out_dir}};
  return j;
}

}  // namespace qpmfs::cli
