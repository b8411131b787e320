#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "qpmfs/basiscmp.hpp"
#include "qpmfs/diagnostics.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpmfs;
using namespace qpmfs::cli;

namespace {

enum Exit { ok = 0, config_error = 2, not_converged = 3, wood_stop = 4 };

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool dry_run = false;
  bool allow_wood = false;
  bool no_timings = false;
  int threads = 0;
};

json load_tree(const Common& c) {
  std::ifstream in(c.config_path);
  if (!in) throw ConfigError("cannot open config file '" + c.config_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + c.config_path + "' is not valid JSON: " + e.what());
  }
  for (const auto& o : c.overrides) apply_override(j, o);
  return j;
}

RunConfig load(const Common& c) {
  RunConfig cfg = parse_config(load_tree(c));
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  if (c.threads > 0) omp_set_num_threads(c.threads);
  return cfg;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

// Returns nonzero when the run must stop at a Wood anomaly.
int check_wood(const RunConfig& cfg, const Common& c) {
  const WoodReport w = wood_check(cfg.incident(), cfg.require_lattice());
  if (!w.note.empty()) std::cerr << "warning: " << w.note << '\n';
  if (w.hard && !c.allow_wood) {
    std::cerr << "error: Wood anomaly; rerun with --allow-wood to solve anyway\n";
    return wood_stop;
  }
  return ok;
}

PeriodicProblem make_problem(const RunConfig& cfg) {
  return PeriodicProblem(cfg.curve(), cfg.bc, cfg.incident(), cfg.require_lattice(),
                         cfg.numerics);
}

void write_csv_with_meta(const fs::path& path, const std::string& kind, const json& config,
                         const std::string& body) {
  std::ofstream(path) << body;
  write_json(path.string() + ".meta.json", csv_meta(kind, config));
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        // lo:hi:step
        int lo, hi, step = 1;
        char extra;
        if (std::sscanf(item.c_str(), "%d:%d:%d%c", &lo, &hi, &step, &extra) < 2 || step < 1)
          throw ConfigError("bad range '" + item + "'");
        for (int v = lo; v <= hi; v += step) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad integer list '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

int cmd_solve(const Common& c) {
  const RunConfig cfg = load(c);
  if (c.dry_run) {
    std::cout << resolved_config(cfg).dump(2) << '\n';
    return ok;
  }
  if (int rc = check_wood(cfg, c)) return rc;
  PeriodicProblem pb = make_problem(cfg);
  const SolveResult res = pb.solve();
  const ErrorReport err = error_report(pb, res);
  const WoodReport wood = wood_check(pb.incident(), pb.lattice());
  const fs::path path = out_path(cfg, "result.json");
  write_json(path, result_json(cfg, pb, res, err, wood, !c.no_timings));
  std::printf("iterations %d  residual %.3g  eps_bc %.3g  eps_per %.3g  eps_flux %.3g\n",
              res.iterations, res.residual, err.eps_bc, err.per.total, err.flux.value);
  std::printf("wrote %s\n", path.c_str());
  return res.converged ? ok : not_converged;
}

int cmd_field(const Common& c, const std::string& plane, const std::string& u,
              const std::string& v) {
  const RunConfig cfg = load(c);
  const SliceSpec slice = parse_slice(plane, u, v);
  if (c.dry_run) {
    std::cout << resolved_config(cfg).dump(2) << '\n';
    return ok;
  }
  if (int rc = check_wood(cfg, c)) return rc;
  PeriodicProblem pb = make_problem(cfg);
  const SolveResult res = pb.solve();
  std::ostringstream body;
  write_field_csv(body, pb, res, slice_points(slice));
  const fs::path path = out_path(cfg, "field.csv");
  write_csv_with_meta(path, "field", resolved_config(cfg, &pb), body.str());
  std::printf("wrote %s\n", path.c_str());
  return res.converged ? ok : not_converged;
}

int cmd_scan(const Common& c, const std::string& param, const std::string& values) {
  const RunConfig cfg = load(c);
  const std::vector<int> vals = parse_ints(values);
  {
    PeriodicParams probe = cfg.numerics;
    set_param(probe, param, vals.front());
  }
  if (c.dry_run) {
    std::cout << resolved_config(cfg).dump(2) << '\n';
    return ok;
  }
  if (int rc = check_wood(cfg, c)) return rc;
  PeriodicProblem pb = make_problem(cfg);
  const std::vector<ScanRow> rows = scan(pb, param, vals);
  std::ostringstream body;
  write_scan_csv(body, rows);
  const fs::path path = out_path(cfg, "scan.csv");
  write_csv_with_meta(path, "scan", resolved_config(cfg), body.str());
  std::cout << body.str();
  return ok;
}

int cmd_onebody(const Common& c, double ref_factor) {
  const RunConfig cfg = load(c);
  if (c.dry_run) {
    std::cout << resolved_config(cfg).dump(2) << '\n';
    return ok;
  }
  const IncidentWave inc = cfg.incident();
  const MfsParams& mp = cfg.numerics.mfs;
  const OneBodySetup setup = make_setup(cfg.curve(), cfg.bc, inc.k(), inc.k_minus, mp);
  const OneBodyResult res = solve_onebody(setup, inc, mp.svd_tol);
  json j;
  j["format"] = kResultFormat;
  j["config"] = resolved_config(cfg);
  j["config"]["numerics"]["M"] = static_cast<int>(setup.nodes.size());
  j["config"]["numerics"]["q"] = setup.q;
  j["eps1"] = res.eps1;
  j["probe"] = {{"point", {10, 10, 10}}, {"u", to_json(res.probe)}};
  j["coef_norm"] = res.coef_norm;
  if (ref_factor > 1.0) {
    MfsParams fine = mp;
    auto up = [&](int v) { return static_cast<int>(std::ceil(v * ref_factor)); };
    fine.N = up(mp.N);
    fine.M = 0;
    fine.P = up(mp.P / 2) * 2;
    fine.q = std::max(up(setup.q), fine.P);
    const OneBodySetup ref_setup = make_setup(cfg.curve(), cfg.bc, inc.k(), inc.k_minus, fine);
    const OneBodyResult ref = solve_onebody(ref_setup, inc, mp.svd_tol);
    j["eps2"] = std::abs(res.probe - ref.probe);
    j["reference"] = {{"N", fine.N}, {"P", fine.P}, {"q", ref_setup.q}, {"eps1", ref.eps1}};
  }
  const fs::path path = out_path(cfg, "onebody.json");
  write_json(path, j);
  if (j.contains("eps2"))
    std::printf("eps1 %.3g eps2 %.3g\n", res.eps1, j["eps2"].get<double>());
  else
    std::printf("eps1 %.3g\n", res.eps1);
  std::printf("wrote %s\n", path.c_str());
  return ok;
}

int cmd_compare(const Common& c, const std::string& ps, const std::string& n2s,
                const std::vector<double>& probe) {
  const RunConfig cfg = load(c);
  const std::vector<int> pv = parse_ints(ps), nv = parse_ints(n2s);
  if (probe.size() != 3) throw ConfigError("--probe needs three coordinates");
  if (c.dry_run) {
    std::cout << resolved_config(cfg).dump(2) << '\n';
    return ok;
  }
  if (int rc = check_wood(cfg, c)) return rc;
  PeriodicProblem pb = make_problem(cfg);
  const BasisComparison cmp = compare_bases(pb, pv, nv, Vec3(probe[0], probe[1], probe[2]));
  if (!cmp.note.empty()) std::cerr << "note: " << cmp.note << '\n';
  std::ostringstream body;
  write_basis_csv(body, cmp);
  const fs::path path = out_path(cfg, "basis.csv");
  json meta_cfg = resolved_config(cfg);
  meta_cfg["probe"] = {cmp.probe.x(), cmp.probe.y(), cmp.probe.z()};
  if (!cmp.note.empty()) meta_cfg["probe_note"] = cmp.note;
  write_csv_with_meta(path, "basis", meta_cfg, body.str());
  std::cout << body.str();
  return ok;
}

int cmd_wood(const Common& c, double margin) {
  const RunConfig cfg = load(c);
  const WoodReport w = wood_check(cfg.incident(), cfg.require_lattice(), margin);
  json j = wood_json(w);
  j["format"] = kResultFormat;
  j["config"] = resolved_config(cfg);
  std::cout << wood_json(w).dump(2) << '\n';
  if (!c.dry_run) write_json(out_path(cfg, "wood.json"), j);
  return w.hard && !c.allow_wood ? wood_stop : ok;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("config", c.config_path, "JSON config file")->required();
  app->add_option("--set", c.overrides, "Override a config value: key.path=value (repeatable)");
  app->add_option("--out", c.out_dir, "Output directory (overrides output.dir)");
  app->add_flag("--dry-run", c.dry_run, "Print the resolved config and exit");
  app->add_flag("--allow-wood", c.allow_wood, "Solve even at a Wood anomaly");
  app->add_option("--threads", c.threads, "OpenMP threads (default: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qpmfs: acoustic scattering from doubly periodic arrays of axisymmetric obstacles.\n"
      "Angles are in radians; k_vec = k (cos th cos ph, cos th sin ph, sin th)."};
  app.require_subcommand(1);
  Common c;
  std::string plane = "y=0", range_u = "-1:1:21", range_v = "-1:1:21";
  std::string scan_param, scan_values;
  std::string cmp_p = "8:24:4", cmp_n2 = "16:48:8";
  std::vector<double> probe{0.9, 0.9, 0.9};
  double ref_factor = 1.25, wood_margin = 1e-3;

  auto* solve = app.add_subcommand("solve", "Periodic solve; writes result.json");
  add_common(solve, c);
  solve->add_flag("--no-timings", c.no_timings, "Omit timings so output is reproducible");

  auto* field = app.add_subcommand("field", "Field on an axis-aligned slice; writes field.csv");
  add_common(field, c);
  field->add_option("--plane", plane, "Fixed coordinate, e.g. y=0");
  field->add_option("--u", range_u, "First free axis range lo:hi:n");
  field->add_option("--v", range_v, "Second free axis range lo:hi:n");

  auto* scn = app.add_subcommand("scan", "Convergence scan; writes scan.csv");
  add_common(scn, c);
  scn->add_option("--param", scan_param, "One of N, P, q, p, N0, M1, N2")->required();
  scn->add_option("--values", scan_values, "Comma list or lo:hi:step")->required();

  auto* one = app.add_subcommand("onebody", "Isolated obstacle solve; writes onebody.json");
  add_common(one, c);
  one->add_option("--ref-factor", ref_factor,
                  "Refinement of N, P, q for the eps2 reference (<= 1 skips it)");

  auto* cmp = app.add_subcommand("compare-basis", "Spherical harmonics vs proxy points");
  add_common(cmp, c);
  cmp->add_option("--p", cmp_p, "Spherical-harmonic degrees");
  cmp->add_option("--n2", cmp_n2, "Proxy points per longitude line");
  cmp->add_option("--probe", probe, "Probe point x y z")->expected(3);

  auto* wood = app.add_subcommand("wood", "Wood-anomaly margins");
  add_common(wood, c);
  wood->add_option("--margin", wood_margin, "Report orders with |kz|/k below this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : config_error;
  }

  try {
    if (*solve) return cmd_solve(c);
    if (*field) return cmd_field(c, plane, range_u, range_v);
    if (*scn) return cmd_scan(c, scan_param, scan_values);
    if (*one) return cmd_onebody(c, ref_factor);
    if (*cmp) return cmd_compare(c, cmp_p, cmp_n2, probe);
    if (*wood) return cmd_wood(c, wood_margin);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return not_converged;
  }
  return ok;
}
