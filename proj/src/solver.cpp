#include "qpmfs/solver.hpp"

#include <chrono>
#include <cmath>

#include "qpmfs/fourier.hpp"
#include "qpmfs/ringkernel.hpp"

namespace qpmfs {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CVector flat(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

CMatrix shaped(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

}  // namespace

GmresResult gmres(const std::function<CVector(const CVector&)>& op, const CVector& b,
                  double tol, int maxit) {
  GmresResult res;
  const Eigen::Index n = b.size();
  const double beta = b.norm();
  res.x = CVector::Zero(n);
  if (beta == 0.0) {
    res.converged = true;
    return res;
  }
  if (maxit < 1) return res;
  CMatrix V(n, maxit + 1);
  CMatrix H = CMatrix::Zero(maxit + 1, maxit);
  std::vector<double> cs(maxit);
  std::vector<cplx> sn(maxit);
  CVector g = CVector::Zero(maxit + 1);
  g(0) = beta;
  V.col(0) = b / beta;
  int j = 0;
  for (; j < maxit; ++j) {
    CVector w = op(V.col(j));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const cplx h = V.col(i).dot(w);
        w -= h * V.col(i);
        H(i, j) += h;
      }
    const double hn = w.norm();
    H(j + 1, j) = hn;
    if (hn > 0.0) V.col(j + 1) = w / hn;
    for (int i = 0; i < j; ++i) {
      const cplx a = H(i, j), c = H(i + 1, j);
      H(i, j) = cs[i] * a + sn[i] * c;
      H(i + 1, j) = -std::conj(sn[i]) * a + cs[i] * c;
    }
    const cplx a = H(j, j), c = H(j + 1, j);
    const double r = std::hypot(std::abs(a), std::abs(c));
    if (std::abs(a) == 0.0) {
      cs[j] = 0.0;
      sn[j] = std::conj(c) / std::abs(c);
      H(j, j) = r;
    } else {
      cs[j] = std::abs(a) / r;
      sn[j] = (a / std::abs(a)) * std::conj(c) / r;
      H(j, j) = (a / std::abs(a)) * r;
    }
    H(j + 1, j) = 0.0;
    g(j + 1) = -std::conj(sn[j]) * g(j);
    g(j) = cs[j] * g(j);
    const double rel = std::abs(g(j + 1)) / beta;
    res.history.push_back(rel);
    if (rel <= tol || hn == 0.0) {
      res.converged = true;
      ++j;
      break;
    }
  }
  res.iterations = j;
  const CVector y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
  res.x = V.leftCols(j) * y;
  return res;
}

std::vector<Vec3> proxy_points(int N2, double R) {
  if (N2 < 1) throw InputError("N2 must be positive");
  if (!(R > 0)) throw InputError("proxy radius must be positive");
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(N2) * N2);
  for (int a = 0; a < N2; ++a) {
    const double phi = 2 * pi * a / N2;
    for (int i = 0; i < N2; ++i) {
      const double th = pi * (i + 0.5) / N2;
      out.emplace_back(R * std::sin(th) * std::cos(phi), R * std::sin(th) * std::sin(phi),
                       R * std::cos(th));
    }
  }
  return out;
}

PeriodicProblem::PeriodicProblem(GeneratingCurve curve, BcKind bc, IncidentWave inc,
                                 Lattice lattice, PeriodicParams params)
    : curve_(std::move(curve)), bc_(bc), inc_(inc), lattice_(lattice), params_(params) {
  if (!(lattice.ex > 0 && lattice.ey > 0)) throw InputError("lattice periods must be positive");
  if (bc == BcKind::transmission && inc.k_minus == 0.0)
    throw InputError("transmission requires an interior wavenumber");
  phases_ = bloch_phases(inc_, lattice_);
  backend_ = make_backend(params_.backend);
  build_onebody();
  build_walls();
  build_aux();
  build_rhs();
}

void PeriodicProblem::build_onebody() {
  auto t0 = std::chrono::steady_clock::now();
  setup_ = make_setup(curve_, bc_, inc_.k(), inc_.k_minus, params_.mfs);
  const ModeBlockSystem sys = fill_system(*setup_);
  build_.fill = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  factor_ = ModeBlockFactor(sys, params_.mfs.svd_tol);
  build_.factor = seconds_since(t0);
  const int P = setup_->P;
  const int M = static_cast<int>(setup_->nodes.size());
  ring_targets_.clear();
  ring_normals_.clear();
  for (int m = 0; m < M; ++m)
    for (int l = 0; l < P; ++l) {
      ring_targets_.push_back(rotate(setup_->nodes.points[m], 2 * pi * l / P));
      ring_normals_.push_back(rotate(setup_->nodes.normals[m], 2 * pi * l / P));
    }
}

void PeriodicProblem::build_walls() {
  auto t0 = std::chrono::steady_clock::now();
  const double z0 = params_.z0 > 0 ? params_.z0 : default_z0(curve_, lattice_);
  if (!(curve_.z_max() < z0 && curve_.z_min() > -z0))
    throw InputError("obstacle does not fit inside the cell (-z0, z0)");
  if (curve_.rho_max() >= 0.5 * std::min(lattice_.ex, lattice_.ey))
    throw InputError("obstacle does not fit inside the lattice cell");
  const int M1 = params_.M1 > 0 ? params_.M1 : min_M1(k());
  if (M1 < min_M1(k())) throw InputError("M1 below ceil(4k/pi)");
  cell_ = make_unit_cell(lattice_, z0, M1);
  rb_ = rb_modes(inc_, lattice_, params_.N0);
  C_ = fill_C(setup_->inner, cell_, phases_, k(), setup_->P);
  build_.fill += seconds_since(t0);
}

void PeriodicProblem::build_aux() {
  auto t0 = std::chrono::steady_clock::now();
  if (params_.aux == AuxKind::spherical_harmonics) {
    aux_ = spherical_basis(params_.p);
  } else {
    aux_ = proxy_basis(proxy_points(params_.N2, params_.proxy_R));
    const double e = std::hypot(std::hypot(lattice_.ex / 2, lattice_.ey / 2), cell_.z0);
    if (params_.proxy_R <= e)
      throw InputError("proxy sphere must enclose the unit cell");
  }
  B_ = fill_B(setup_->nodes, aux_, k(), setup_->P, bc_);
  Q_ = fill_Q(cell_, aux_, rb_, phases_, k());
  build_.fill += seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  Qsvd_ = TruncatedSvd(Q_, params_.q_svd_tol);
  q_factor_seconds_ = seconds_since(t0);
  build_.factor += q_factor_seconds_;
}

void PeriodicProblem::build_rhs() {
  rhs_ = incident_rhs(setup_->nodes, inc_, bc_, setup_->P);
}

void PeriodicProblem::update(const PeriodicParams& np) {
  const MfsParams &a = params_.mfs, &b = np.mfs;
  const bool onebody = a.N != b.N || a.M != b.M || a.P != b.P || a.q != b.q || a.tau != b.tau ||
                       a.tau_minus != b.tau_minus || a.scheme != b.scheme ||
                       a.svd_tol != b.svd_tol;
  const bool walls = onebody || np.z0 != params_.z0 || np.M1 != params_.M1 || np.N0 != params_.N0;
  const bool aux = walls || np.p != params_.p || np.aux != params_.aux || np.N2 != params_.N2 ||
                   np.proxy_R != params_.proxy_R || np.q_svd_tol != params_.q_svd_tol;
  const bool backend = np.backend != params_.backend;
  params_ = np;
  build_ = {};
  if (backend) backend_ = make_backend(params_.backend);
  if (onebody) {
    build_onebody();
    build_rhs();
  }
  if (walls) build_walls();
  if (aux) build_aux();
}

PointSources PeriodicProblem::image_sources(const CMatrix& ext, bool include_center) const {
  const PointSources base = ring_point_sources(setup_->inner, ext);
  PointSources out;
  for (const auto& im : near_images(lattice_, phases_, include_center)) {
    for (std::size_t s = 0; s < base.points.size(); ++s) {
      out.points.push_back(base.points[s] + im.shift);
      out.strengths.push_back(base.strengths[s] * im.weight);
    }
  }
  return out;
}

namespace {

CMatrix else_modes(const PeriodicProblem& pb, const SummationBackend& backend,
                   const PointSources& src, std::span<const Vec3> targets,
                   std::span<const Vec3> normals) {
  const int P = pb.P();
  const int M = static_cast<int>(pb.setup().nodes.size());
  const bool trans = pb.bc() == BcKind::transmission;
  std::vector<cplx> val(targets.size()), der(targets.size());
  backend.evaluate(pb.k(), src.points, src.strengths, targets, normals,
                   trans ? val.data() : nullptr, der.data());
  const int R = trans ? 2 * M : M;
  CMatrix out(R, P);
  const Dft dft(P);
  std::vector<cplx> modes(P);
  for (int m = 0; m < M; ++m) {
    dft.samples_to_modes(der.data() + static_cast<std::size_t>(m) * P, modes.data(), P);
    for (int c = 0; c < P; ++c) out(trans ? M + m : m, c) = modes[c];
    if (trans) {
      dft.samples_to_modes(val.data() + static_cast<std::size_t>(m) * P, modes.data(), P);
      for (int c = 0; c < P; ++c) out(m, c) = modes[c];
    }
  }
  return out;
}

}  // namespace

CMatrix PeriodicProblem::apply_else(const CMatrix& ext) const {
  return else_modes(*this, *backend_, image_sources(ext, false), ring_targets_, ring_normals_);
}

CMatrix PeriodicProblem::apply_else_direct(const CMatrix& ext) const {
  return else_modes(*this, DirectBackend(), image_sources(ext, false), ring_targets_,
                    ring_normals_);
}

SolveResult PeriodicProblem::solve() const {
  const auto t0 = std::chrono::steady_clock::now();
  const int P = setup_->P;
  const int N = this->N();
  const int R = factor_.rows_per_mode();
  const int na = aux_.size();
  const int nr = rb_.size();

  auto op = [&](const CVector& v) -> CVector {
    const CMatrix V = shaped(v, R, P);
    const CMatrix W = factor_.apply_pinv(V);
    const CMatrix Wext = W.topRows(N);
    const CVector xi = Qsvd_.apply_pinv(CVector(C_ * flat(Wext)));
    CVector out = v + flat(apply_else(Wext));
    out.noalias() -= B_ * xi.head(na);
    return out;
  };
  const GmresResult g = gmres(op, flat(rhs_), params_.gmres_tol, params_.maxit);

  SolveResult res;
  res.eta = factor_.apply_pinv(shaped(g.x, R, P));
  const CVector xi = -Qsvd_.apply_pinv(CVector(C_ * flat(CMatrix(res.eta.topRows(N)))));
  res.d = xi.head(na);
  res.a = xi.segment(na, nr);
  res.b = xi.tail(nr);
  res.iterations = g.iterations;
  res.history = g.history;
  res.residual = g.history.empty() ? 0.0 : g.history.back();
  res.converged = g.converged;
  res.timings = build_;
  res.timings.solve = seconds_since(t0);
  return res;
}

bool PeriodicProblem::inside_obstacle(const Vec3& x) const {
  return curve_.inside({std::hypot(x.x(), x.y()), x.z()});
}

void PeriodicProblem::eval_cell(const SolveResult& res, std::span<const Vec3> points,
                                std::vector<cplx>& u, std::vector<Vec3c>* grad) const {
  u.clear();
  if (grad) grad->clear();
  if (points.empty()) return;
  const int N = this->N();
  const CMatrix ext = res.eta.topRows(N);
  const std::size_t T = points.size();
  std::vector<Vec3> tg(points.begin(), points.end());
  // images
  std::vector<cplx> vi;
  std::vector<Vec3c> gi;
  eval_point_sources(k(), image_sources(ext, false), tg, vi, grad ? &gi : nullptr);
  // central copy: point sources far away, ring kernels close to the surface
  const double margin = 0.5 * std::max(curve_.rho_max(), 0.5 * (curve_.z_max() - curve_.z_min()));
  std::vector<Vec3> far;
  std::vector<std::size_t> far_idx, near_idx;
  for (std::size_t t = 0; t < T; ++t) {
    const double rho = std::hypot(tg[t].x(), tg[t].y());
    const bool near = rho < curve_.rho_max() + margin && tg[t].z() < curve_.z_max() + margin &&
                      tg[t].z() > curve_.z_min() - margin;
    if (near) {
      near_idx.push_back(t);
    } else {
      far_idx.push_back(t);
      far.push_back(tg[t]);
    }
  }
  std::vector<cplx> vc(T);
  std::vector<Vec3c> gc(T, Vec3c::Zero());
  {
    std::vector<cplx> vf;
    std::vector<Vec3c> gf;
    eval_point_sources(k(), ring_point_sources(setup_->inner, ext), far, vf, grad ? &gf : nullptr);
    for (std::size_t i = 0; i < far_idx.size(); ++i) {
      vc[far_idx[i]] = vf[i];
      if (grad) gc[far_idx[i]] = gf[i];
    }
  }
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(near_idx.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    const std::size_t t = near_idx[i];
    Vec3c g;
    vc[t] = eval_ring_accurate(ext, setup_->inner, k(), setup_->q, tg[t], grad ? &g : nullptr);
    if (grad) gc[t] = g;
  }
  // auxiliary basis
  CMatrix av, ax, ay, az;
  const std::vector<Vec3> dx(T, Vec3(1, 0, 0)), dy(T, Vec3(0, 1, 0)), dz(T, Vec3(0, 0, 1));
  eval_aux(aux_, k(), tg, grad ? std::span<const Vec3>(dx) : std::span<const Vec3>(), &av,
           grad ? &ax : nullptr);
  CVector ua = av * res.d;
  CVector gx, gy, gz;
  if (grad) {
    gx = ax * res.d;
    eval_aux(aux_, k(), tg, dy, nullptr, &ay);
    eval_aux(aux_, k(), tg, dz, nullptr, &az);
    gy = ay * res.d;
    gz = az * res.d;
  }
  u.resize(T);
  if (grad) grad->resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    u[t] = vi[t] + vc[t] + ua(t);
    if (grad) (*grad)[t] = gi[t] + gc[t] + Vec3c(gx(t), gy(t), gz(t));
  }
}

std::vector<cplx> PeriodicProblem::eval_field(const SolveResult& res,
                                              std::span<const Vec3> points) const {
  const std::size_t T = points.size();
  std::vector<cplx> out(T, cplx(NAN, NAN));
  std::vector<Vec3> slab;
  std::vector<std::size_t> slab_idx;
  std::vector<cplx> slab_w;
  const double z0 = cell_.z0;
  for (std::size_t t = 0; t < T; ++t) {
    const Vec3& x = points[t];
    if (x.z() > z0 || x.z() < -z0) {
      const bool up = x.z() > z0;
      const CVector& amp = up ? res.a : res.b;
      cplx s = 0.0;
      for (int r = 0; r < rb_.size(); ++r) {
        const RbMode& md = rb_.modes[r];
        const double dz = up ? x.z() - z0 : -(x.z() + z0);
        s += amp(r) * std::exp(I * (md.kx * x.x() + md.ky * x.y() + md.kz * dz));
      }
      out[t] = s;
      continue;
    }
    const int m = static_cast<int>(std::lround(x.x() / lattice_.ex));
    const int n = static_cast<int>(std::lround(x.y() / lattice_.ey));
    const Vec3 x0 = x - m * lattice_.e1() - n * lattice_.e2();
    if (inside_obstacle(x0)) continue;
    slab.push_back(x0);
    slab_idx.push_back(t);
    slab_w.push_back(std::pow(phases_.alpha, m) * std::pow(phases_.beta, n));
  }
  std::vector<cplx> u;
  eval_cell(res, slab, u, nullptr);
  for (std::size_t i = 0; i < slab.size(); ++i) out[slab_idx[i]] = slab_w[i] * u[i];
  return out;
}

std::vector<cplx> PeriodicProblem::eval_interior(const SolveResult& res,
                                                 std::span<const Vec3> points) const {
  if (bc_ != BcKind::transmission) throw InputError("interior field exists for transmission only");
  const int N = this->N();
  const CMatrix inner = res.eta.bottomRows(N);
  std::vector<cplx> out(points.size());
  const std::ptrdiff_t T = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < T; ++t)
    out[t] = eval_ring_accurate(inner, *setup_->outer, inc_.k_minus, setup_->q, points[t]);
  return out;
}

}  // namespace qpmfs
