#include <cmath>

#include <gtest/gtest.h>

#include "qpmfs/basiscmp.hpp"
#include "qpmfs/diagnostics.hpp"

using namespace qpmfs;

namespace {

FieldFn plane_wave(const Vec3c& kv) {
  return [kv](std::span<const Vec3> x, std::vector<cplx>& u, std::vector<Vec3c>& g) {
    u.resize(x.size());
    g.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      u[i] = std::exp(I * (kv.x() * x[i].x() + kv.y() * x[i].y() + kv.z() * x[i].z()));
      g[i] = I * kv * u[i];
    }
  };
}

}  // namespace

TEST(EpsPer, IncidentWaveIsMachinePeriodic) {
  const auto inc = IncidentWave::from_angles(4.0, -pi / 4, pi / 3);
  const Lattice lat{2.04, 2.04};
  const auto tc = make_test_cell(lat, 1.2, 16);
  const auto e = eps_per_field(tc, bloch_phases(inc, lat), plane_wave(inc.kvec.cast<cplx>()));
  EXPECT_LE(e.total, 1e-13);
  EXPECT_GT(e.wall_norm, 1.0);
}

TEST(EpsPer, RayleighBlochModesArePeriodic) {
  const auto inc = IncidentWave::from_angles(4.0, -pi / 4, pi / 3);
  const Lattice lat{2.04, 2.04};
  const auto tc = make_test_cell(lat, 1.2, 16);
  const auto rb = rb_modes(inc, lat, 5);
  double worst = 0;
  for (const auto& m : rb.modes) {
    const Vec3c kv(m.kx, m.ky, m.kz);
    if (std::abs(m.kz.imag()) * 1.2 > 30) continue;  // keep magnitudes O(1) on the walls
    worst = std::max(worst, eps_per_field(tc, bloch_phases(inc, lat), plane_wave(kv)).total /
                                std::exp(std::abs(m.kz.imag()) * 1.2));
  }
  EXPECT_LE(worst, 1e-13);
}

TEST(EpsPer, DetectsBrokenPeriodicity) {
  const auto inc = IncidentWave::from_angles(4.0, -pi / 4, pi / 3);
  const Lattice lat{2.0, 2.0};
  const auto tc = make_test_cell(lat, 1.0, 8);
  const Vec3c wrong(inc.kvec.x() + 0.3, inc.kvec.y(), inc.kvec.z());
  EXPECT_GT(eps_per_field(tc, bloch_phases(inc, lat), plane_wave(wrong)).lr, 0.1);
}

TEST(EpsFlux, NoScattererConservesExactly) {
  const auto inc = IncidentWave::from_angles(4.0, -0.6, 0.3);
  const auto rb = rb_modes(inc, {2.0, 2.0}, 6);
  const CVector z = CVector::Zero(rb.size());
  const auto f = eps_flux(rb, z, z, 1.3, 1.0);
  EXPECT_LE(f.value, 1e-15);
  EXPECT_FALSE(f.no_propagating);
}

TEST(EpsFlux, MirrorReflectionConserves) {
  // total reflection into (0,0) with unit modulus: |a00|^2 = |A|^2
  const auto inc = IncidentWave::from_angles(2.0, -1.2, 0.0);
  const auto rb = rb_modes(inc, {1.0, 1.0}, 3);
  CVector a = CVector::Zero(rb.size()), b = CVector::Zero(rb.size());
  const double z0 = 0.7;
  for (int r = 0; r < rb.size(); ++r)
    if (rb.modes[r].m == 0 && rb.modes[r].n == 0) {
      a(r) = std::polar(1.0, 0.4);
      b(r) = -std::exp(I * rb.modes[r].kz * z0);  // cancels transmission
    }
  EXPECT_LE(eps_flux(rb, a, b, z0).value, 1e-14);
}

TEST(Wood, HardAnomalyAtNormalIncidence) {
  IncidentWave inc;
  inc.kvec = Vec3(0, 0, -2 * pi);
  const auto w = wood_check(inc, {1, 1});
  EXPECT_TRUE(w.hard);
  EXPECT_EQ(w.min_margin, 0.0);
  int named = 0;
  for (const auto& m : w.modes)
    if (m.margin == 0.0) {
      EXPECT_EQ(std::abs(m.m) + std::abs(m.n), 1);
      ++named;
    }
  EXPECT_EQ(named, 4);
  for (const char* s : {"(1,0)", "(-1,0)", "(0,1)", "(0,-1)"})
    EXPECT_NE(w.note.find(s), std::string::npos) << s;
}

TEST(Wood, NearAnomalyEstimatesDigits) {
  IncidentWave inc;
  inc.kvec = Vec3(0, 0, -2 * pi * (1 + 1e-9));
  const auto w = wood_check(inc, {1, 1});
  EXPECT_FALSE(w.hard);
  ASSERT_FALSE(w.modes.empty());
  EXPECT_GT(w.digits_lost, 1.5);
  EXPECT_FALSE(w.note.empty());
}

TEST(Wood, FarFromAnomaly) {
  const auto w = wood_check(IncidentWave::from_angles(4.0, -pi / 4, pi / 3), {2.04, 2.04});
  EXPECT_FALSE(w.hard);
  EXPECT_TRUE(w.modes.empty());
  EXPECT_GT(w.min_margin, 1e-3);
  EXPECT_TRUE(w.note.empty());
}

namespace {

PeriodicProblem tiny_problem() {
  ShapeParams sp;
  sp.scale = 0.3;
  PeriodicParams p;
  p.mfs.N = 40;
  p.mfs.P = 16;
  p.mfs.tau = 0.15;
  p.p = 8;
  p.N0 = 5;
  p.M1 = 8;
  return PeriodicProblem(make_curve(ShapeTag::smooth, sp), BcKind::neumann,
                         IncidentWave::from_angles(2.0, -pi / 4, pi / 3), {2.0, 2.0}, p);
}

}  // namespace

TEST(Scan, RowsAndParameterErrors) {
  auto pb = tiny_problem();
  const auto rows = scan(pb, "p", {4, 8});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].param, "p");
  EXPECT_EQ(rows[1].value, 8);
  EXPECT_GT(rows[0].eps_per, rows[1].eps_per);
  EXPECT_EQ(pb.params().p, 8);
  PeriodicParams p;
  EXPECT_THROW(set_param(p, "tau", 1), InputError);
  set_param(p, "N0", 9);
  EXPECT_EQ(p.N0, 9);
}

TEST(BasisComparison, ProxyRowsAndProbe) {
  auto pb = tiny_problem();
  std::string note;
  const Vec3 moved = exterior_probe(pb, Vec3(0, 0, 0.01), &note);
  EXPECT_FALSE(pb.inside_obstacle(moved));
  EXPECT_FALSE(note.empty());
  const Vec3 kept = exterior_probe(pb, Vec3(0.9, 0.9, 0.5), &note);
  EXPECT_EQ(kept, Vec3(0.9, 0.9, 0.5));

  const auto cmp = compare_bases(pb, {6, 10}, {8, 12}, Vec3(0.9, 0.9, 0.5));
  ASSERT_EQ(cmp.rows.size(), 4u);
  EXPECT_EQ(cmp.rows[0].basis, "sph");
  EXPECT_EQ(cmp.rows[0].unknowns, 49);
  EXPECT_EQ(cmp.rows[2].basis, "proxy");
  EXPECT_EQ(cmp.rows[3].unknowns, 144);
  EXPECT_EQ(pb.params().aux, AuxKind::spherical_harmonics);
  EXPECT_EQ(pb.params().p, 8);
  const double target = cmp.rows[1].eps_per;
  EXPECT_EQ(matched_size(cmp, "sph", target), 10);
  EXPECT_EQ(matched_size(cmp, "sph", 0.0), -1);
}
