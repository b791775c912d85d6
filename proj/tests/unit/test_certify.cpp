#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cascade/certify.hpp"
#include "cascade/error.hpp"
#include "fixtures.hpp"

using namespace cascade;
using std::numbers::pi;

namespace {

double bisect_halanay(double d0, double d1, double h) {
  double lo = 0.0, hi = d0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (m - d0 + d1 * std::exp(2.0 * m * h) > 0.0 ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

// Sylvester: M < 0 iff (-1)^k det(M_k) > 0 for every leading block.
bool negative_definite_by_minors(const Eigen::MatrixXd& M) {
  for (Eigen::Index k = 1; k <= M.rows(); ++k) {
    const double d = M.topLeftCorner(k, k).determinant();
    if ((k % 2 == 1 ? -d : d) <= 0.0) return false;
  }
  return true;
}

KernelSet kernels_for(const PlantParams& p, const DesignGains& g, double dx = 0.04) {
  return build_kernels(p, g, UniformGrid::from_step(dx));
}

}  // namespace

TEST(Halanay, KnownValues) {
  EXPECT_EQ(halanay_decay(0.3, 0.3, 0.4), 0.0);
  EXPECT_NEAR(halanay_decay(0.3, 0.0, 0.4), 0.3, 1e-14);
  const double d = halanay_decay(0.5, 0.25, 0.4);
  EXPECT_NEAR(d, bisect_halanay(0.5, 0.25, 0.4), 1e-12);
  EXPECT_NEAR(d, 0.205, 5e-4);
}

TEST(Halanay, FixedPointAndMonotonicity) {
  for (double d0 : {0.2, 0.5, 1.0})
    for (double f : {0.1, 0.5, 0.9})
      for (double h : {0.1, 0.4, 2.0}) {
        const double d1 = f * d0;
        const double d = halanay_decay(d0, d1, h);
        EXPECT_LE(std::abs(d - d0 + d1 * std::exp(2.0 * d * h)), 1e-10);
        EXPECT_GT(halanay_decay(d0 * 1.1, d1, h), d);
        EXPECT_LT(halanay_decay(d0, d1 * 1.1, h), d);
        EXPECT_LT(halanay_decay(d0, d1, h * 1.1), d);
      }
}

TEST(Halanay, Errors) {
  EXPECT_THROW(halanay_decay(0.2, 0.3, 0.4), InvalidArgument);
  EXPECT_THROW(halanay_decay(0.3, 0.2, 0.0), InvalidArgument);
}

TEST(Tuning, Validate) {
  TuningParams t;
  EXPECT_NO_THROW(validate(t, Actuation::Dirichlet));
  t.delta1 = 0.4;
  EXPECT_THROW(validate(t, Actuation::Dirichlet), InvalidArgument);
  t = {};
  t.r1 = 2.0;
  EXPECT_NO_THROW(validate(t, Actuation::Dirichlet));
  EXPECT_THROW(validate(t, Actuation::Neumann), InvalidArgument);
  t = {};
  t.r = 0.0;
  EXPECT_THROW(validate(t, Actuation::Dirichlet), InvalidArgument);
}

TEST(Zeta, DegenerateCases) {
  auto p = fixtures::example1();
  p.a = -0.8;
  EXPECT_EQ(zeta_bound(kernels_for(p, fixtures::gains(0.0, 0.8))), 0.0);
  // A - aI = 0.8 with a + c = 0: q vanishes and max |gamma| = 2 cosh(sqrt(0.8)).
  auto p2 = fixtures::scalar_plant(0.0, 0.4, -0.8, 0.1, 20.0);
  const double g = 2.0 * std::cosh(std::sqrt(0.8));
  EXPECT_NEAR(zeta_bound(kernels_for(p2, fixtures::gains(-2.0, 0.8))), g * g, 1e-9);
  EXPECT_NEAR(g * g, 8.15, 0.02);
}

TEST(Zeta, Example1GridRefinement) {
  const double coarse = zeta_bound(kernels_for(fixtures::example1(), fixtures::example1_gains(), 0.04));
  const double fine = zeta_bound(kernels_for(fixtures::example1(), fixtures::example1_gains(), 0.02));
  EXPECT_NEAR(coarse / fine, 1.0, 0.01);
  // (1 + I1(1))^2 (2 cosh sqrt(0.8))^2
  const double closed = std::pow((1.0 + std::cyl_bessel_i(1.0, 1.0)) * 2.0 * std::cosh(std::sqrt(0.8)), 2);
  EXPECT_NEAR(coarse, closed, 1e-9);
}

TEST(Lmi, DirichletHandAssembly) {
  const double zeta = 19.9646;
  TuningParams t;
  t.P = Eigen::MatrixXd::Identity(1, 1);
  const auto L = assemble_dirichlet_lmis(fixtures::example1(), fixtures::example1_gains(), t, zeta);
  Eigen::Matrix3d expect;
  expect << -1.4, 0.4, 1.0, 0.4, -0.6 + 0.09 * zeta, 0.0, 1.0, 0.0, -1.0;
  EXPECT_LE((L.theta1 - expect).norm(), 1e-12);
  Eigen::Matrix2d t2;
  t2 << (-1.6 + 0.6 + 1.0 - pi * pi / 2.0) + pi * pi / 4.0, 0.1, 0.1, -0.6;
  EXPECT_LE((L.theta2 - t2).norm(), 1e-12);
}

TEST(Lmi, DirichletStructure) {
  auto p = fixtures::example1();
  p.A1 = Eigen::MatrixXd::Constant(1, 1, p.a2);
  TuningParams t;
  const auto a = assemble_dirichlet_lmis(p, fixtures::example1_gains(), t, 19.96);
  const auto b = assemble_dirichlet_lmis(p, fixtures::example1_gains(), t, 0.0);
  EXPECT_EQ(a.theta1, b.theta1);

  double prev = 1e300;
  for (double c : {0.5, 1.0, 10.0, 100.0}) {
    const auto L = assemble_dirichlet_lmis(fixtures::example1(), fixtures::gains(-2.0, c), t, 1.0);
    const double lm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(L.theta2).eigenvalues().maxCoeff();
    EXPECT_LT(lm, prev);
    prev = lm;
  }
}

TEST(Lmi, NeumannHandAssembly) {
  const double zeta = 168.23;
  TuningParams t;
  t.delta0 = t.delta1 = 0.5;
  const auto L = assemble_neumann_lmis(fixtures::example2(), fixtures::example2_gains(), t, zeta);
  Eigen::Matrix3d t1;
  t1 << -5.0, 0.4, 1.0, 0.4, -1.0 + 2.0 * 0.09 * zeta, 0.0, 1.0, 0.0, -1.0;
  EXPECT_LE((L.theta1 - t1).norm(), 1e-12);
  Eigen::Matrix3d t2;
  t2 << 0.4, 0.1, 0.0, 0.1, -1.0, -0.1, 0.0, -0.1, -1.0;
  EXPECT_LE((L.theta2 - t2).norm(), 1e-12);
  EXPECT_NEAR(L.scalar, -3.6, 1e-12);
}

TEST(Lmi, NeumannLimits) {
  TuningParams t;
  t.p2 = 0.0;
  t.lambda1 = 0.0;
  const auto N = assemble_neumann_lmis(fixtures::example2(), fixtures::example2_gains(), t, 5.0);
  const auto D = assemble_dirichlet_lmis(fixtures::example2(), fixtures::example2_gains(), t, 5.0);
  EXPECT_LE((N.theta1 - D.theta1).norm(), 1e-14);
  EXPECT_EQ(N.theta2(2, 2), 0.0);
  t = {};
  EXPECT_EQ(assemble_neumann_lmis(fixtures::example2(), fixtures::example2_gains(), t, 5.0).theta2(2, 2), -1.0);
}

TEST(Feasibility, Basics) {
  const std::vector<Eigen::MatrixXd> ok = {Eigen::Vector2d(-1.0, -2.0).asDiagonal().toDenseMatrix()};
  EXPECT_TRUE(check_feasibility(ok).feasible);
  const std::vector<Eigen::MatrixXd> semi = {Eigen::Vector2d(-1.0, 0.0).asDiagonal().toDenseMatrix()};
  EXPECT_FALSE(check_feasibility(semi).feasible);
  Eigen::MatrixXd asym(2, 2);
  asym << -1.0, 0.5, 0.4, -1.0;
  const std::vector<Eigen::MatrixXd> bad = {asym};
  EXPECT_THROW(check_feasibility(bad), InvalidArgument);
}

TEST(Feasibility, AgreesWithLeadingMinors) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N(0.0, 1.0);
  int agree = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 4;
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = N(rng);
    Eigen::MatrixXd M = -G * G.transpose() + N(rng) * Eigen::MatrixXd::Identity(n, n);
    M = 0.5 * (M + M.transpose());
    const std::vector<Eigen::MatrixXd> one = {M};
    EXPECT_EQ(check_feasibility(one, 0.0).feasible, negative_definite_by_minors(M));
    agree += check_feasibility(one, 0.0).feasible;
  }
  EXPECT_GT(agree, 50);
}

TEST(Constants, DegenerateKernels) {
  auto p = fixtures::example1();
  p.a = -0.8;
  const auto ks = kernels_for(p, fixtures::gains(0.0, 0.8));
  const auto d = saturation_constants_dirichlet(ks);
  EXPECT_EQ(d.c1, 0.0);
  EXPECT_EQ(d.c2, 0.0);
  EXPECT_EQ(d.M1, 1.0);
  EXPECT_EQ(d.M2, 2.0);
  const auto n = saturation_constants_neumann(ks);
  EXPECT_EQ(n.c1, 0.0);
  EXPECT_EQ(n.c2, 0.0);
  EXPECT_EQ(n.c3, 0.0);
  EXPECT_EQ(n.xi, 0.0);
}

TEST(Constants, Example1ClosedForms) {
  const auto c = saturation_constants_dirichlet(kernels_for(fixtures::example1(), fixtures::example1_gains()));
  EXPECT_NEAR(c.c1, 2.0 * std::cos(std::sqrt(1.2)), 1e-12);
  // M1 = 1 + 2 (max|gamma| (1 + max|q|))^2 = 1 + 2 zeta
  EXPECT_NEAR(c.M1, 1.0 + 2.0 * c.zeta, 1e-9);
}

TEST(Constants, Example2ReactionHalf) {
  const auto c = saturation_constants_neumann(kernels_for(fixtures::example2(), fixtures::example2_gains()));
  EXPECT_EQ(c.c3, 1.0);
  EXPECT_NEAR(c.c2, std::sqrt(2.0) + c.xi, 1e-14);
}

TEST(MinimizeBeta, DirichletMatchesSdpOracle) {
  // Optimal values of the same problem solved by an interior-point SDP solver.
  for (auto [A1, oracle] : {std::pair{0.28, 0.056329}, std::pair{0.27, 0.0484672}}) {
    const auto p = fixtures::example1(A1);
    const auto ks = kernels_for(p, fixtures::example1_gains());
    const Certificate c = minimize_beta(p, fixtures::example1_gains(), Actuation::Dirichlet, ks, {});
    ASSERT_TRUE(c.feasible()) << A1;
    EXPECT_NEAR(c.beta / oracle, 1.0, 0.01) << A1;
    EXPECT_GE(c.beta, oracle * (1.0 - 1e-3));
    EXPECT_EQ(c.delta, 0.0);
  }
}

TEST(MinimizeBeta, NeumannMatchesSdpOracle) {
  for (auto [A1, oracle] : {std::pair{0.2, 0.203323}, std::pair{0.15, 0.11795}}) {
    const auto p = fixtures::example2(A1);
    TuningParams t;
    t.delta0 = t.delta1 = 0.5;
    const auto ks = kernels_for(p, fixtures::example2_gains());
    const Certificate c = minimize_beta(p, fixtures::example2_gains(), Actuation::Neumann, ks, t);
    ASSERT_TRUE(c.feasible()) << A1;
    EXPECT_NEAR(c.beta / oracle, 1.0, 0.01) << A1;
    EXPECT_GE(c.beta, oracle * (1.0 - 1e-3));
  }
}

TEST(MinimizeBeta, WitnessIsReverifiedAndBounded) {
  const auto p = fixtures::example1(0.28);
  const auto ks = kernels_for(p, fixtures::example1_gains());
  const Certificate c = minimize_beta(p, fixtures::example1_gains(), Actuation::Dirichlet, ks, {});
  ASSERT_TRUE(c.feasible());
  const auto mats = witness_matrices(p, fixtures::example1_gains(), Actuation::Dirichlet, c.witness, c.constants.zeta);
  EXPECT_TRUE(check_feasibility(mats, 1e-9).feasible);
  for (const auto& M : mats) EXPECT_TRUE(negative_definite_by_minors(M));
  const double lmaxP = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c.witness.P).eigenvalues().maxCoeff();
  EXPECT_LE(lmaxP, c.beta * (1.0 + 1e-12));
  EXPECT_LE(c.witness.p1, c.beta * (1.0 + 1e-12));
  EXPECT_GT(c.witness.lambda, 0.0);
  EXPECT_LE(c.witness.lambda, 2.0 * c.witness.p1 * (1.0 + 1e-12));
  const double ub2 = p.u_bar * p.u_bar;
  EXPECT_GE(c.witness.P(0, 0) * ub2 / 2.0 - c.constants.c1 * c.constants.c1, -1e-12);
  EXPECT_GE(c.witness.p1 * ub2 / 2.0 - c.constants.c2 * c.constants.c2, -1e-12);
}

TEST(MinimizeBeta, WitnessScalingPreservesFeasibility) {
  const auto p = fixtures::example2(0.2);
  TuningParams t;
  t.delta0 = t.delta1 = 0.5;
  const auto ks = kernels_for(p, fixtures::example2_gains());
  const Certificate c = minimize_beta(p, fixtures::example2_gains(), Actuation::Neumann, ks, t);
  ASSERT_TRUE(c.feasible());
  for (double s : {1e-3, 0.5, 7.0, 1e4}) {
    TuningParams w = c.witness;
    w.P *= s;
    w.p1 *= s;
    w.p2 *= s;
    w.lambda *= s;
    w.lambda1 *= s;
    double scalar = 0.0;
    const auto mats = witness_matrices(p, fixtures::example2_gains(), Actuation::Neumann, w, c.constants.zeta, &scalar);
    EXPECT_TRUE(check_feasibility(mats, 0.0).feasible) << s;
    EXPECT_LE(scalar, 0.0);
  }
}

TEST(MinimizeBeta, MonotoneInSaturationLevel) {
  double prev = 1e300;
  for (double ub : {20.0, 40.0, 1e4}) {
    auto p = fixtures::example1(0.28);
    p.u_bar = ub;
    const auto ks = kernels_for(p, fixtures::example1_gains());
    const Certificate c = minimize_beta(p, fixtures::example1_gains(), Actuation::Dirichlet, ks, {});
    ASSERT_TRUE(c.feasible());
    EXPECT_LE(c.beta, prev * (1.0 + 2e-3)) << ub;
    prev = c.beta;
  }
}

TEST(MinimizeBeta, InfeasibleCases) {
  // Paper data: the stability LMIs alone admit no witness (SDP margin -0.115).
  {
    const auto p = fixtures::example1();
    const auto ks = kernels_for(p, fixtures::example1_gains());
    EXPECT_EQ(minimize_beta(p, fixtures::example1_gains(), Actuation::Dirichlet, ks, {}).status,
              CertificateStatus::Infeasible);
  }
  {
    auto p = fixtures::example1(0.28);
    p.u_bar = 0.001;
    const auto ks = kernels_for(p, fixtures::example1_gains());
    EXPECT_EQ(minimize_beta(p, fixtures::example1_gains(), Actuation::Dirichlet, ks, {}).status,
              CertificateStatus::Infeasible);
  }
  {
    const auto p = fixtures::example1(0.28);
    const auto g = fixtures::gains(0.0, 0.8);
    const auto ks = kernels_for(p, g);
    EXPECT_EQ(minimize_beta(p, g, Actuation::Dirichlet, ks, {}).status, CertificateStatus::Infeasible);
  }
}

TEST(MinimizeBeta, TinyBudgetIsUndetermined) {
  const auto p = fixtures::example1(0.28);
  const auto ks = kernels_for(p, fixtures::example1_gains());
  SearchConfig cfg;
  cfg.seeds = 1;
  cfg.max_evals_per_seed = 1;
  const Certificate c = minimize_beta(p, fixtures::example1_gains(), Actuation::Dirichlet, ks, {}, cfg);
  EXPECT_EQ(c.status, CertificateStatus::Undetermined);
}

TEST(StabilityWitness, DecayRate) {
  const auto p = fixtures::example1(0.28);
  const auto ks = kernels_for(p, fixtures::example1_gains());
  TuningParams t;
  t.delta0 = 0.3;
  t.delta1 = 0.28;
  const Certificate c = find_stability_witness(p, fixtures::example1_gains(), Actuation::Dirichlet, ks, t);
  ASSERT_TRUE(c.feasible());
  EXPECT_NEAR(c.delta, halanay_decay(0.3, 0.28, p.h), 1e-12);
  EXPECT_GT(c.delta, 0.0);
}

TEST(Membership, HandCertificate) {
  Certificate c;
  c.status = CertificateStatus::Feasible;
  c.beta = 0.0739;
  c.constants.M1 = 18.15;
  c.constants.M2 = 30.31;
  const auto in = admissible_set_membership(c, 0.82, 0.29 * 0.29 / 2.0);
  EXPECT_NEAR(in.value, 0.0739 * (18.15 * 0.6724 + 30.31 * 0.042050), 1e-12);
  EXPECT_NEAR(in.value, 0.996, 1e-3);
  EXPECT_TRUE(in.inside);
  const auto out = admissible_set_membership(c, 5.0, 8.0);
  EXPECT_NEAR(out.value, 51.45, 0.01);
  EXPECT_FALSE(out.inside);
  EXPECT_EQ(admissible_set_membership(c, 0.0, 0.0).value, 0.0);
  const auto coef = c.admissible_coefficients();
  ASSERT_EQ(coef.size(), 2u);
  EXPECT_NEAR(coef[0], 1.341, 1e-3);
  EXPECT_NEAR(coef[1], 2.240, 1e-3);
}

TEST(Membership, Errors) {
  Certificate c;
  c.status = CertificateStatus::Infeasible;
  EXPECT_THROW(admissible_set_membership(c, 1.0, 1.0), InvalidArgument);
  c.status = CertificateStatus::Feasible;
  c.actuation = Actuation::Neumann;
  c.beta = 0.1;
  EXPECT_THROW(admissible_set_membership(c, 1.0, 1.0), InvalidArgument);
  EXPECT_NEAR(admissible_set_membership(c, 0.0, 0.0, 0.5).value, 0.2, 1e-15);
}

TEST(Certificate, StatusNames) {
  for (auto s : {CertificateStatus::Feasible, CertificateStatus::Infeasible, CertificateStatus::Undetermined})
    EXPECT_EQ(certificate_status_from_string(to_string(s)), s);
  EXPECT_THROW(certificate_status_from_string("maybe"), InvalidArgument);
}
