#include "urnsa/errors.hpp"
#include "urnsa/models.hpp"
#include "urnsa/spectral.hpp"

#include <gtest/gtest.h>

using namespace urnsa;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST(Wei, TwoArmMatrixAndLimit) {
  const ModelSpec m = wei_model(vec({0.5, 0.7}));
  Matrix H(2, 2);
  H << 0.5, 0.3, 0.5, 0.7;
  EXPECT_LE((m.limit_H() - H).norm(), 1e-15);
  const Vector v = *m.closed_form_v_star();
  EXPECT_NEAR(v(0), 0.375, 1e-15);
  EXPECT_NEAR(v(1), 0.625, 1e-15);
  EXPECT_LE((H * v - v).norm(), 1e-14);
}

TEST(Wei, IdenticalArmsGiveUniformLimit) {
  const Vector v = wei_v_star(vec({0.6, 0.6, 0.6, 0.6}));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(v(i), 0.25, 1e-15);
}

TEST(Wei, ThreeArmsOrderedByEfficiency) {
  const Vector v = wei_v_star(vec({0.5, 0.6, 0.7}));
  EXPECT_NEAR(v(0), 12.0 / 47.0, 1e-15);
  EXPECT_NEAR(v(1), 15.0 / 47.0, 1e-15);
  EXPECT_NEAR(v(2), 20.0 / 47.0, 1e-15);
  EXPECT_LT(v(0), v(1));
  EXPECT_LT(v(1), v(2));
}

TEST(Bhs, CoincidesWithWeiAtTwoArms) {
  for (const Vector& p : {vec({0.5, 0.7}), vec({0.2, 0.9}), vec({0.65, 0.3})}) {
    EXPECT_LE((bhs_limit_matrix(p) - wei_matrix(p)).norm(), 1e-15);
  }
  const Vector v = bhs_v_star(vec({0.5, 0.7}));
  EXPECT_NEAR(v(0), 0.375, 1e-15);
  EXPECT_NEAR(v(1), 0.625, 1e-15);
}

TEST(Bhs, MoreEthicalThanWei) {
  const Vector p = vec({0.5, 0.6, 0.7});
  const Vector b = bhs_v_star(p);
  const Vector w = wei_v_star(p);
  EXPECT_GT(b(2) / b(0), w(2) / w(0));
  EXPECT_GT(w(2) / w(0), 1.0);
  EXPECT_LE((bhs_limit_matrix(p) * b - b).norm(), 1e-14);
}

TEST(Homogeneous, IdentityAdditionIsReducible) {
  std::vector<ColumnDistribution> cols = {{{1.0, vec({1, 0})}}, {{1.0, vec({0, 1})}}};
  const ModelSpec m = homogeneous_model(cols, 1.0);
  EXPECT_LE((m.limit_H() - Matrix::Identity(2, 2)).norm(), 0.0);
  const AssumptionReport r = check_assumptions(m);
  EXPECT_EQ(r.status("A3"), AssumptionStatus::fails);
}

TEST(Homogeneous, BalanceIsNormalized) {
  std::vector<ColumnDistribution> cols = {{{0.5, vec({2, 0})}, {0.5, vec({0, 2})}},
                                          {{1.0, vec({1, 1})}}};
  const ModelSpec m = homogeneous_model(cols, 2.0);
  const Vector sums = m.limit_H().colwise().sum();
  EXPECT_NEAR(sums(0), 1.0, 1e-15);
  EXPECT_NEAR(sums(1), 1.0, 1e-15);
}

TEST(Homogeneous, TwoPointLawReproducesWei) {
  const double p1 = 0.5, p2 = 0.7;
  std::vector<ColumnDistribution> cols = {{{p1, vec({1, 0})}, {1 - p1, vec({0, 1})}},
                                          {{p2, vec({0, 1})}, {1 - p2, vec({1, 0})}}};
  const ModelSpec m = homogeneous_model(cols, 1.0);
  EXPECT_LE((m.limit_H() - wei_matrix(vec({p1, p2}))).norm(), 1e-15);
}

TEST(Homogeneous, RejectsBadLaws) {
  EXPECT_THROW(homogeneous_model({{{0.5, vec({1, 0})}}, {{1.0, vec({0, 1})}}}, 1.0), InputError);
  EXPECT_THROW(homogeneous_model({{{1.0, vec({-1, 2})}}, {{1.0, vec({0, 1})}}}, 1.0), InputError);
}

TEST(Phi, EquilibriumGivesLimitMatrix) {
  const Vector p = vec({0.5, 0.6, 0.7});
  const Vector nu = bhs_v_star(p);
  EXPECT_LE((phi(p.cwiseProduct(nu), nu, p) - bhs_limit_matrix(p)).norm(), 1e-15);
}

TEST(Phi, TwoArmOffDiagonalsIgnoreState) {
  const Vector p = vec({0.5, 0.7});
  const Matrix A = phi(vec({0.3, 2.0}), vec({1.7, 4.0}), p);
  EXPECT_DOUBLE_EQ(A(0, 1), 1 - p(1));
  EXPECT_DOUBLE_EQ(A(1, 0), 1 - p(0));
}

TEST(Phi, UnitRatiosGiveWei) {
  const Vector p = vec({0.5, 0.6, 0.7, 0.8});
  EXPECT_LE((phi(Vector::Ones(4), Vector::Ones(4), p) - wei_matrix(p)).norm(), 1e-15);
}

TEST(Assumptions, WeiHoldsEverywhere) {
  const AssumptionReport r = check_assumptions(wei_model(vec({0.5, 0.7})));
  for (const char* id : {"A1(i)", "A1(ii)", "A1(iii)", "A2", "A3", "A4", "A5"}) {
    EXPECT_TRUE(r.holds(id)) << id;
  }
}

TEST(Assumptions, BhsFailsA5BeyondTwoArms) {
  const AssumptionReport r = check_assumptions(bhs_model(vec({0.5, 0.6, 0.7})));
  for (const char* id : {"A1(i)", "A2", "A3", "A4"}) EXPECT_TRUE(r.holds(id)) << id;
  EXPECT_EQ(r.status("A5"), AssumptionStatus::fails);
}

TEST(Assumptions, BhsTwoArmsHasConstantGenerator) {
  // Φ does not depend on (s, ν) at d = 2, so H_n = H on every path.
  const AssumptionReport r = check_assumptions(bhs_model(vec({0.5, 0.7})));
  EXPECT_TRUE(r.holds("A5"));
}

TEST(Removal, LatticeChecksTenability) {
  std::vector<ColumnDistribution> cols = {{{1.0, vec({-1, 2})}}, {{1.0, vec({2, -1})}}};
  InitialComposition init{vec({3, 3}), vec({1, 1}), vec({0, 0})};
  const ModelSpec m = removal_model(cols, 1.0, vec({1, 1}), init);
  const AssumptionReport r = check_assumptions(m);
  EXPECT_TRUE(r.holds("A'1"));
  // Removing a ball of the other colour is not tenable.
  std::vector<ColumnDistribution> bad = {{{1.0, vec({2, -1})}}, {{1.0, vec({-1, 2})}}};
  EXPECT_FALSE(check_assumptions(removal_model(bad, 1.0, vec({1, 1}), init)).holds("A'1"));
}

TEST(Kinds, NamesRoundTrip) {
  for (ModelKind k : {ModelKind::wei, ModelKind::bhs, ModelKind::homogeneous, ModelKind::removal}) {
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_model_kind("polya"), InputError);
}
