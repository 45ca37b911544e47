#include "urnsa/errors.hpp"
#include "urnsa/oracle.hpp"

#include <gtest/gtest.h>

using namespace urnsa;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ModelSpec figure_wei() {
  return wei_model(vec({0.5, 0.7}), InitialComposition{vec({0.5, 0.5}), vec({1, 1}), vec({1, 1})});
}

}  // namespace

TEST(Enumerate, HorizonZeroIsInitialState) {
  const ModelSpec m = figure_wei();
  const ExactLaw law = enumerate_exact(m, 0);
  ASSERT_EQ(law.outcomes.size(), 1u);
  EXPECT_EQ(law.outcomes[0].probability, 1.0);
  EXPECT_EQ(law.outcomes[0].Y, m.initial().y0);
}

TEST(Enumerate, OneStepWei) {
  const ExactLaw law = enumerate_exact(figure_wei(), 1);
  EXPECT_EQ(law.raw_paths, 4);
  EXPECT_TRUE(law.rational);
  EXPECT_TRUE(law.mass_exact);
  EXPECT_EQ(law.total_mass, 1.0);
  const ExactMoments mom = exact_moments(law);
  EXPECT_NEAR(mom.mean(0), 0.9, 1e-15);
  EXPECT_NEAR(mom.mean(1), 1.1, 1e-15);
  EXPECT_NEAR(mom.mean(2), 1.5, 1e-15);
  EXPECT_NEAR(mom.mean(3), 1.5, 1e-15);
}

TEST(Enumerate, BalanceOnEveryOutcome) {
  for (const ModelSpec& m : {figure_wei(), bhs_model(vec({0.5, 0.6, 0.7}))}) {
    const ExactLaw law = enumerate_exact(m, 5);
    for (const auto& o : law.outcomes) EXPECT_NEAR(o.Y.sum(), m.initial().y0.sum() + 5, 1e-12);
    EXPECT_NEAR(law.total_mass, 1.0, 1e-15);
  }
}

TEST(Enumerate, BhsTwoStepsMergedCountBound) {
  const ExactLaw law = enumerate_exact(bhs_model(vec({0.5, 0.7})), 2);
  EXPECT_LE(law.outcomes.size(), 16u);
}

TEST(Enumerate, ExactRationalStrings) {
  const ExactLaw law = enumerate_exact(figure_wei(), 3);
  for (const auto& o : law.outcomes) {
    ASSERT_TRUE(o.exact_probability);
    EXPECT_NE(o.exact_probability->find('/'), std::string::npos);
  }
}

TEST(Enumerate, LongDoubleBeyondRationalRange) {
  const ExactLaw law = enumerate_exact(bhs_model(vec({0.5, 0.6, 0.7})), 4);
  EXPECT_FALSE(law.rational);
  EXPECT_NEAR(law.total_mass, 1.0, 1e-14);
}

TEST(Enumerate, SizeGuards) {
  EXPECT_THROW(enumerate_exact(figure_wei(), 9), OracleSizeError);
  EXPECT_THROW(enumerate_exact(wei_model(vec({0.5, 0.6, 0.7, 0.8})), 2), OracleSizeError);
  std::vector<ColumnDistribution> cols = {{{1.0, vec({0, 1})}}, {{1.0, vec({1, 0})}}};
  EXPECT_THROW(enumerate_exact(homogeneous_model(cols, 1.0), 2), InputError);
}

TEST(Tree, ConditionalMeanIdentityAndCenteredMartingale) {
  for (const ModelSpec& m : {figure_wei(), bhs_model(vec({0.5, 0.7})), bhs_model(vec({0.5, 0.6, 0.7}))}) {
    const TreeIdentityReport r = check_tree_identities(m, 4);
    EXPECT_GT(r.nodes, 0);
    EXPECT_LE(r.max_conditional_mean_residual, 1e-14);
    EXPECT_LE(r.max_martingale_mean, 1e-14);
  }
}

TEST(Keys, MergeNearbyStates) {
  EXPECT_EQ(state_key(vec({0.1 + 0.2, 1}), vec({1, 1}), vec({0, 0})),
            state_key(vec({0.3, 1}), vec({1, 1}), vec({0, 0})));
}
