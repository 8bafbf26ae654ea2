#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "corrme/channels.hpp"
#include "corrme/random.hpp"
#include "oracles.hpp"

using namespace corrme;

namespace {

double diff(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

std::vector<Matrix> raw(const KrausChannel& c) {
  std::vector<Matrix> out;
  for (const auto& k : c.kraus()) out.push_back(k.matrix());
  return out;
}

}  // namespace

TEST(ValidateCpt, AmplitudeDampingPasses) {
  const double p = 0.3;
  oracle::M k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1 - p);
  k1 << 0, std::sqrt(p), 0, 0;
  const KrausChannel c({Operator(k0), Operator(k1)});
  const auto r = validate_cpt(c);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.residual, 1e-15);
  EXPECT_LE(diff(amplitude_damping(p).kraus()[0].matrix(), k0), 0.0);
  EXPECT_LE(diff(amplitude_damping(p).kraus()[1].matrix(), k1), 0.0);
}

TEST(ValidateCpt, ScaledIdentityFails) {
  const KrausChannel c({0.5 * ops::identity(2)});
  const auto r = validate_cpt(c);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.residual, 0.75, 1e-15);
}

TEST(ValidateCpt, ReplacerToZeroPasses) {
  const KrausChannel c({Operator(oracle::ket_bra(2, 0, 0)), Operator(oracle::ket_bra(2, 0, 1))});
  EXPECT_TRUE(validate_cpt(c).pass);
}

TEST(ValidateCpt, RejectsMalformedLists) {
  EXPECT_THROW(KrausChannel(std::vector<Operator>{}), std::invalid_argument);
  EXPECT_THROW(KrausChannel({ops::identity(2), ops::identity(3)}), std::invalid_argument);
}

TEST(Apply, IdentityChannel) {
  random::Rng rng(31);
  const auto x = random::general(rng, {3});
  EXPECT_EQ(diff(identity_channel(3).apply(x).matrix(), x.matrix()), 0.0);
}

TEST(Apply, AmplitudeDampingOnCoherence) {
  const auto c = amplitude_damping(0.75);
  const Operator x(oracle::ket_bra(2, 1, 0));
  const auto out = c.apply(x);
  EXPECT_LE(diff(out.matrix(), oracle::kraus_apply(raw(c), x.matrix())), 1e-16);
  EXPECT_LE(diff(out.matrix(), 0.5 * x.matrix()), 1e-15);
}

TEST(Apply, ReplacerGivesTraceTimesEta) {
  random::Rng rng(32);
  const auto eta = random::density(rng, {3});
  const auto c = replacer_channel(eta);
  EXPECT_TRUE(validate_cpt(c).pass);
  const auto x = random::general(rng, {3});
  const auto out = c.apply(x);
  EXPECT_LE(diff(out.matrix(), oracle::kraus_apply(raw(c), x.matrix())), 1e-14);
  EXPECT_LE(diff(out.matrix(), x.trace() * eta.op().matrix()), 1e-13);
}

TEST(Apply, RejectsSideMismatch) {
  EXPECT_THROW(amplitude_damping(0.1).apply(ops::identity(3)), std::invalid_argument);
}

TEST(Apply, PreservesTraceAndPositivity) {
  random::Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = random::channel(rng, 3, 1 + trial % 4);
    const auto x = random::general(rng, {3});
    EXPECT_LE(std::abs(c.apply(x).trace() - x.trace()), 1e-12);
    const auto rho = random::density(rng, {3});
    EXPECT_GE(min_eigenvalue(c.apply(rho.op())), -1e-10);
  }
}

TEST(Power, ZeroIsIdentity) {
  random::Rng rng(34);
  EXPECT_EQ(diff(power(random::channel(rng, 3, 2), 0).matrix(), Matrix::Identity(9, 9)), 0.0);
}

TEST(Power, RotationGroupProperty) {
  const double theta = 0.37;
  const auto c = unitary_channel(expm_hermitian(ops::sigma_z(), theta));
  const auto c2 = unitary_channel(expm_hermitian(ops::sigma_z(), 2 * theta));
  random::Rng rng(35);
  const auto sq = power(c, 2);
  for (int trial = 0; trial < 3; ++trial) {
    const auto x = random::general(rng, {2});
    EXPECT_LE(diff(sq.apply(x).matrix(), c.apply(c.apply(x)).matrix()), 1e-14);
    EXPECT_LE(diff(sq.apply(x).matrix(), c2.apply(x).matrix()), 1e-14);
  }
}

TEST(Power, ReplacerIdempotent) {
  const auto c = replacer_channel(DensityMatrix::maximally_mixed({2}));
  const auto once = c.superoperator();
  for (std::size_t m = 1; m <= 4; ++m) {
    Superoperator composed = once;
    for (std::size_t k = 1; k < m; ++k) composed = compose(once, composed);
    EXPECT_LE(diff(power(c, m).matrix(), composed.matrix()), 1e-15);
    EXPECT_LE(diff(power(c, m).matrix(), once.matrix()), 1e-15);
  }
}

TEST(Power, AdditiveExponents) {
  random::Rng rng(36);
  const auto c = random::channel(rng, 3, 3);
  for (std::size_t a = 0; a <= 3; ++a)
    for (std::size_t b = 0; b <= 3; ++b)
      EXPECT_LE(diff(power(c, a + b).matrix(), (power(c, a) * power(c, b)).matrix()), 1e-11);
}

TEST(LossyBosonic, TwoLevelsIsAmplitudeDamping) {
  for (double kappa : {0.0, 0.25, 0.6, 1.0}) {
    const auto lossy = lossy_bosonic_channel(2, kappa);
    const auto ad = amplitude_damping(1.0 - kappa);
    ASSERT_EQ(lossy.kraus().size(), ad.kraus().size());
    for (std::size_t k = 0; k < 2; ++k)
      EXPECT_LE(diff(lossy.kraus()[k].matrix(), ad.kraus()[k].matrix()), 1e-15);
  }
}

TEST(LossyBosonic, FullTransmissionIsIdentity) {
  random::Rng rng(37);
  const auto c = lossy_bosonic_channel(4, 1.0);
  const auto x = random::general(rng, {4});
  EXPECT_LE(diff(c.apply(x).matrix(), x.matrix()), 1e-15);
}

TEST(LossyBosonic, VacuumIsFixed) {
  for (double kappa : {0.0, 0.3, 0.9}) {
    const auto c = lossy_bosonic_channel(5, kappa);
    const auto vac = DensityMatrix::basis({5}, 0);
    EXPECT_LE(fixed_point_distance(c, vac), 1e-15);
  }
}

TEST(LossyBosonic, CompleteAcrossTruncations) {
  for (std::size_t d : {2, 3, 4, 5})
    for (double kappa : {0.0, 0.25, 0.5, 1.0}) {
      const auto r = validate_cpt(lossy_bosonic_channel(d, kappa));
      EXPECT_TRUE(r.pass) << "d=" << d << " kappa=" << kappa << " residual " << r.residual;
    }
}

TEST(LossyBosonic, MatchesBinomialOracle) {
  // <n-k|K_k|n> = sqrt(C(n,k) kappa^(n-k) (1-kappa)^k), binomials by Pascal.
  const std::size_t d = 5;
  const double kappa = 0.35;
  std::vector<std::vector<double>> binom(d, std::vector<double>(d, 0.0));
  for (std::size_t n = 0; n < d; ++n) {
    binom[n][0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) binom[n][k] = binom[n - 1][k - 1] + (k < n ? binom[n - 1][k] : 0.0);
  }
  const auto c = lossy_bosonic_channel(d, kappa);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t n = k; n < d; ++n) {
      const double expected = std::sqrt(binom[n][k] * std::pow(kappa, double(n - k)) * std::pow(1 - kappa, double(k)));
      EXPECT_NEAR(c.kraus()[k](n - k, n).real(), expected, 1e-14);
    }
  EXPECT_THROW(lossy_bosonic_channel(4, 1.5), std::invalid_argument);
  EXPECT_THROW(lossy_bosonic_channel(1, 0.5), std::invalid_argument);
}

TEST(LossyBosonic, CoherenceDecaysBySqrtKappa) {
  const double kappa = 0.25;
  const auto c = lossy_bosonic_channel(4, kappa);
  Operator x(oracle::ket_bra(4, 1, 0));
  for (int m = 1; m <= 3; ++m) {
    x = c.apply(x);
    EXPECT_NEAR(x(1, 0).real(), std::pow(std::sqrt(kappa), m), 1e-15);
  }
}

TEST(FixedPointDistance, Examples) {
  random::Rng rng(38);
  const auto eta = random::density(rng, {2});
  EXPECT_EQ(fixed_point_distance(identity_channel(2), eta), 0.0);
  EXPECT_LE(fixed_point_distance(amplitude_damping(0.4), DensityMatrix::basis({2}, 0)), 0.0);
  // AD(0.75) on |1><1| -> diag(0.75, 0.25); distance to |1><1| is 0.75.
  const auto excited = DensityMatrix::basis({2}, 1);
  const auto out = amplitude_damping(0.75).apply(excited.op());
  EXPECT_NEAR(fixed_point_distance(amplitude_damping(0.75), excited),
              0.5 * oracle::trace_norm_hermitian(out.matrix() - excited.op().matrix()), 1e-15);
  EXPECT_NEAR(fixed_point_distance(amplitude_damping(0.75), excited), 0.75, 1e-15);
}

TEST(DensityMatrixType, Invariants) {
  EXPECT_THROW(DensityMatrix(ops::sigma_x()), std::invalid_argument);       // trace 0
  EXPECT_THROW(DensityMatrix(ops::identity(2)), std::invalid_argument);     // trace 2
  Matrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix(Operator(neg)), std::invalid_argument);
  Matrix nh(2, 2);
  nh << 0.5, 0.1, 0.0, 0.5;
  EXPECT_THROW(DensityMatrix(Operator(nh)), std::invalid_argument);
  EXPECT_NO_THROW(DensityMatrix::maximally_mixed({2, 3}));
}

TEST(ChannelJson, RoundTripAndKinds) {
  random::Rng rng(39);
  const auto c = random::channel(rng, 3, 2);
  const auto back = channel_from_json(channel_to_json(c));
  const auto x = random::general(rng, {3});
  EXPECT_LE(diff(back.apply(x).matrix(), c.apply(x).matrix()), 1e-15);

  const auto lossy = channel_from_json(Json{{"kind", "lossy"}, {"d", 3}, {"kappa", 0.5}});
  EXPECT_EQ(lossy.side(), 3u);
  const auto ad = channel_from_json(Json{{"kind", "amplitude_damping"}, {"p", 0.75}});
  EXPECT_LE(diff(ad.apply(Operator(oracle::ket_bra(2, 1, 0))).matrix(), 0.5 * oracle::ket_bra(2, 1, 0)), 1e-15);
  const auto rot = channel_from_json(Json{{"kind", "unitary"},
                                          {"hamiltonian", operator_to_json(ops::sigma_z())},
                                          {"angle", std::numbers::pi / 4}});
  EXPECT_LE(std::abs(rot.apply(Operator(oracle::ket_bra(2, 1, 0)))(1, 0) - kI), 1e-15);
  EXPECT_THROW(channel_from_json(Json{{"kind", "teleport"}}), std::invalid_argument);
}
