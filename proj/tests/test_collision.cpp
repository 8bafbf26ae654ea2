#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "corrme/collision.hpp"
#include "corrme/random.hpp"
#include "oracles.hpp"

using namespace corrme;

namespace {

double diff(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

CollisionConfig sigma_x_config(std::size_t carriers, KrausChannel channel, double g, double dt,
                               std::size_t n) {
  CollisionConfig cfg;
  cfg.carrier_dims.assign(carriers, 2);
  cfg.env_dim = 2;
  cfg.g = g;
  cfg.dt = dt;
  cfg.n_collisions = n;
  cfg.eta = DensityMatrix::basis({2}, 0);
  cfg.channel = std::move(channel);
  cfg.couplings = CouplingSpec::uniform(std::vector<TermList>(carriers, TermList{ops::sigma_x()}),
                                        {ops::sigma_x()});
  return cfg;
}

}  // namespace

TEST(CollisionUnitary, ZeroCouplingIsIdentity) {
  const auto cfg = sigma_x_config(1, identity_channel(2), 0.0, 0.1, 1);
  EXPECT_LE(diff(collision_unitary(cfg, 0).matrix(), Matrix::Identity(4, 4)), 1e-15);
}

TEST(CollisionUnitary, HalfPiSigmaXSigmaX) {
  const auto cfg = sigma_x_config(1, identity_channel(2), std::numbers::pi / 2, 1.0, 1);
  const auto u = collision_unitary(cfg, 0);
  const oracle::M xx = oracle::kron(oracle::pauli_x(), oracle::pauli_x());
  EXPECT_LE(diff(u.matrix(), Complex(0.0, -1.0) * xx), 1e-15);
  EXPECT_LE(diff(u.matrix(), oracle::expm_series(xx, std::numbers::pi / 2)), 1e-13);
}

TEST(CollisionUnitary, UnitaryForRandomTwoTermCouplings) {
  random::Rng rng(41);
  auto cfg = random::compliant_config(rng, {.carriers = 2, .carrier_dim = 3, .env_dim = 3, .terms = 2, .g = 2.0, .dt = 0.3});
  for (std::size_t c = 0; c < 2; ++c) {
    const auto u = collision_unitary(cfg, c);
    EXPECT_LE(diff((u * u.adjoint()).matrix(), Matrix::Identity(9, 9)), 1e-12);
  }
  EXPECT_THROW(collision_unitary(cfg, 2), std::invalid_argument);
}

TEST(Assumption, SigmaXOnGroundStatePasses) {
  const auto cfg = sigma_x_config(2, identity_channel(2), 1.0, 0.1, 1);
  const auto r = check_assumption(cfg, 5);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_abs_mean, 0.0);
}

TEST(Assumption, SigmaZFailsWithUnitMean) {
  auto cfg = sigma_x_config(1, identity_channel(2), 1.0, 0.1, 1);
  cfg.couplings = CouplingSpec::uniform({{ops::sigma_x()}}, {ops::sigma_z()});
  const auto r = check_assumption(cfg, 3);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_abs_mean, 1.0, 1e-15);
}

TEST(Assumption, AmplitudeDampingKeepsZeroMean) {
  const auto cfg = sigma_x_config(3, amplitude_damping(0.6), 1.0, 0.1, 1);
  const auto r = check_assumption(cfg, 6);
  EXPECT_TRUE(r.pass);
  // oracle: direct traces of sx against AD^m(|0><0|)
  Operator state = cfg.eta.op();
  for (int m = 0; m <= 6; ++m) {
    EXPECT_EQ(std::abs((oracle::pauli_x() * state.matrix()).trace()), 0.0);
    state = cfg.channel.apply(state);
  }
  EXPECT_THROW(check_assumption(cfg, 0), std::invalid_argument);
}

TEST(Assumption, CatchesNonzeroMeanAfterRelaxation) {
  // eta = |+><+| has zero sz mean but AD moves it toward |0>, where sz has mean 1.
  auto cfg = sigma_x_config(2, amplitude_damping(0.5), 1.0, 0.1, 1);
  Vector plus(2);
  plus << 1, 1;
  cfg.eta = DensityMatrix::pure(plus, {2});
  cfg.couplings = CouplingSpec::uniform({{ops::sigma_x()}, {ops::sigma_x()}}, {ops::sigma_z()});
  const auto r = check_assumption(cfg, 2);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.worst_power, 0u);
}

TEST(ColumnStep, ZeroCouplingLeavesStateUnchanged) {
  random::Rng rng(42);
  auto cfg = random::compliant_config(rng, {.g = 0.0});
  const auto rho = random::density(rng, cfg.carrier_dims);
  const auto out = evolve_column_step(kron(rho.op(), cfg.eta.op()), cfg);
  EXPECT_LE(diff(out.op().matrix(), rho.op().matrix()), 1e-14);
}

TEST(ColumnStep, SingleCollisionPopulations) {
  const double g = 1.3, dt = 0.4;
  const auto cfg = sigma_x_config(1, identity_channel(2), g, dt, 1);
  const auto rho = DensityMatrix::basis({2}, 0);
  const auto out = evolve_column_step(kron(rho.op(), cfg.eta.op()), cfg);
  // oracle: explicit 4x4 conjugation and index-sum partial trace
  const oracle::M xx = oracle::kron(oracle::pauli_x(), oracle::pauli_x());
  const oracle::M u = oracle::expm_series(xx, g * dt);
  const oracle::M joint = oracle::kron(rho.op().matrix(), cfg.eta.op().matrix());
  const oracle::M expected = oracle::trace_second(u * joint * u.adjoint(), 2, 2);
  EXPECT_LE(diff(out.op().matrix(), expected), 1e-13);
  EXPECT_NEAR(out.op()(0, 0).real(), std::pow(std::cos(g * dt), 2), 1e-14);
  EXPECT_NEAR(out.op()(1, 1).real(), std::pow(std::sin(g * dt), 2), 1e-14);
}

TEST(ColumnStep, RandomConfigsGiveValidStates) {
  random::Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    auto cfg = random::compliant_config(rng, {.carriers = 1 + trial % 3, .env_dim = 2 + trial % 2, .terms = 1 + trial % 2, .g = 3.0, .dt = 0.2});
    const auto rho = random::density(rng, cfg.carrier_dims);
    const auto out = evolve_column_step(kron(rho.op(), cfg.eta.op()), cfg);
    EXPECT_NEAR(out.op().trace().real(), 1.0, 1e-12);
    EXPECT_GE(min_eigenvalue(out.op()), -1e-12);
  }
}

TEST(ColumnStep, RejectsWrongDims) {
  const auto cfg = sigma_x_config(2, identity_channel(2), 1.0, 0.1, 1);
  EXPECT_THROW(evolve_column_step(DensityMatrix::basis({2, 2}, 0).op(), cfg), std::invalid_argument);
}

TEST(Simulate, ZeroCollisionsGivesInitialState) {
  auto cfg = sigma_x_config(1, identity_channel(2), 1.0, 0.1, 0);
  const auto traj = simulate(cfg, DensityMatrix::basis({2}, 1));
  ASSERT_EQ(traj.samples.size(), 1u);
  EXPECT_EQ(traj.samples[0].step, 0u);
  EXPECT_EQ(diff(traj.samples[0].state.matrix(), oracle::ket_bra(2, 1, 1)), 0.0);
}

TEST(Simulate, DephasingPopulationNearMasterEquation) {
  const double gamma = 1.0, t = 0.5;
  const std::size_t n = 100;
  const double dt = t / n;
  const auto cfg = sigma_x_config(1, identity_channel(2), std::sqrt(gamma / dt), dt, n);
  const auto traj = simulate(cfg, DensityMatrix::basis({2}, 0), {{"p0", ops::projector(2, 0)}}, 10);
  const double p0 = traj.back().observables[0];
  EXPECT_NEAR(p0, (1.0 + std::exp(-2.0 * gamma * t)) / 2.0, 1e-2);
  EXPECT_NEAR(p0, 0.683940, 1e-2);
  // exact discrete value: (1 + cos(2 g dt)^n) / 2
  EXPECT_NEAR(p0, (1.0 + std::pow(std::cos(2.0 * cfg.g * dt), n)) / 2.0, 1e-12);
  EXPECT_EQ(traj.samples.size(), 11u);
  EXPECT_DOUBLE_EQ(traj.samples[3].t, 30 * dt);
}

TEST(Simulate, ReplacerKeepsProductStates) {
  random::Rng rng(44);
  auto cfg = sigma_x_config(2, replacer_channel(DensityMatrix::basis({2}, 0)), 2.0, 0.05, 40);
  const auto r0 = random::density(rng, {2});
  const auto r1 = random::density(rng, {2});
  const auto joint = simulate(cfg, kron(r0, r1)).back().state;

  auto single = sigma_x_config(1, cfg.channel, cfg.g, cfg.dt, cfg.n_collisions);
  const auto s0 = simulate(single, r0).back().state;
  const auto s1 = simulate(single, r1).back().state;
  EXPECT_LE(diff(joint.matrix(), kron(s0, s1).matrix()), 1e-10);
}

TEST(Simulate, EarlierCarrierIgnoresLaterCouplings) {
  random::Rng rng(45);
  auto cfg = random::compliant_config(rng, {.carriers = 3, .terms = 2, .g = 4.0, .dt = 0.05});
  cfg.n_collisions = 20;
  const auto rho = random::density(rng, cfg.carrier_dims);
  auto other = cfg;
  // Replace carrier 1 and 2 couplings; carrier 0 must not notice.
  for (std::size_t c = 1; c < 3; ++c)
    for (auto& a : other.couplings.carrier_ops[c]) a = random::hermitian(rng, 2);
  const auto first = partial_trace(simulate(cfg, rho).back().state, {0});
  const auto second = partial_trace(simulate(other, rho).back().state, {0});
  EXPECT_LE(diff(first.matrix(), second.matrix()), 1e-11);
  // ...while carrier 2 does notice a change to carrier 0.
  auto upstream = cfg;
  upstream.couplings.carrier_ops[0][0] = random::hermitian(rng, 2);
  const auto a = partial_trace(simulate(cfg, rho).back().state, {2});
  const auto b = partial_trace(simulate(upstream, rho).back().state, {2});
  EXPECT_GT(diff(a.matrix(), b.matrix()), 1e-6);
}

TEST(Simulate, TraceAndPositivityAlongTrajectory) {
  random::Rng rng(46);
  auto cfg = random::compliant_config(rng, {.carriers = 2, .env_dim = 3, .terms = 2, .g = 5.0, .dt = 0.04});
  cfg.n_collisions = 50;
  const auto traj = simulate(cfg, random::density(rng, cfg.carrier_dims));
  for (const auto& s : traj.samples) {
    EXPECT_NEAR(s.trace, 1.0, 1e-10);
    EXPECT_GE(s.min_eigenvalue, -1e-9);
  }
}

TEST(Row, SingleSiteEqualsColumnStep) {
  random::Rng rng(47);
  auto cfg = random::compliant_config(rng, {.carriers = 2, .terms = 2, .g = 2.0, .dt = 0.3});
  const auto rho = random::density(rng, cfg.carrier_dims);
  const auto row = evolve_row(cfg, rho, 1);
  const auto col = evolve_column_step(kron(rho.op(), cfg.eta.op()), cfg);
  EXPECT_LE(diff(row.op().matrix(), col.op().matrix()), 1e-12);
}

TEST(Row, MatchesColumnPath) {
  random::Rng rng(48);
  for (std::size_t n : {2u, 3u}) {
    auto cfg = random::compliant_config(rng, {.carriers = 2, .terms = 1, .g = 2.0, .dt = 0.3});
    cfg.n_collisions = n;
    const auto rho = random::density(rng, cfg.carrier_dims);
    const auto row = evolve_row(cfg, rho, n);
    const auto col = simulate(cfg, rho).back().state;
    EXPECT_LE(diff(row.op().matrix(), col.matrix()), 1e-11) << "n=" << n;
  }
}

TEST(Row, ZeroCouplingAndSizeGuard) {
  random::Rng rng(49);
  auto cfg = random::compliant_config(rng, {.carriers = 2, .g = 0.0});
  const auto rho = random::density(rng, cfg.carrier_dims);
  EXPECT_LE(diff(evolve_row(cfg, rho, 2).op().matrix(), rho.op().matrix()), 1e-14);
  EXPECT_THROW(evolve_row(cfg, rho, 7), std::invalid_argument);  // 4 * 2^7 = 512
}

TEST(InteractionFrame, ZeroHamiltonianKeepsCouplings) {
  auto cfg = sigma_x_config(1, identity_channel(2), 1.0, 0.01, 5);
  cfg.local_hamiltonians = {HamiltonianSchedule::constant(Operator::zero({2}))};
  const auto spec = interaction_frame_couplings(cfg);
  ASSERT_EQ(spec.indexed_carrier_ops.size(), 5u);
  for (const auto& per : spec.indexed_carrier_ops)
    EXPECT_LE(diff(per[0][0].matrix(), oracle::pauli_x()), 1e-15);
}

TEST(InteractionFrame, RotatedSigmaX) {
  const double omega = 1.7;
  auto cfg = sigma_x_config(1, identity_channel(2), 1.0, 0.01, 6);
  cfg.collision_interval = 0.25;
  cfg.local_hamiltonians = {HamiltonianSchedule::constant(0.5 * omega * ops::sigma_z())};
  const auto spec = interaction_frame_couplings(cfg);
  for (std::size_t k = 0; k < 6; ++k) {
    const double tau = cfg.collision_time(k + 1);
    const oracle::M expected = std::cos(omega * tau) * oracle::pauli_x() - std::sin(omega * tau) * oracle::pauli_y();
    EXPECT_LE(diff(spec.indexed_carrier_ops[k][0][0].matrix(), expected), 1e-14) << k;
    // oracle: conjugation with a series exponential
    const oracle::M v = oracle::expm_series(0.5 * omega * oracle::pauli_z(), tau);
    EXPECT_LE(diff(spec.indexed_carrier_ops[k][0][0].matrix(), v.adjoint() * oracle::pauli_x() * v), 1e-13);
  }
}

TEST(InteractionFrame, HermitianForRandomSchedules) {
  random::Rng rng(50);
  auto cfg = random::compliant_config(rng, {.carriers = 2, .terms = 2});
  cfg.n_collisions = 4;
  HamiltonianSchedule sched{{0.0, 0.015}, {random::hermitian(rng, 2), random::hermitian(rng, 2)}};
  cfg.local_hamiltonians = {sched, std::nullopt};
  const auto spec = interaction_frame_couplings(cfg);
  for (const auto& per : spec.indexed_carrier_ops)
    for (const auto& terms : per)
      for (const auto& a : terms) EXPECT_TRUE(a.is_hermitian(1e-13));
  cfg.local_hamiltonians.clear();
  EXPECT_THROW(interaction_frame_couplings(cfg), std::invalid_argument);
}

TEST(InteractionFrame, LabAndInteractionSimulationsAgree) {
  random::Rng rng(51);
  auto cfg = random::compliant_config(rng, {.carriers = 2, .terms = 2, .g = 3.0, .dt = 0.02});
  cfg.n_collisions = 30;
  cfg.local_hamiltonians = {HamiltonianSchedule::constant(0.8 * ops::sigma_z()),
                            HamiltonianSchedule::constant(-0.3 * ops::sigma_z())};
  const auto rho = random::density(rng, cfg.carrier_dims);
  const auto lab = simulate(cfg, rho);
  const auto frame = simulate(interaction_frame_config(cfg), rho);
  ASSERT_EQ(lab.samples.size(), frame.samples.size());
  for (std::size_t i = 0; i < lab.samples.size(); ++i) {
    const auto mapped = to_interaction_frame(cfg, lab.samples[i].state, lab.samples[i].step);
    EXPECT_LE(diff(mapped.matrix(), frame.samples[i].state.matrix()), 1e-10);
  }
}

TEST(Schedule, PiecewisePropagatorOrdersSegments) {
  random::Rng rng(52);
  const auto h0 = random::hermitian(rng, 2);
  const auto h1 = random::hermitian(rng, 2);
  HamiltonianSchedule s{{0.0, 0.5}, {h0, h1}};
  const auto v = s.propagator(0.9, 0.2);
  const oracle::M expected = oracle::expm_series(h1.matrix(), 0.4) * oracle::expm_series(h0.matrix(), 0.3);
  EXPECT_LE(diff(v.matrix(), expected), 1e-13);
  HamiltonianSchedule bad{{0.1}, {h0}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
