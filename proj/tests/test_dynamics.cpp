#include <cmath>

#include <gtest/gtest.h>

#include "clockprobe/birefringence.hpp"
#include "clockprobe/dynamics.hpp"
#include "clockprobe/errors.hpp"

using namespace clockprobe;

namespace {

const CsD1Constants kAtom;

ExperimentSpec microwave_only(double chi_kHz, double detuning_kHz, double t_end_s) {
  ExperimentSpec spec;
  spec.probe.reset();
  spec.pumping = false;
  spec.mw.rabi_kHz = chi_kHz;
  spec.mw.detuning_kHz = detuning_kHz;
  spec.grid = default_grid(spec, t_end_s);
  return spec;
}

ExperimentSpec probed(double detuning_MHz, double irradiance, double t_end_s) {
  ExperimentSpec spec;
  spec.probe = ProbeConfig{detuning_MHz, irradiance, 45.0};
  spec.mw.rabi_kHz = 5.0;
  spec.grid = default_grid(spec, t_end_s);
  return spec;
}

}  // namespace

TEST(DensityMatrix, Constructors) {
  const DensityMatrix up = DensityMatrix::pure(GroundState::of(4, 0));
  EXPECT_EQ(up.rho(kClockUp, kClockUp), Complex(1.0));
  EXPECT_DOUBLE_EQ(up.total(), 1.0);
  std::array<double, kNumGroundStates> p{};
  p[0] = 0.5;
  p[1] = 0.5;
  EXPECT_NO_THROW(DensityMatrix::diagonal(p));
  p[1] = 0.6;
  EXPECT_THROW(DensityMatrix::diagonal(p), std::invalid_argument);
  p[1] = 0.5;
  p[0] = 0.7;
  p[2] = -0.2;
  EXPECT_THROW(DensityMatrix::diagonal(p), std::invalid_argument);
}

TEST(TimeGrid, PowerOfTwoStride) {
  const TimeGrid g = TimeGrid::make(2e-3, 8e-6, 3e-9);
  EXPECT_LE(g.dt_s, 3e-9);
  EXPECT_GT(g.dt_s, 1.5e-9);
  EXPECT_EQ(g.output_stride & (g.output_stride - 1), 0);
  EXPECT_NEAR(g.sample_dt(), 8e-6, 1e-18);
  const TimeGrid h = g.halved();
  EXPECT_DOUBLE_EQ(h.sample_dt(), g.sample_dt());
}

TEST(Hamiltonian, HermitianAndMicrowaveElements) {
  const MicrowaveConfig mw{5.0, 1.5, 0.0};
  const Operator h = build_hamiltonian(ProbeConfig{-335.0, 16.0, 45.0}, mw, 0.5, kAtom);
  EXPECT_LE(hermiticity_defect(h), 1e-15);
  const Operator bare = build_hamiltonian(std::nullopt, mw, 0.5, kAtom);
  EXPECT_NEAR(std::abs(bare(kClockUp, kClockDown)), 2.5e-3, 1e-15);
  // F=4 block moves down by the drive detuning.
  EXPECT_NEAR(bare(kClockUp, kClockUp).real(), -1.5e-3, 1e-15);
  EXPECT_NEAR(bare(kClockDown, kClockDown).real(), 0.0, 1e-15);
  for (int m = -3; m <= 3; ++m) {
    EXPECT_NEAR(std::abs(microwave_matrix_element(m)), std::sqrt(16.0 - m * m) / 4.0, 1e-12);
    EXPECT_NEAR(std::abs(bare(index_of(4, m), index_of(3, m))),
                2.5e-3 * std::abs(microwave_matrix_element(m)), 1e-15);
  }
  EXPECT_DOUBLE_EQ(microwave_matrix_element(0), 1.0);
  // No sigma microwave couplings.
  EXPECT_EQ(bare(index_of(4, 1), index_of(3, 0)), Complex(0.0));
}

TEST(Evolve, AllTermsOffIsIdentity) {
  std::array<double, kNumGroundStates> p{};
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = (k + 1.0) / 136.0;
  const DensityMatrix rho = DensityMatrix::diagonal(p);
  const TimeGrid grid{1e-4, 1e-7, 16};
  std::array<double, kNumGroundStates> phases{};
  const SimRecord rec = evolve(rho, Operator::Zero(), {}, 0.0, grid, phases);
  ASSERT_GT(rec.size(), 10u);
  for (std::size_t i = 0; i < rec.size(); ++i)
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(rec.populations[i][k], p[k], 1e-15);
}

TEST(Evolve, ResonantRabiFlopping) {
  const SimRecord rec = simulate(microwave_only(5.0, 0.0, 1e-3));
  double worst = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i)
    worst = std::max(worst, std::abs(rec.s3[i] + std::cos(2.0 * M_PI * 5e3 * rec.times_s[i])));
  EXPECT_LT(worst, 1e-6);
  EXPECT_NEAR(rec.times_s.back(), 1e-3, 1e-12);
}

TEST(Evolve, DetunedTwoLevelAnalytic) {
  const double chi = 5.0, delta = 2.0;
  const SimRecord rec = simulate(microwave_only(chi, delta, 1e-3));
  const double gen = std::hypot(chi, delta) * 1e3;
  double worst = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double s = std::sin(M_PI * gen * rec.times_s[i]);
    const double p_up = chi * chi / (chi * chi + delta * delta) * s * s;
    worst = std::max(worst, std::abs(rec.populations[i][kClockUp] - p_up));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Evolve, TraceConservedWithPumpingAndLoss) {
  ExperimentSpec spec = probed(-335.0, 16.0, 1e-3);
  spec.extra_loss_rate_per_s = 400.0;
  const SimRecord rec = simulate(spec);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    double total = rec.lost[i];
    for (double p : rec.populations[i]) {
      total += p;
      EXPECT_GT(p, -1e-9);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
  // Pumping moves atoms out of reach of the clock-state loss.
  EXPECT_GT(rec.lost.back(), 0.0);
  EXPECT_LT(rec.lost.back(), 1.0 - std::exp(-400.0 * 1e-3));
}

TEST(Evolve, LossWithoutProbeIsExponential) {
  ExperimentSpec spec = microwave_only(5.0, 0.0, 1e-3);
  spec.extra_loss_rate_per_s = 400.0;
  const SimRecord rec = simulate(spec);
  for (std::size_t i = 0; i < rec.size(); ++i)
    EXPECT_NEAR(rec.lost[i], 1.0 - std::exp(-400.0 * rec.times_s[i]), 1e-9);
}

TEST(Hamiltonian, ClockSplittingAtMagicIsDriveDetuning) {
  const auto roots = find_magic_detunings(45.0, upper_window(kAtom), kAtom);
  const MicrowaveConfig mw{5.0, 1.5, 0.0};
  const Operator h = build_hamiltonian(ProbeConfig{roots.front().detuning_MHz, 16.0, 45.0}, mw, 0.5, kAtom);
  EXPECT_NEAR((h(kClockUp, kClockUp) - h(kClockDown, kClockDown)).real(), -1.5e-3, 16.0 * 1e-6);  // root tolerance 1 Hz per unit irradiance
  const Operator zeeman_only = build_hamiltonian(std::nullopt, MicrowaveConfig{0.0, 0.0, 0.0}, 0.5, kAtom);
  EXPECT_EQ(zeeman_only, zeeman_hamiltonian(0.5, kAtom));
}

TEST(Evolve, PumpingLeavesTheClockStates) {
  ExperimentSpec spec = probed(-335.0, 16.0, 1e-3);
  spec.mw.rabi_kHz = 0.0;
  const SimRecord rec = simulate(spec);
  const auto jumps = pumping_jump_operators(*spec.probe, kAtom);
  const double out = scattering_rate(jumps, kClockDown);
  const double p_end = rec.populations.back()[kClockDown];
  EXPECT_LT(p_end, 1.0);
  // Depletion cannot outrun the total scattering rate.
  EXPECT_GT(p_end, std::exp(-out * 1e-3) - 1e-3);
  const double others = 1.0 - rec.populations.back()[kClockDown] - rec.populations.back()[kClockUp];
  EXPECT_GT(others, 0.0);
}

TEST(Evolve, StepHalvingConverges) {
  ExperimentSpec spec = probed(-335.0, 16.0, 5e-4);
  const SimRecord a = simulate(spec);
  spec.grid = spec.grid.halved();
  const SimRecord b = simulate(spec);
  ASSERT_EQ(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.s3[i] - b.s3[i]));
  EXPECT_LT(worst, 1e-6);
}

TEST(Evolve, SignalCalibration) {
  std::array<double, kNumGroundStates> phases{};
  for (std::size_t k = 0; k < phases.size(); ++k) phases[k] = 0.01 * (k + 1.0);
  const MicrowaveConfig mw{5.0, 0.0, 0.0};
  const Operator h = build_hamiltonian(std::nullopt, mw, 0.5, kAtom);
  const SimRecord rec = evolve(DensityMatrix::pure(GroundState::of(3, 0)), h, {}, 0.0,
                               TimeGrid::make(2e-4, 8e-6, 2e-9), phases);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    double expect = 0.0;
    for (std::size_t k = 0; k < phases.size(); ++k) expect += rec.populations[i][k] * phases[k];
    EXPECT_NEAR(rec.signal_rad[i], expect, 1e-12);
  }
  EXPECT_NEAR(rec.signal_rad.front(), phases[kClockDown], 1e-15);
  // simulate uses the per-state phases at the cloud OD.
  ExperimentSpec spec = probed(-335.0, 16.0, 1e-4);
  const SimRecord s = simulate(spec);
  const double phi = per_state_phase(GroundState::of(3, 0), -335.0, kAtom, spec.cloud.od_resonant);
  EXPECT_NEAR(s.signal_rad.front(), phi, 1e-6 * std::abs(phi));
}

TEST(Evolve, CoarseStepRejected) {
  ExperimentSpec spec = probed(-335.0, 16.0, 1e-4);
  spec.grid = TimeGrid{1e-4, 2e-7, 40};
  EXPECT_THROW(simulate(spec), IntegrationError);
}

TEST(Scattering, CalibrationRoundTripAndScaling) {
  for (double d : {-900.0, -584.0, -335.0, -120.0}) {
    const double irr = irradiance_for_scattering_rate(d, 45.0, kAtom, 1250.0);
    const auto jumps = pumping_jump_operators(ProbeConfig{d, irr, 45.0}, kAtom);
    EXPECT_NEAR(reference_scattering_rate(jumps), 1250.0, 1e-6 * 1250.0);
  }
  const auto one = pumping_jump_operators(ProbeConfig{-335.0, 1.0, 45.0}, kAtom);
  const auto four = pumping_jump_operators(ProbeConfig{-335.0, 4.0, 45.0}, kAtom);
  EXPECT_NEAR(reference_scattering_rate(four), 4.0 * reference_scattering_rate(one),
              1e-9 * reference_scattering_rate(four));
  EXPECT_EQ(one.size(), 12u);
  // Far from every line the rate falls as 1/Delta^2.
  const double far1 = reference_scattering_rate(pumping_jump_operators(ProbeConfig{-2e5, 1.0, 45.0}, kAtom));
  const double far2 = reference_scattering_rate(pumping_jump_operators(ProbeConfig{-4e5, 1.0, 45.0}, kAtom));
  EXPECT_NEAR(far1 / far2, 4.0, 0.1);
}

TEST(Scattering, RateIsSumOverJumpOperators) {
  const auto jumps = pumping_jump_operators(ProbeConfig{-335.0, 1.0, 0.0}, kAtom);
  double total = 0.0;
  for (const JumpOperator& j : jumps)
    total += j.rate_per_s * (j.op.adjoint() * j.op)(kClockUp, kClockUp).real();
  EXPECT_GT(total, 0.0);
  EXPECT_NEAR(total, scattering_rate(jumps, kClockUp), 1e-9 * total);
}
