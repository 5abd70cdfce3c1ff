#include "clockprobe/birefringence.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace clockprobe {
namespace {

constexpr double kPlanck = 6.62607015e-34;
constexpr double kLightSpeed = 299792458.0;

}  // namespace

double per_state_phase(GroundState state, double detuning_MHz, const CsD1Constants& atom,
                       double od) {
  check_off_resonance(detuning_MHz, atom);
  index_of(state);  // rejects states outside the manifold
  const int f = state.f.as_int();
  const int m = state.m.as_int();
  const Polarization x = Polarization::linear(90.0);
  const Polarization z = Polarization::linear(0.0);
  double sum = 0.0;
  for (int fe : {3, 4}) {
    const double delta = transition_detuning_MHz(detuning_MHz, f, fe, atom);
    for (int me = m - 1; me <= m + 1; ++me) {
      if (std::abs(me) > fe) continue;
      sum += (std::norm(absorption_amplitude(fe, me, f, m, x)) -
              std::norm(absorption_amplitude(fe, me, f, m, z))) /
             delta;
    }
  }
  return od * 0.5 * atom.gamma_MHz * sum;
}

double per_state_phase(GroundState state, const ProbeConfig& probe, const CsD1Constants& atom,
                       double od) {
  return per_state_phase(state, probe.detuning_MHz, atom, od);
}

std::array<double, kNumGroundStates> manifold_phases(double detuning_MHz,
                                                     const CsD1Constants& atom, double od) {
  std::array<double, kNumGroundStates> out{};
  const auto& reg = state_registry();
  for (std::size_t k = 0; k < reg.size(); ++k)
    out[k] = per_state_phase(reg[k], detuning_MHz, atom, od);
  return out;
}

PhaseSpectrum phase_spectrum(std::span<const double> detunings_MHz, const CsD1Constants& atom) {
  PhaseSpectrum s;
  for (double d : detunings_MHz) {
    s.detunings_MHz.push_back(d);
    s.phi_up_rad.push_back(per_state_phase(GroundState::of(4, 0), d, atom, 1.0));
    s.phi_down_rad.push_back(per_state_phase(GroundState::of(3, 0), d, atom, 1.0));
  }
  return s;
}

double collective_phase_closed_form(const PseudoSpin& spin, double od, const CsD1Constants& atom) {
  if (!(spin.s_total > 0) || std::abs(spin.s3) > spin.s_total)
    throw std::domain_error("pseudo-spin needs |S3| <= S, S > 0");
  const double delta_over_gamma = -0.5 * atom.excited_hf_splitting_MHz / atom.gamma_MHz;
  return 5.0 / 96.0 * od / delta_over_gamma * (spin.s3 + spin.s_total) / spin.s_total;
}

double faraday_reference_phase(const PseudoSpin& spin, double od, const CsD1Constants& atom) {
  return collective_phase_closed_form(spin, od, atom) / kBirefringentToFaradayRatio;
}

StokesVector apply_birefringence(const StokesVector& in, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {in.j0, in.j1, in.j2 * c - in.j3 * s, in.j2 * s + in.j3 * c};
}

double polarimeter_signal(const StokesVector& out) { return out.j3; }

std::vector<double> shot_noise_trace(std::span<const double> clean_signal, double photon_flux,
                                     double dt, std::uint64_t seed) {
  if (!(photon_flux > 0) || !(dt > 0))
    throw std::invalid_argument("photon flux and dt must be positive");
  const double sigma = 1.0 / std::sqrt(2.0 * photon_flux * dt);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(clean_signal.begin(), clean_signal.end());
  for (double& v : out) v += sigma * normal(rng);
  return out;
}

double photon_flux(const ProbeConfig& probe, const CsD1Constants& atom, const CloudConfig& cloud) {
  const double irradiance = probe.irradiance_rel * atom.i_sat_W_per_m2;
  const double radius_m = cloud.cloud_radius_mm * 1e-3;
  const double area = std::numbers::pi * radius_m * radius_m;
  const double photon_energy = kPlanck * kLightSpeed / (atom.wavelength_nm * 1e-9);
  return cloud.detection_efficiency * irradiance * area / photon_energy;
}

double snr_eta(const ProbeConfig& probe, const CsD1Constants& atom, const CloudConfig& cloud,
               double tau_d_s) {
  const double phi = per_state_phase(GroundState::of(4, 0), probe, atom, cloud.od_resonant);
  return std::abs(phi) * std::sqrt(2.0 * photon_flux(probe, atom, cloud) * tau_d_s);
}

double projection_noise_snr(const CloudConfig& cloud, const ProbeConfig& probe,
                            const CsD1Constants& atom, double tau_d_s) {
  const double n = cloud.effective_atoms();
  return snr_eta(probe, atom, cloud, tau_d_s) * std::sqrt(n) / n * 0.5;
}

}  // namespace clockprobe
