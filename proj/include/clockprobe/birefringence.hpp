#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clockprobe/atom_model.hpp"
#include "clockprobe/lightshift.hpp"

namespace clockprobe {

// Stokes axes: j1 = I_x - I_z, j2 = 45 degree linear, j3 = circular. The
// x and z components are the birefringence eigenpolarizations, so a phase
// retardance is a rotation about the 1 axis.
struct StokesVector {
  double j0 = 1.0;
  double j1 = 0.0;
  double j2 = 1.0;
  double j3 = 0.0;
};

struct PseudoSpin {
  double s_total = 1.0;  // N
  double s3 = 0.0;       // population difference up - down
};

struct PhaseSpectrum {
  std::vector<double> detunings_MHz;
  std::vector<double> phi_up_rad;    // all atoms in |4,0>, per unit OD
  std::vector<double> phi_down_rad;  // all atoms in |3,0>, per unit OD
};

// Phase of the x component relative to the z component for a sample of
// optical density od with every atom in `state`:
//   phi = od * (Gamma/2) * sum_e (|<e|d_x|g>|^2 - |<e|d_z|g>|^2) / Delta_e.
// Throws ResonanceError close to a line.
double per_state_phase(GroundState state, double detuning_MHz, const CsD1Constants& atom,
                       double od);
double per_state_phase(GroundState state, const ProbeConfig& probe, const CsD1Constants& atom,
                       double od);
// The same for all 16 sublevels, in registry order.
std::array<double, kNumGroundStates> manifold_phases(double detuning_MHz,
                                                     const CsD1Constants& atom, double od);

PhaseSpectrum phase_spectrum(std::span<const double> detunings_MHz, const CsD1Constants& atom);

// Closed-form collective phase for a probe halfway between the F=4 -> F'=3,4
// lines, |3,0> atoms neglected.
double collective_phase_closed_form(const PseudoSpin& spin, double od, const CsD1Constants& atom);

// Benchmark Faraday phase for an angular momentum with F_z/F = S3/S at the
// same OD, expressed through the quoted birefringent/Faraday ratio.
inline constexpr double kBirefringentToFaradayRatio = 0.30;
double faraday_reference_phase(const PseudoSpin& spin, double od, const CsD1Constants& atom);

// Positive phi rotates +j2 toward +j3.
StokesVector apply_birefringence(const StokesVector& in, double phi);
// Balanced polarimeter behind a quarter-wave plate reads the circular component.
double polarimeter_signal(const StokesVector& out);

// Adds Gaussian shot noise of phase-equivalent sigma 1/sqrt(2 flux dt).
std::vector<double> shot_noise_trace(std::span<const double> clean_signal, double photon_flux,
                                     double dt, std::uint64_t seed);

// Detected photons per second through the imaging aperture (pi r_cloud^2).
double photon_flux(const ProbeConfig& probe, const CsD1Constants& atom, const CloudConfig& cloud);

// eta = |phi(S3 = S)| sqrt(2 flux tau_d).
double snr_eta(const ProbeConfig& probe, const CsD1Constants& atom, const CloudConfig& cloud,
               double tau_d_s);

// SNR for resolving the sqrt(N) projection noise near S3 ~ 0.
double projection_noise_snr(const CloudConfig& cloud, const ProbeConfig& probe,
                            const CsD1Constants& atom, double tau_d_s);

}  // namespace clockprobe
