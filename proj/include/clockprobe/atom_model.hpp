#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "clockprobe/half_int.hpp"
#include "clockprobe/operators.hpp"

namespace clockprobe {

struct GroundState {
  HalfInt f;
  HalfInt m;

  static constexpr GroundState of(int f, int m) {
    return {HalfInt::integer(f), HalfInt::integer(m)};
  }
  constexpr bool operator==(const GroundState&) const = default;
  std::string str() const { return "|" + f.str() + "," + m.str() + ">"; }
};

// Registry order: F=3 block (m = -3..3) then F=4 block (m = -4..4).
const std::array<GroundState, kNumGroundStates>& state_registry();
// Throws std::domain_error for states outside the ground manifold.
std::size_t index_of(GroundState s);
inline std::size_t index_of(int f, int m) { return index_of(GroundState::of(f, m)); }

inline const std::size_t kClockDown = 3;  // |3,0>
inline const std::size_t kClockUp = 11;   // |4,0>

// Cs D1 line. Excited splitting and linewidth are locked together at 256:1.
struct CsD1Constants {
  double gamma_MHz = 4.5625;
  double excited_hf_splitting_MHz = 1168.0;
  double ground_hf_splitting_MHz = 9192.631770;
  double i_sat_W_per_m2 = 25.0;  // 2.5 mW/cm^2
  double g_f_upper = 0.25;
  double g_f_lower = -0.25;
  double zeeman_MHz_per_G = 1.39962449;  // mu_B / h
  double wavelength_nm = 894.593;

  // Throws ConfigError when the splitting/linewidth lock or positivity fails.
  void validate() const;
  // Detuning in units of the natural linewidth.
  double in_linewidths(double detuning_MHz) const { return detuning_MHz / gamma_MHz; }
};

struct CloudConfig {
  double atom_number = 3.5e6;
  double cloud_radius_mm = 0.25;
  double od_resonant = 1.8;
  double probe_radius_mm = 1.2;
  double bias_field_G = 0.5;
  // Atoms seen through the imaging aperture; 0 means atom_number.
  double interrogated_atoms = 0.0;
  double detection_efficiency = 1.0;

  double effective_atoms() const {
    return interrogated_atoms > 0.0 ? interrogated_atoms : atom_number;
  }
  // Throws ConfigError on nonpositive fields; returns warnings otherwise.
  std::vector<std::string> validate() const;
};

// Same cloud geometry at a different density: OD and atom numbers scale together.
CloudConfig scale_optical_density(const CloudConfig& cloud, double factor);

// Linear Zeeman Hamiltonian (MHz), diagonal in the registry basis, B along +z.
Operator zeeman_hamiltonian(double bias_field_G, const CsD1Constants& atom);

}  // namespace clockprobe
