#include "clockprobe/atom_model.hpp"

#include <cmath>
#include <stdexcept>

#include "clockprobe/errors.hpp"

namespace clockprobe {

const std::array<GroundState, kNumGroundStates>& state_registry() {
  static const std::array<GroundState, kNumGroundStates> registry = [] {
    std::array<GroundState, kNumGroundStates> r{};
    std::size_t k = 0;
    for (int f : {3, 4})
      for (int m = -f; m <= f; ++m) r[k++] = GroundState::of(f, m);
    return r;
  }();
  return registry;
}

std::size_t index_of(GroundState s) {
  if (!s.f.is_integer() || !s.m.is_integer())
    throw std::domain_error("Cs ground states have integer F and m: " + s.str());
  const int f = s.f.as_int();
  const int m = s.m.as_int();
  if ((f != 3 && f != 4) || std::abs(m) > f)
    throw std::domain_error("not a Cs ground sublevel: " + s.str());
  return f == 3 ? static_cast<std::size_t>(m + 3) : static_cast<std::size_t>(7 + m + 4);
}

void CsD1Constants::validate() const {
  if (!(gamma_MHz > 0) || !(excited_hf_splitting_MHz > 0) || !(ground_hf_splitting_MHz > 0) ||
      !(i_sat_W_per_m2 > 0) || !(zeeman_MHz_per_G > 0) || !(wavelength_nm > 0))
    throw ConfigError("atom constants must be positive");
  if (std::abs(excited_hf_splitting_MHz / gamma_MHz - 256.0) > 1e-9)
    throw ConfigError("excited_hf_splitting_MHz / gamma_MHz must equal 256");
}

std::vector<std::string> CloudConfig::validate() const {
  if (!(atom_number > 0) || !(cloud_radius_mm > 0) || !(od_resonant > 0) ||
      !(probe_radius_mm > 0) || !(bias_field_G > 0))
    throw ConfigError("cloud parameters must be strictly positive");
  if (interrogated_atoms < 0) throw ConfigError("interrogated_atoms must be >= 0");
  if (!(detection_efficiency > 0) || detection_efficiency > 1)
    throw ConfigError("detection_efficiency must lie in (0, 1]");
  std::vector<std::string> warnings;
  if (probe_radius_mm <= cloud_radius_mm)
    warnings.emplace_back(
        "probe radius does not exceed cloud radius; light shift is not homogeneous");
  return warnings;
}

CloudConfig scale_optical_density(const CloudConfig& cloud, double factor) {
  CloudConfig c = cloud;
  c.od_resonant *= factor;
  c.atom_number *= factor;
  c.interrogated_atoms *= factor;
  return c;
}

Operator zeeman_hamiltonian(double bias_field_G, const CsD1Constants& atom) {
  if (bias_field_G < 0) throw std::domain_error("bias field must be >= 0");
  Operator h = Operator::Zero();
  const auto& reg = state_registry();
  for (std::size_t k = 0; k < reg.size(); ++k) {
    const double gf = reg[k].f.as_int() == 4 ? atom.g_f_upper : atom.g_f_lower;
    h(k, k) = gf * reg[k].m.value() * atom.zeeman_MHz_per_G * bias_field_G;
  }
  return h;
}

}  // namespace clockprobe
