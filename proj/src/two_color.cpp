#include <cmath>
#include <stdexcept>

#include "clockprobe/birefringence.hpp"
#include "clockprobe/lightshift.hpp"

namespace clockprobe {
namespace {

struct Component {
  double detuning = 0.0;
  bool magic = false;
};

Component pick_component(DetuningWindow w, double theta_deg, const CsD1Constants& atom) {
  const auto roots = find_magic_detunings(theta_deg, w, atom);
  if (!roots.empty()) return {roots.front().detuning_MHz, true};
  return {0.5 * (w.lo_MHz + w.hi_MHz), false};
}

double mixture_phase(double detuning, double p_up, double p_down, const CsD1Constants& atom) {
  return p_up * per_state_phase(GroundState::of(4, 0), detuning, atom, 1.0) +
         p_down * per_state_phase(GroundState::of(3, 0), detuning, atom, 1.0);
}

}  // namespace

double TwoColorPoint::total_phase(double p_up, double p_down, const CsD1Constants& atom) const {
  const double lower = mixture_phase(detuning_lower_MHz, p_up, p_down, atom);
  const double upper = mixture_phase(detuning_upper_MHz, p_up, p_down, atom);
  return (power_ratio * lower + upper) / (power_ratio + 1.0);
}

TwoColorPoint two_color_balance(DetuningWindow window_lower, DetuningWindow window_upper,
                                double theta_deg, const CsD1Constants& atom) {
  const Component lower = pick_component(window_lower, theta_deg, atom);
  const Component upper = pick_component(window_upper, theta_deg, atom);

  TwoColorPoint p;
  p.detuning_lower_MHz = lower.detuning;
  p.detuning_upper_MHz = upper.detuning;
  p.lower_is_magic = lower.magic;
  p.upper_is_magic = upper.magic;
  p.phase_lower_rad = mixture_phase(lower.detuning, 0.5, 0.5, atom);
  p.phase_upper_rad = mixture_phase(upper.detuning, 0.5, 0.5, atom);
  if ((p.phase_lower_rad < 0) == (p.phase_upper_rad < 0) || p.phase_lower_rad == 0.0)
    throw std::domain_error("two-color balance impossible: component phases share a sign");
  p.power_ratio = -p.phase_upper_rad / p.phase_lower_rad;
  return p;
}

}  // namespace clockprobe
