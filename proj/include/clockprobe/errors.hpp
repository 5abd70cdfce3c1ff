#pragma once

#include <stdexcept>
#include <string>

namespace clockprobe {

// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Probe too close to an optical resonance for the dispersive model.
class ResonanceError : public std::domain_error {
public:
  ResonanceError(int ground_f, int excited_f, double distance_MHz);

  int ground_f() const noexcept { return ground_f_; }
  int excited_f() const noexcept { return excited_f_; }
  double distance_MHz() const noexcept { return distance_MHz_; }

private:
  int ground_f_;
  int excited_f_;
  double distance_MHz_;
};

// A least-squares fit did not find a usable oscillation.
class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Step size too coarse or trace/positivity drift during integration.
class IntegrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace clockprobe
