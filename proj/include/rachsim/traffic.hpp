#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "rachsim/random.hpp"

namespace rachsim {

enum class DeviceClass : std::uint8_t { urllc = 0, non_urllc = 1 };

inline const char* to_string(DeviceClass c) { return c == DeviceClass::urllc ? "urllc" : "non_urllc"; }

struct TrafficConfig {
  double urllc_horizon_s = 10.0;
  double non_urllc_horizon_s = 30.0;
  double beta_alpha = 3.0;
  double beta_beta = 4.0;

  friend bool operator==(const TrafficConfig&, const TrafficConfig&) = default;
};

/// Beta(alpha, beta) via the ratio of two Gamma draws.
template <typename Engine>
double beta_sample(double alpha, double beta, Engine& eng) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::domain_error("beta_sample: shape parameters must be positive");
  std::gamma_distribution<double> ga(alpha, 1.0);
  std::gamma_distribution<double> gb(beta, 1.0);
  const double x = ga(eng);
  const double y = gb(eng);
  return x / (x + y);
}

/// Arrival time in ms for each device: uRLLC devices follow a Beta burst over
/// their horizon, non-uRLLC devices are uniform over theirs. Draws are keyed
/// by the device key, so one device's arrival does not depend on the others.
inline std::vector<double> generate_arrivals(std::span<const DeviceClass> classes,
                                             std::span<const std::uint64_t> keys, const TrafficConfig& cfg,
                                             const RandomSource& rng) {
  if (classes.size() != keys.size()) throw std::invalid_argument("generate_arrivals: classes/keys size mismatch");
  std::vector<double> out;
  out.reserve(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    auto eng = rng.stream(Stream::arrivals, {keys[i]});
    if (classes[i] == DeviceClass::urllc) {
      out.push_back(1000.0 * cfg.urllc_horizon_s * beta_sample(cfg.beta_alpha, cfg.beta_beta, eng));
    } else {
      out.push_back(1000.0 * cfg.non_urllc_horizon_s * uniform01(eng));
    }
  }
  return out;
}

}  // namespace rachsim
