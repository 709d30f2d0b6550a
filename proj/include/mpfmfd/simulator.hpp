#pragma once

#include <cstdint>

#include "mpfmfd/timeseries.hpp"

namespace mpfmfd {

// Correlated C/G generator. The latent process is
//   s(t) = ar_coeff * s(t-1) + e(t) + burst(t),   e ~ N(0, latent_noise_sd^2)
// where burst(t) = burst_amplitude with probability burst_rate. Then
//   C(t) = s(t) + N(0, obs_noise_sd_c^2)
//   G(t) = gain * s(t - lag_m) + offset + N(0, obs_noise_sd_g^2)
// so C leads G by lag_m samples. The default amplitudes are arbitrary.
struct SimConfig {
  Index length = 20000;
  Index lag_m = 3;
  double ar_coeff = 0.97;
  double latent_noise_sd = 0.15;
  double gain = 1.0;
  double offset = 0.0;
  double obs_noise_sd_c = 0.15;
  double obs_noise_sd_g = 0.2;
  double burst_amplitude = 1.0;
  double burst_rate = 0.002;
  std::uint64_t seed = 1;
};

void validate(const SimConfig& config);

// Bit-reproducible for a fixed config. Random substreams (xoshiro256** jumps
// from the seed): 0 latent innovations, 1 bursts, 2 C noise, 3 G noise.
SeriesPair generate(const SimConfig& config);

}  // namespace mpfmfd
