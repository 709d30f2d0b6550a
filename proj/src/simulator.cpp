#include "mpfmfd/simulator.hpp"

#include <cmath>

#include "mpfmfd/error.hpp"
#include "mpfmfd/rng.hpp"

namespace mpfmfd {

void validate(const SimConfig& config) {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidConfig, "simulator: " + what); };
  if (config.lag_m < 0) bad("lag_m must be >= 0");
  if (config.length <= config.lag_m + 10) bad("length must exceed lag_m + 10");
  if (!(std::abs(config.ar_coeff) < 1.0)) bad("|ar_coeff| must be < 1");
  if (!(config.latent_noise_sd >= 0.0)) bad("latent_noise_sd must be >= 0");
  if (!(config.obs_noise_sd_c >= 0.0) || !(config.obs_noise_sd_g >= 0.0)) bad("observation noise sd must be >= 0");
  if (!(config.burst_amplitude >= 0.0)) bad("burst_amplitude must be >= 0");
  if (!(config.burst_rate >= 0.0 && config.burst_rate <= 1.0)) bad("burst_rate must lie in [0, 1]");
  if (!std::isfinite(config.gain) || !std::isfinite(config.offset)) bad("gain and offset must be finite");
}

SeriesPair generate(const SimConfig& config) {
  validate(config);
  Xoshiro256 latent_rng(config.seed, 0);
  Xoshiro256 burst_rng(config.seed, 1);
  Xoshiro256 noise_c_rng(config.seed, 2);
  Xoshiro256 noise_g_rng(config.seed, 3);

  // latent[k] holds s(k - lag_m): the warm-up extension feeds the first lag_m G samples.
  const auto lag = static_cast<std::size_t>(config.lag_m);
  const auto n = static_cast<std::size_t>(config.length);
  std::vector<double> latent(n + lag);
  const double stationary_sd = config.latent_noise_sd / std::sqrt(1.0 - config.ar_coeff * config.ar_coeff);
  double s = stationary_sd * latent_rng.normal();
  for (double& value : latent) {
    double step = config.latent_noise_sd * latent_rng.normal();
    if (burst_rng.uniform() < config.burst_rate) step += config.burst_amplitude;
    s = config.ar_coeff * s + step;
    value = s;
  }

  std::vector<Record> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s_now = latent[i + lag];
    const double s_lagged = latent[i];
    records[i].t = static_cast<Index>(i);
    records[i].c = s_now + config.obs_noise_sd_c * noise_c_rng.normal();
    records[i].g = config.gain * s_lagged + config.offset + config.obs_noise_sd_g * noise_g_rng.normal();
  }
  return SeriesPair("sim-seed" + std::to_string(config.seed), std::move(records));
}

}  // namespace mpfmfd
