#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "bridgediag/draws.hpp"
#include "bridgediag/rng.hpp"
#include "bridgediag/targets.hpp"

namespace bridgediag {

/// Stationary AR(1) chains whose marginal law is the model's exact Gaussian
/// posterior: x_t = m + rho (x_{t-1} - m) + sqrt(1 - rho^2) L z_t, started
/// from an exact posterior draw.
DrawsMatrix sampler_ar1(const TargetModel& model, double rho, std::size_t chains,
                        std::size_t iters, RngStream& rng);

struct RwmResult {
  DrawsMatrix draws;
  double acceptance_rate;
};

/// Random-walk Metropolis with isotropic N(0, step_scale^2 I) steps. Each
/// chain starts from a standard normal point, runs `iters` warm-up steps
/// (discarded) and then `iters` kept steps.
RwmResult sampler_rwm(const TargetModel& model, double step_scale, std::size_t chains,
                      std::size_t iters, RngStream& rng);

enum class SamplerKind { kExact, kAr1, kRwm };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kExact;
  double rho = 0.0;         // kAr1
  double step_scale = 0.0;  // kRwm; <= 0 picks 2.4 / sqrt(d)
  std::size_t chains = 4;
  std::size_t iters = 1000;
};

/// Draws produced by the configured sampler.
DrawsMatrix run_sampler(const TargetModel& model, const SamplerSpec& spec, RngStream& rng);

const char* sampler_name(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

}  // namespace bridgediag
