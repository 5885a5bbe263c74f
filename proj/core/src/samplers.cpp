#include "bridgediag/samplers.hpp"

#include <cmath>
#include <string>

#include "bridgediag/error.hpp"

namespace bridgediag {

DrawsMatrix sampler_ar1(const TargetModel& model, double rho, std::size_t chains,
                        std::size_t iters, RngStream& rng) {
  if (!(rho >= 0.0 && rho < 1.0)) throw Error("AR(1) correlation must lie in [0, 1)");
  const auto post = model.gaussian_posterior();
  if (!post) throw Error("AR(1) sampler requires Gaussian posterior");
  const CholFactor chol = cholesky_with_jitter(post->cov);
  const auto d = post->mean.size();
  const double innovation = std::sqrt(1.0 - rho * rho);

  std::vector<double> data;
  data.reserve(chains * iters * static_cast<std::size_t>(d));
  Vector state(d);
  Vector z(d);
  for (std::size_t c = 0; c < chains; ++c) {
    for (Eigen::Index k = 0; k < d; ++k) z(k) = rng.normal();
    state = post->mean + chol.lower.triangularView<Eigen::Lower>() * z;
    for (std::size_t t = 0; t < iters; ++t) {
      if (t > 0) {
        for (Eigen::Index k = 0; k < d; ++k) z(k) = rng.normal();
        const Vector step = chol.lower.triangularView<Eigen::Lower>() * z;
        state = post->mean + rho * (state - post->mean) + innovation * step;
      }
      data.insert(data.end(), state.data(), state.data() + d);
    }
  }
  return DrawsMatrix(chains, iters, static_cast<std::size_t>(d), std::move(data));
}

RwmResult sampler_rwm(const TargetModel& model, double step_scale, std::size_t chains,
                      std::size_t iters, RngStream& rng) {
  if (!(step_scale > 0.0)) throw Error("step scale must be positive");
  const std::size_t d = model.dim();
  std::vector<double> data;
  data.reserve(chains * iters * d);
  std::vector<double> current(d);
  std::vector<double> candidate(d);
  std::size_t accepted_total = 0;
  for (std::size_t c = 0; c < chains; ++c) {
    for (double& v : current) v = rng.normal();
    double current_lp = log_unnorm_posterior(model, current);
    std::size_t accepted = 0;
    for (std::size_t step = 0; step < 2 * iters; ++step) {
      for (std::size_t k = 0; k < d; ++k) candidate[k] = current[k] + step_scale * rng.normal();
      const double candidate_lp = log_unnorm_posterior(model, candidate);
      const double log_u = std::log(rng.uniform());
      if (candidate_lp != kNegInf && log_u < candidate_lp - current_lp) {
        current.swap(candidate);
        current_lp = candidate_lp;
        ++accepted;
      }
      if (step >= iters) data.insert(data.end(), current.begin(), current.end());
    }
    if (accepted == 0)
      throw Error("random-walk Metropolis accepted no proposals in chain " + std::to_string(c + 1) +
                  "; try a smaller step scale");
    accepted_total += accepted;
  }
  const double rate =
      static_cast<double>(accepted_total) / static_cast<double>(2 * iters * chains);
  return {DrawsMatrix(chains, iters, d, std::move(data)), rate};
}

DrawsMatrix run_sampler(const TargetModel& model, const SamplerSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case SamplerKind::kExact:
      return exact_posterior_sample(model, rng, spec.chains, spec.iters);
    case SamplerKind::kAr1:
      return sampler_ar1(model, spec.rho, spec.chains, spec.iters, rng);
    case SamplerKind::kRwm: {
      const double step = spec.step_scale > 0.0
                              ? spec.step_scale
                              : 2.4 / std::sqrt(static_cast<double>(model.dim()));
      return sampler_rwm(model, step, spec.chains, spec.iters, rng).draws;
    }
  }
  throw Error("unknown sampler");
}

const char* sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kExact:
      return "exact";
    case SamplerKind::kAr1:
      return "ar1";
    case SamplerKind::kRwm:
      return "rwm";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "exact") return SamplerKind::kExact;
  if (name == "ar1") return SamplerKind::kAr1;
  if (name == "rwm") return SamplerKind::kRwm;
  throw Error("unknown sampler '" + name + "' (expected exact, ar1 or rwm)");
}

}  // namespace bridgediag
