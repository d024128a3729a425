#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "evtrack/features.hpp"

namespace evtrack {

/// Per-feature Gaussian parameters of the two-class naive-Bayes model plus
/// the exponential-moving-average learning factor.
struct ClassifierParams {
  std::vector<double> mu1, sigma1;  // object class
  std::vector<double> mu0, sigma0;  // background class
  double lambda = 0.85;
  double sigma_floor = 1e-6;

  std::size_t feature_count() const { return mu1.size(); }
};

/// Log-likelihood ratio sum H(v); the uniform class prior contributes zero.
inline double score(const ClassifierParams& params, const FeatureVector& v) {
  if (v.size() != params.feature_count())
    throw std::invalid_argument("feature vector length mismatch");
  double h = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d1 = (v[i] - params.mu1[i]) / params.sigma1[i];
    const double d0 = (v[i] - params.mu0[i]) / params.sigma0[i];
    h += std::log(params.sigma0[i] / params.sigma1[i]) - 0.5 * d1 * d1 +
         0.5 * d0 * d0;
  }
  return h;
}

/// Population mean and standard deviation (1/N normalization) of feature i
/// over a sample set, with the deviation floored.
inline std::pair<double, double> batch_estimate(
    const std::vector<FeatureVector>& samples, std::size_t feature,
    double sigma_floor) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  double mean = 0;
  for (const FeatureVector& v : samples) mean += v[feature];
  mean /= double(samples.size());
  double var = 0;
  for (const FeatureVector& v : samples) {
    const double d = v[feature] - mean;
    var += d * d;
  }
  var /= double(samples.size());
  double sigma = std::sqrt(var);
  if (sigma < sigma_floor) sigma = sigma_floor;
  return {mean, sigma};
}

namespace detail {

inline void update_class(std::vector<double>& mu, std::vector<double>& sigma,
                         const std::vector<FeatureVector>& samples,
                         double lambda, double sigma_floor) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto [batch_mu, batch_sigma] = batch_estimate(samples, i, sigma_floor);
    const double mu_old = mu[i];
    mu[i] = lambda * mu_old + (1 - lambda) * batch_mu;
    const double var = lambda * sigma[i] * sigma[i] +
                       (1 - lambda) * batch_sigma * batch_sigma +
                       lambda * (1 - lambda) * (mu_old - batch_mu) * (mu_old - batch_mu);
    sigma[i] = std::max(std::sqrt(var), sigma_floor);
  }
}

}  // namespace detail

/// Moving-average parameter refresh: each class mean blends toward its batch
/// estimate and each deviation follows the mixture recurrence
/// sigma' = sqrt(l*s^2 + (1-l)*sh^2 + l*(1-l)*(mu-muh)^2).
inline void update(ClassifierParams& params,
                   const std::vector<FeatureVector>& positives,
                   const std::vector<FeatureVector>& negatives) {
  if (positives.empty() || negatives.empty())
    throw std::invalid_argument("empty sample set");
  detail::update_class(params.mu1, params.sigma1, positives, params.lambda,
                       params.sigma_floor);
  detail::update_class(params.mu0, params.sigma0, negatives, params.lambda,
                       params.sigma_floor);
}

/// Sets both classes straight to their batch estimates (an update with
/// lambda = 0).
inline ClassifierParams init_params(const std::vector<FeatureVector>& positives,
                                    const std::vector<FeatureVector>& negatives,
                                    double lambda, double sigma_floor = 1e-6) {
  if (positives.empty() || negatives.empty())
    throw std::invalid_argument("empty sample set");
  ClassifierParams params;
  params.lambda = lambda;
  params.sigma_floor = sigma_floor;
  const std::size_t n = positives.front().size();
  params.mu1.resize(n);
  params.sigma1.resize(n);
  params.mu0.resize(n);
  params.sigma0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::tie(params.mu1[i], params.sigma1[i]) =
        batch_estimate(positives, i, sigma_floor);
    std::tie(params.mu0[i], params.sigma0[i]) =
        batch_estimate(negatives, i, sigma_floor);
  }
  return params;
}

/// Reproducibility dump: one line per feature with both Gaussians.
inline std::string params_to_text(const ClassifierParams& p) {
  std::string out = "feature mu1 sigma1 mu0 sigma0\n";
  char buf[160];
  for (std::size_t i = 0; i < p.feature_count(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu %.9g %.9g %.9g %.9g\n", i, p.mu1[i],
                  p.sigma1[i], p.mu0[i], p.sigma0[i]);
    out += buf;
  }
  return out;
}

}  // namespace evtrack
