#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semimarkov/random.hpp"

namespace semimarkov {

/// Parametric dwell-time families. Enumerator order is the tie-break order
/// used by select_family.
enum class DwellFamily { Exponential, GeneralizedExtremeValue, GeneralizedPareto, InverseGaussian };

inline constexpr DwellFamily kAllFamilies[] = {DwellFamily::Exponential, DwellFamily::GeneralizedExtremeValue,
                                               DwellFamily::GeneralizedPareto, DwellFamily::InverseGaussian};

std::string_view to_string(DwellFamily family);
std::optional<DwellFamily> parse_family(std::string_view tag);
int parameter_count(DwellFamily family);

/// Mean `mu`; support starts at `origin` (0 unless fitted to a truncated tail).
struct ExponentialParams {
  double mu = 1.0;
  double origin = 0.0;
};

/// Shape k (k > 0 heavy upper tail), scale sigma, location mu.
/// f(x) = (1/sigma) t^(k+1) e^-t, t = (1 + k(x - mu)/sigma)^(-1/k).
struct GevParams {
  double k = 0.0;
  double sigma = 1.0;
  double mu = 0.0;
};

/// Location fixed at zero. For k < 0 the support is bounded by -sigma/k.
struct GpdParams {
  double k = 0.0;
  double sigma = 1.0;
};

struct InverseGaussianParams {
  double mu = 1.0;
  double lambda = 1.0;
};

using DwellParams = std::variant<ExponentialParams, GevParams, GpdParams, InverseGaussianParams>;

DwellFamily family_of(const DwellParams& params);

/// Throws InvalidArgument when a scale/mean is non-positive or non-finite.
void validate(const DwellParams& params);

struct DwellFit {
  DwellParams params;
  std::size_t n_obs = 0;
  double log_likelihood = 0.0;
  double bic = 0.0;
  std::vector<std::string> notes;  // skipped candidates, downgrades

  DwellFamily family() const { return family_of(params); }
};

/// Natural-log density; -infinity outside the support.
double log_pdf(const DwellParams& params, double x);
bool in_support(const DwellParams& params, double x);
double cdf(const DwellParams& params, double x);
double quantile(const DwellParams& params, double u);
/// Infinite when the family has no finite mean at these parameters.
double mean(const DwellParams& params);

double log_likelihood(const DwellParams& params, std::span<const double> xs);

/// Gradient of the log-likelihood with respect to the natural parameters
/// (GEV: k, sigma, mu; GPD: k, sigma; IG: mu, lambda; Exponential: mu), by
/// central finite differences.
std::vector<double> log_likelihood_gradient(const DwellParams& params, std::span<const double> xs);

/// Stationarity bound used to certify numerical fits.
double stationarity_tolerance(double log_likelihood);

double bic(double log_likelihood, int n_params, std::size_t n_obs);

/// Shifted exponential fitted to observations above `truncation`.
DwellFit fit_exponential(std::span<const double> xs, double truncation = 0.0);
DwellFit fit_inverse_gaussian(std::span<const double> xs);
DwellFit fit_gev(std::span<const double> xs);
DwellFit fit_gpd(std::span<const double> xs);
DwellFit fit_family(DwellFamily family, std::span<const double> xs);

inline constexpr std::size_t kMinNumericalFitObservations = 8;

/// Fits every candidate, skipping those whose preconditions or convergence
/// fail (recorded in notes), and returns the minimum-BIC fit.
DwellFit select_family(std::span<const double> xs, std::span<const DwellFamily> candidates);

/// One dwell draw in seconds. Draws <= 0 or below `min_dwell_s` are redrawn;
/// after 1000 rejections the minimum is returned and `clamped` set.
double sample_dwell(const DwellParams& params, UniformSource& stream, double min_dwell_s = 0.0,
                    bool* clamped = nullptr);
inline double sample_dwell(const DwellFit& fit, UniformSource& stream, double min_dwell_s = 0.0,
                           bool* clamped = nullptr) {
  return sample_dwell(fit.params, stream, min_dwell_s, clamped);
}

}  // namespace semimarkov
