#include "semimarkov/dwell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "semimarkov/error.hpp"
#include "semimarkov/optimize.hpp"

namespace semimarkov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kShapeZero = 1e-12;  // |k| below this uses the k -> 0 limit

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// log(1 + k*y)/k with the k -> 0 limit.
double log1p_over_k(double k, double y) {
  if (std::abs(k) < kShapeZero) return y;
  return std::log1p(k * y) / k;
}

void require_positive_durations(std::span<const double> xs) {
  for (double x : xs) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::NonPositiveDuration, "dwell observations must be positive and finite");
    }
  }
}

DwellFit make_fit(DwellParams params, std::span<const double> xs) {
  DwellFit fit;
  fit.params = params;
  fit.n_obs = xs.size();
  fit.log_likelihood = log_likelihood(params, xs);
  fit.bic = bic(fit.log_likelihood, parameter_count(family_of(params)), xs.size());
  return fit;
}

// Natural-parameter vector for the numerically fitted families.
std::vector<double> natural(const DwellParams& p) {
  return std::visit(Overloaded{
                        [](const ExponentialParams& e) { return std::vector<double>{e.mu}; },
                        [](const GevParams& g) { return std::vector<double>{g.k, g.sigma, g.mu}; },
                        [](const GpdParams& g) { return std::vector<double>{g.k, g.sigma}; },
                        [](const InverseGaussianParams& g) { return std::vector<double>{g.mu, g.lambda}; },
                    },
                    p);
}

DwellParams from_natural(DwellFamily family, std::span<const double> v, double origin = 0.0) {
  switch (family) {
    case DwellFamily::Exponential: return ExponentialParams{v[0], origin};
    case DwellFamily::GeneralizedExtremeValue: return GevParams{v[0], v[1], v[2]};
    case DwellFamily::GeneralizedPareto: return GpdParams{v[0], v[1]};
    case DwellFamily::InverseGaussian: return InverseGaussianParams{v[0], v[1]};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown family");
}

bool params_valid(const DwellParams& p) {
  return std::visit(Overloaded{
                        [](const ExponentialParams& e) { return e.mu > 0 && std::isfinite(e.mu) && std::isfinite(e.origin); },
                        [](const GevParams& g) {
                          return g.sigma > 0 && std::isfinite(g.sigma) && std::isfinite(g.k) && std::isfinite(g.mu);
                        },
                        [](const GpdParams& g) { return g.sigma > 0 && std::isfinite(g.sigma) && std::isfinite(g.k); },
                        [](const InverseGaussianParams& g) {
                          return g.mu > 0 && g.lambda > 0 && std::isfinite(g.mu) && std::isfinite(g.lambda);
                        },
                    },
                    p);
}

// Sample L-moments l1, l2, l3 from sorted data.
struct LMoments {
  double l1, l2, l3;
};

LMoments sample_lmoments(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double b0 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = static_cast<double>(i);
    b0 += xs[i];
    b1 += xs[i] * r / (n - 1);
    b2 += xs[i] * r * (r - 1) / ((n - 1) * (n - 2));
  }
  b0 /= n;
  b1 /= n;
  b2 /= n;
  return {b0, 2 * b1 - b0, 6 * b2 - 6 * b1 + b0};
}

// L-moment estimator (Hosking's rational approximation); returns our k = -k_H.
GevParams gev_initial(std::span<const double> xs) {
  const auto lm = sample_lmoments({xs.begin(), xs.end()});
  const double tau3 = lm.l2 > 0 ? lm.l3 / lm.l2 : 0.0;
  const double c = 2.0 / (3.0 + tau3) - std::numbers::ln2 / std::log(3.0);
  double kh = 7.8590 * c + 2.9554 * c * c;
  kh = std::clamp(kh, -0.9, 5.0);
  GevParams g;
  if (std::abs(kh) < 1e-6) {
    g.sigma = lm.l2 / std::numbers::ln2;
    g.mu = lm.l1 - std::numbers::egamma * g.sigma;
    g.k = 0.0;
  } else {
    const double gam = std::tgamma(1.0 + kh);
    g.sigma = lm.l2 * kh / ((1.0 - std::pow(2.0, -kh)) * gam);
    g.mu = lm.l1 - g.sigma * (1.0 - gam) / kh;
    g.k = -kh;
  }
  if (!(g.sigma > 0) || !std::isfinite(g.sigma)) g.sigma = std::max(lm.l2, 1e-3);
  return g;
}

// Method-of-moments start for the zero-location GPD.
GpdParams gpd_initial(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= (n - 1);
  double k = v > 0 ? 0.5 * (1.0 - m * m / v) : 0.0;
  k = std::clamp(k, -0.9, 0.45);
  return {k, m * (1.0 - k)};
}

// Pushes a start point inside the support of every observation.
void make_feasible(GevParams& g, std::span<const double> xs) {
  for (int i = 0; i < 200; ++i) {
    const bool ok = std::all_of(xs.begin(), xs.end(), [&](double x) { return std::isfinite(log_pdf(g, x)); });
    if (ok) return;
    g.sigma *= 1.5;
  }
}

void make_feasible(GpdParams& g, std::span<const double> xs) {
  const double xmax = *std::max_element(xs.begin(), xs.end());
  if (g.k < 0 && g.sigma <= -g.k * xmax) g.sigma = -g.k * xmax * 1.05;
}

struct NumericalModel {
  DwellFamily family;
  // Maps optimiser coordinates (scale parameters on the log axis) to params.
  DwellParams (*decode)(std::span<const double>);
  std::vector<double> (*encode)(const DwellParams&);
};

DwellParams decode_gev(std::span<const double> y) { return GevParams{y[0], std::exp(y[1]), y[2]}; }
std::vector<double> encode_gev(const DwellParams& p) {
  const auto& g = std::get<GevParams>(p);
  return {g.k, std::log(g.sigma), g.mu};
}
DwellParams decode_gpd(std::span<const double> y) { return GpdParams{y[0], std::exp(y[1])}; }
std::vector<double> encode_gpd(const DwellParams& p) {
  const auto& g = std::get<GpdParams>(p);
  return {g.k, std::log(g.sigma)};
}

// Shapes at or below -1 are rejected.
bool shape_admissible(const DwellParams& p) {
  if (const auto* g = std::get_if<GevParams>(&p)) return g->k > -1.0;
  if (const auto* g = std::get_if<GpdParams>(&p)) return g->k > -1.0;
  return true;
}

bool certified(const DwellParams& p, std::span<const double> xs, double ll) {
  if (!std::isfinite(ll)) return false;
  const auto g = log_likelihood_gradient(p, xs);
  double norm2 = 0;
  for (double v : g) norm2 += v * v;
  return std::isfinite(norm2) && std::sqrt(norm2) <= stationarity_tolerance(ll);
}

DwellFit fit_numerical(const NumericalModel& model, DwellParams start, std::span<const double> xs) {
  const Objective nll = [&](std::span<const double> y) {
    const DwellParams p = model.decode(y);
    if (!params_valid(p) || !shape_admissible(p)) return kInf;
    const double ll = log_likelihood(p, xs);
    return std::isfinite(ll) ? -ll : kInf;
  };

  auto attempt = [&](const DwellParams& init) -> std::optional<DwellFit> {
    auto first = nelder_mead(nll, model.encode(init));
    auto polished = nelder_mead(nll, first.x);
    const DwellParams p = model.decode(polished.x);
    const double ll = -polished.value;
    if (!polished.converged || !certified(p, xs, ll)) return std::nullopt;
    return make_fit(p, xs);
  };

  if (auto fit = attempt(start)) return *fit;

  std::vector<double> y = model.encode(start);
  y[0] += 0.1;
  y[1] += std::log(1.2);
  DwellParams perturbed = model.decode(y);
  if (auto* g = std::get_if<GevParams>(&perturbed)) make_feasible(*g, xs);
  if (auto* g = std::get_if<GpdParams>(&perturbed)) make_feasible(*g, xs);
  if (std::isfinite(log_likelihood(perturbed, xs))) {
    if (auto fit = attempt(perturbed)) return *fit;
  }
  throw Error(ErrorCode::FitDidNotConverge,
              std::string(to_string(model.family)) + " fit failed the stationarity certificate");
}

}  // namespace

std::string_view to_string(DwellFamily family) {
  switch (family) {
    case DwellFamily::Exponential: return "Exponential";
    case DwellFamily::GeneralizedExtremeValue: return "GeneralizedExtremeValue";
    case DwellFamily::GeneralizedPareto: return "GeneralizedPareto";
    case DwellFamily::InverseGaussian: return "InverseGaussian";
  }
  return "Unknown";
}

std::optional<DwellFamily> parse_family(std::string_view tag) {
  for (DwellFamily f : kAllFamilies) {
    if (to_string(f) == tag) return f;
  }
  return std::nullopt;
}

int parameter_count(DwellFamily family) {
  switch (family) {
    case DwellFamily::Exponential: return 1;
    case DwellFamily::GeneralizedExtremeValue: return 3;
    case DwellFamily::GeneralizedPareto: return 2;
    case DwellFamily::InverseGaussian: return 2;
  }
  return 0;
}

DwellFamily family_of(const DwellParams& params) { return static_cast<DwellFamily>(params.index()); }

void validate(const DwellParams& params) {
  if (!params_valid(params)) throw Error(ErrorCode::InvalidArgument, "invalid dwell distribution parameters");
}

bool in_support(const DwellParams& params, double x) {
  if (!std::isfinite(x)) return false;
  return std::visit(Overloaded{
                        [x](const ExponentialParams& e) { return x >= e.origin; },
                        [x](const GevParams& g) { return 1.0 + g.k * (x - g.mu) / g.sigma > 0.0 || std::abs(g.k) < kShapeZero; },
                        [x](const GpdParams& g) { return x >= 0.0 && (g.k >= 0.0 || 1.0 + g.k * x / g.sigma > 0.0); },
                        [x](const InverseGaussianParams&) { return x > 0.0; },
                    },
                    params);
}

double log_pdf(const DwellParams& params, double x) {
  if (!in_support(params, x)) return -kInf;
  return std::visit(Overloaded{
                        [x](const ExponentialParams& e) { return -std::log(e.mu) - (x - e.origin) / e.mu; },
                        [x](const GevParams& g) {
                          const double y = (x - g.mu) / g.sigma;
                          const double log_t = -log1p_over_k(g.k, y);
                          return -std::log(g.sigma) + (g.k + 1.0) * log_t - std::exp(log_t);
                        },
                        [x](const GpdParams& g) {
                          return -std::log(g.sigma) - (1.0 + g.k) * log1p_over_k(g.k, x / g.sigma);
                        },
                        [x](const InverseGaussianParams& g) {
                          const double d = x - g.mu;
                          return 0.5 * (std::log(g.lambda / (2.0 * std::numbers::pi)) - 3.0 * std::log(x)) -
                                 g.lambda * d * d / (2.0 * g.mu * g.mu * x);
                        },
                    },
                    params);
}

double cdf(const DwellParams& params, double x) {
  return std::visit(Overloaded{
                        [x](const ExponentialParams& e) {
                          return x <= e.origin ? 0.0 : -std::expm1(-(x - e.origin) / e.mu);
                        },
                        [x](const GevParams& g) {
                          const double z = 1.0 + g.k * (x - g.mu) / g.sigma;
                          if (std::abs(g.k) >= kShapeZero && z <= 0.0) return g.k > 0 ? 0.0 : 1.0;
                          return std::exp(-std::exp(-log1p_over_k(g.k, (x - g.mu) / g.sigma)));
                        },
                        [x](const GpdParams& g) {
                          if (x <= 0.0) return 0.0;
                          if (g.k < 0.0 && 1.0 + g.k * x / g.sigma <= 0.0) return 1.0;
                          return -std::expm1(-log1p_over_k(g.k, x / g.sigma));
                        },
                        [x](const InverseGaussianParams& g) {
                          if (x <= 0.0) return 0.0;
                          const double r = std::sqrt(g.lambda / x);
                          const double a = normal_cdf(r * (x / g.mu - 1.0));
                          const double tail = normal_cdf(-r * (x / g.mu + 1.0));
                          const double b = tail > 0.0 ? std::exp(2.0 * g.lambda / g.mu + std::log(tail)) : 0.0;
                          return std::min(1.0, a + b);
                        },
                    },
                    params);
}

double quantile(const DwellParams& params, double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must be in (0, 1)");
  return std::visit(Overloaded{
                        [u](const ExponentialParams& e) { return e.origin - e.mu * std::log1p(-u); },
                        [u](const GevParams& g) {
                          const double w = -std::log(u);
                          if (std::abs(g.k) < kShapeZero) return g.mu - g.sigma * std::log(w);
                          return g.mu + g.sigma * std::expm1(-g.k * std::log(w)) / g.k;
                        },
                        [u](const GpdParams& g) {
                          const double w = -std::log1p(-u);  // -log(1-u)
                          if (std::abs(g.k) < kShapeZero) return g.sigma * w;
                          return g.sigma * std::expm1(g.k * w) / g.k;
                        },
                        [u, &params](const InverseGaussianParams& g) {
                          double lo = 0.0;
                          double hi = g.mu;
                          while (cdf(params, hi) < u) {
                            lo = hi;
                            hi *= 2.0;
                          }
                          for (int i = 0; i < 2000 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++i) {
                            const double mid = 0.5 * (lo + hi);
                            (cdf(params, mid) < u ? lo : hi) = mid;
                          }
                          return 0.5 * (lo + hi);
                        },
                    },
                    params);
}

double mean(const DwellParams& params) {
  return std::visit(Overloaded{
                        [](const ExponentialParams& e) { return e.origin + e.mu; },
                        [](const GevParams& g) {
                          if (g.k >= 1.0) return kInf;
                          if (std::abs(g.k) < kShapeZero) return g.mu + g.sigma * std::numbers::egamma;
                          return g.mu + g.sigma * (std::tgamma(1.0 - g.k) - 1.0) / g.k;
                        },
                        [](const GpdParams& g) { return g.k >= 1.0 ? kInf : g.sigma / (1.0 - g.k); },
                        [](const InverseGaussianParams& g) { return g.mu; },
                    },
                    params);
}

double log_likelihood(const DwellParams& params, std::span<const double> xs) {
  double ll = 0.0;
  for (double x : xs) {
    const double lp = log_pdf(params, x);
    if (!std::isfinite(lp)) return -kInf;
    ll += lp;
  }
  return ll;
}

std::vector<double> log_likelihood_gradient(const DwellParams& params, std::span<const double> xs) {
  const DwellFamily family = family_of(params);
  const double origin = family == DwellFamily::Exponential ? std::get<ExponentialParams>(params).origin : 0.0;
  const Objective ll = [&](std::span<const double> v) {
    const DwellParams p = from_natural(family, v, origin);
    if (!params_valid(p)) return -kInf;
    return log_likelihood(p, xs);
  };
  const auto x = natural(params);
  return central_gradient(ll, x);
}

double stationarity_tolerance(double log_likelihood) { return 1e-4 * std::max(1.0, std::abs(log_likelihood)); }

double bic(double log_likelihood, int n_params, std::size_t n_obs) {
  if (n_obs < 1) throw Error(ErrorCode::InvalidArgument, "BIC needs at least one observation");
  return static_cast<double>(n_params) * std::log(static_cast<double>(n_obs)) - 2.0 * log_likelihood;
}

DwellFit fit_exponential(std::span<const double> xs, double truncation) {
  if (xs.empty()) throw Error(ErrorCode::EmptyInput, "no dwell observations");
  require_positive_durations(xs);
  if (!(truncation >= 0.0) || !std::isfinite(truncation)) {
    throw Error(ErrorCode::InvalidArgument, "truncation point must be non-negative");
  }
  std::vector<double> tail;
  for (double x : xs) {
    if (x > truncation) tail.push_back(x);
  }
  if (tail.empty()) throw Error(ErrorCode::EmptyInput, "no observations above the truncation point");
  double sum = 0.0;
  for (double x : tail) sum += x - truncation;
  const double mu = sum / static_cast<double>(tail.size());
  return make_fit(ExponentialParams{mu, truncation}, tail);
}

DwellFit fit_inverse_gaussian(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyInput, "no dwell observations");
  require_positive_durations(xs);
  const double n = static_cast<double>(xs.size());
  const double mu = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double s = 0.0;
  double inv_sum = 0.0;
  for (double x : xs) {
    s += 1.0 / x - 1.0 / mu;
    inv_sum += 1.0 / x;
  }
  if (xs.size() < 2 || !(s > 1e-12 * inv_sum)) {
    throw Error(ErrorCode::DegenerateData, "inverse Gaussian shape is undefined for zero-variance data");
  }
  return make_fit(InverseGaussianParams{mu, n / s}, xs);
}

DwellFit fit_gev(std::span<const double> xs) {
  if (xs.size() < kMinNumericalFitObservations) {
    throw Error(ErrorCode::TooFewObservations, "GEV fit needs at least 8 observations");
  }
  for (double x : xs) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite observation");
  }
  GevParams start = gev_initial(xs);
  make_feasible(start, xs);
  return fit_numerical({DwellFamily::GeneralizedExtremeValue, decode_gev, encode_gev}, start, xs);
}

DwellFit fit_gpd(std::span<const double> xs) {
  if (xs.size() < kMinNumericalFitObservations) {
    throw Error(ErrorCode::TooFewObservations, "GPD fit needs at least 8 observations");
  }
  require_positive_durations(xs);
  GpdParams start = gpd_initial(xs);
  make_feasible(start, xs);
  return fit_numerical({DwellFamily::GeneralizedPareto, decode_gpd, encode_gpd}, start, xs);
}

DwellFit fit_family(DwellFamily family, std::span<const double> xs) {
  switch (family) {
    case DwellFamily::Exponential: return fit_exponential(xs);
    case DwellFamily::GeneralizedExtremeValue: return fit_gev(xs);
    case DwellFamily::GeneralizedPareto: return fit_gpd(xs);
    case DwellFamily::InverseGaussian: return fit_inverse_gaussian(xs);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown family");
}

DwellFit select_family(std::span<const double> xs, std::span<const DwellFamily> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no candidate families");
  std::optional<DwellFit> best;
  std::vector<std::string> notes;
  auto better = [](const DwellFit& a, const DwellFit& b) {
    if (a.bic != b.bic) return a.bic < b.bic;
    const int pa = parameter_count(a.family()), pb = parameter_count(b.family());
    if (pa != pb) return pa < pb;
    return static_cast<int>(a.family()) < static_cast<int>(b.family());
  };
  for (DwellFamily family : candidates) {
    try {
      DwellFit fit = fit_family(family, xs);
      if (!best || better(fit, *best)) best = std::move(fit);
    } catch (const Error& e) {
      notes.push_back("skipped " + std::string(to_string(family)) + ": " + std::string(to_string(e.code())));
    }
  }
  if (!best) throw Error(ErrorCode::AllFitsFailed, "no candidate family could be fitted");
  best->notes.insert(best->notes.end(), notes.begin(), notes.end());
  return *best;
}

double sample_dwell(const DwellParams& params, UniformSource& stream, double min_dwell_s, bool* clamped) {
  if (clamped) *clamped = false;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double x;
    if (const auto* g = std::get_if<InverseGaussianParams>(&params)) {
      // Michael, Schucany and Haas transformation with root selection.
      const double nu = standard_normal(stream);
      const double y = nu * nu;
      const double my = g->mu * y;
      x = g->mu + (g->mu / (2.0 * g->lambda)) * (my - std::sqrt(4.0 * g->lambda * my + my * my));
      if (stream.uniform() > g->mu / (g->mu + x)) x = g->mu * g->mu / x;
    } else {
      x = quantile(params, stream.uniform());
    }
    if (x > 0.0 && x >= min_dwell_s && std::isfinite(x)) return x;
  }
  if (clamped) *clamped = true;
  return min_dwell_s > 0.0 ? min_dwell_s : std::numeric_limits<double>::min();
}

}  // namespace semimarkov
