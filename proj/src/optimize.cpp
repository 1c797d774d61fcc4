#include "semimarkov/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semimarkov/error.hpp"

namespace semimarkov {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

SimplexResult nelder_mead(const Objective& f, std::vector<double> start, const SimplexOptions& options) {
  const std::size_t n = start.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "nelder_mead needs at least one parameter");

  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) {
    double& c = pts[i + 1][i];
    c = (c != 0.0) ? c * (1.0 + options.initial_step) : 0.00025;
  }
  std::vector<double> vals(n + 1);
  for (std::size_t j = 0; j <= n; ++j) vals[j] = f(pts[j]);
  if (!std::isfinite(vals[0])) {
    throw Error(ErrorCode::InvalidArgument, "nelder_mead start point is infeasible");
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), second(n);

  auto point_along = [&](double t, const std::vector<double>& worst, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + t * (centroid[i] - worst[i]);
  };

  SimplexResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    {
      std::vector<std::vector<double>> p2(n + 1);
      std::vector<double> v2(n + 1);
      for (std::size_t j = 0; j <= n; ++j) {
        p2[j] = std::move(pts[order[j]]);
        v2[j] = vals[order[j]];
      }
      pts.swap(p2);
      vals.swap(v2);
    }

    double diameter = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(pts[0][i]));
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t i = 0; i < n; ++i) diameter = std::max(diameter, std::abs(pts[j][i] - pts[0][i]));
    }
    const double spread = std::abs(vals[n] - vals[0]);
    if (diameter <= options.x_tolerance * scale &&
        spread <= options.f_tolerance * std::max(1.0, std::abs(vals[0]))) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[j][i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    const std::vector<double>& worst = pts[n];
    point_along(kReflect, worst, trial);
    const double fr = f(trial);

    if (fr < vals[0]) {
      point_along(kExpand, worst, second);
      const double fe = f(second);
      if (fe < fr) {
        pts[n] = second;
        vals[n] = fe;
      } else {
        pts[n] = trial;
        vals[n] = fr;
      }
      continue;
    }
    if (fr < vals[n - 1]) {
      pts[n] = trial;
      vals[n] = fr;
      continue;
    }

    const bool outside = fr < vals[n];
    point_along(outside ? kContract : -kContract, worst, second);
    const double fc = f(second);
    if (fc < (outside ? fr : vals[n])) {
      pts[n] = second;
      vals[n] = fc;
      continue;
    }

    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t i = 0; i < n; ++i) pts[j][i] = pts[0][i] + kShrink * (pts[j][i] - pts[0][i]);
      vals[j] = f(pts[j]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  result.x = pts[best];
  result.value = vals[best];
  result.iterations = iter;
  return result;
}

std::vector<double> central_gradient(const Objective& f, std::span<const double> x, double rel_step) {
  std::vector<double> g(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace semimarkov
