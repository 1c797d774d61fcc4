#pragma once

#include <functional>
#include <span>
#include <vector>

namespace semimarkov {

struct SimplexOptions {
  int max_iterations = 2000;
  double x_tolerance = 1e-8;  // relative simplex diameter
  double f_tolerance = 1e-12;  // relative spread of vertex values
  double initial_step = 0.05;  // relative; absolute 0.00025 for zero coordinates
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead minimisation. The objective may return +inf to reject a point
/// (infeasible parameters); the starting point itself must be finite.
SimplexResult nelder_mead(const Objective& f, std::vector<double> start, const SimplexOptions& options = {});

/// Central finite-difference gradient with step h_i = rel_step * max(1, |x_i|).
std::vector<double> central_gradient(const Objective& f, std::span<const double> x, double rel_step = 1e-5);

}  // namespace semimarkov
