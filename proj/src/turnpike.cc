#include "slq/turnpike.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slq::turnpike {
namespace {

constexpr double kClip = 1e-14;
constexpr double kFitFloor = 1e-10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SideFit {
  double slope = kNaN;
  bool monotone = true;
};

// Least-squares slope of log d over the grid points in [lo, hi] with
// d ≥ kFitFloor. `decreasing` is the expected direction of d in t.
SideFit FitSide(const std::vector<double>& grid, const std::vector<double>& d,
                double lo, double hi, bool decreasing) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  int count = 0;
  SideFit fit;
  double prev = kNaN;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t < lo || t > hi || d[i] < kFitFloor) continue;
    const double y = std::log(d[i]);
    if (!std::isnan(prev)) {
      const double change = decreasing ? y - prev : prev - y;
      if (change > 1e-6) fit.monotone = false;
    }
    prev = y;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++count;
  }
  const double denom = count * stt - st * st;
  if (count >= 3 && denom > 0.0) fit.slope = (count * sty - st * sy) / denom;
  return fit;
}

double Envelope(double mu, double t, double T) {
  return std::exp(-mu * t) + std::exp(-mu * (T - t));
}

double Trapezoid(const std::vector<double>& grid,
                 const std::vector<double>& values) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    sum += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
  }
  return sum;
}

VectorXd TrapezoidVec(const std::vector<double>& grid,
                      const std::vector<VectorXd>& values) {
  VectorXd sum = VectorXd::Zero(values.front().size());
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    sum += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
  }
  return sum;
}

}  // namespace

std::vector<double> Deviations(const dynamics::MeanTrajectory& mean) {
  std::vector<double> out(mean.grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = mean.EXhat[i].norm() + mean.Euhat[i].norm() +
             mean.EYhat[i].norm();
  }
  return out;
}

std::vector<double> AdjointDeviations(const dynamics::MeanTrajectory& mean) {
  std::vector<double> out(mean.grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mean.EYhat[i].norm();
  return out;
}

TurnpikeFit FitEnvelope(const std::vector<double>& grid,
                        const std::vector<double>& deviations, double delta) {
  if (grid.size() != deviations.size() || grid.size() < 2) {
    throw std::invalid_argument("grid and deviations must match");
  }
  TurnpikeFit fit;
  fit.grid = grid;
  fit.T = grid.back();
  fit.delta = delta;
  fit.deviations.resize(deviations.size());
  for (std::size_t i = 0; i < deviations.size(); ++i) {
    fit.deviations[i] = std::max(deviations[i], kClip);
  }
  const std::vector<double>& d = fit.deviations;
  const double T = fit.T;

  const SideFit left = FitSide(grid, d, 0.0, 0.5 * T, true);
  const SideFit right = FitSide(grid, d, 0.5 * T, T, false);
  fit.mu_left = -left.slope;
  fit.mu_right = right.slope;
  fit.low_confidence = !left.monotone || !right.monotone;

  double mu = std::numeric_limits<double>::infinity();
  if (fit.mu_left > 0.0) mu = std::min(mu, fit.mu_left);
  if (fit.mu_right > 0.0) mu = std::min(mu, fit.mu_right);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t >= delta * T && t <= (1.0 - delta) * T) {
      fit.interior_bound = std::max(fit.interior_bound, d[i]);
    }
  }

  if (!std::isfinite(mu)) {
    fit.degenerate = true;
    fit.K = 0.0;
    fit.mu = 0.0;
    fit.max_violation = *std::max_element(d.begin(), d.end());
    return fit;
  }
  fit.mu = mu;

  std::vector<double> ratio(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ratio[i] = d[i] / Envelope(mu, grid[i], T);
    fit.K = std::max(fit.K, ratio[i]);
  }
  fit.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fit.max_violation = std::max(
        fit.max_violation, Envelope(mu, grid[i], T) * (ratio[i] - fit.K));
  }
  return fit;
}

double EnvelopeViolation(const TurnpikeFit& fit,
                         const std::vector<double>& deviations) {
  if (deviations.size() != fit.grid.size()) {
    throw std::invalid_argument("deviations do not match the fit grid");
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < deviations.size(); ++i) {
    const double bound = fit.K * Envelope(fit.mu, fit.grid[i], fit.T);
    worst = std::max(worst, std::max(deviations[i], kClip) - bound);
  }
  return worst;
}

WindowCheck InteriorWindowCheck(const TurnpikeFit& fit, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument("delta must lie in (0, 1/2)");
  }
  const double T = fit.T;
  WindowCheck check;
  check.bound = 2.0 * fit.K * std::exp(-fit.mu * delta * T);
  // Guard against round-off in grid points near the window edges.
  const double slack = 1e-12 * T;
  bool any = false;
  for (std::size_t i = 0; i < fit.grid.size(); ++i) {
    const double t = fit.grid[i];
    if (t < delta * T - slack || t > (1.0 - delta) * T + slack) continue;
    if (!any || fit.deviations[i] > check.sup) {
      check.sup = fit.deviations[i];
      check.t_at_sup = t;
    }
    any = true;
  }
  if (!any) {
    // Window narrower than the grid: use the node nearest the midpoint.
    std::size_t best = 0;
    for (std::size_t i = 1; i < fit.grid.size(); ++i) {
      if (std::abs(fit.grid[i] - 0.5 * T) < std::abs(fit.grid[best] - 0.5 * T))
        best = i;
    }
    check.sup = fit.deviations[best];
    check.t_at_sup = fit.grid[best];
  }
  check.pass = check.sup <= check.bound;
  return check;
}

TimeAverageRow TimeAverage(const dynamics::MeanTrajectory& mean,
                           const dynamics::MomentTrajectory& moments,
                           const VectorXd& x_star, const VectorXd& u_star) {
  const double T = mean.grid.back() - mean.grid.front();
  const long n = x_star.size(), m = u_star.size();
  TimeAverageRow row;
  row.T = T;
  row.state_error = (TrapezoidVec(mean.grid, mean.EX) / T - x_star).norm();
  row.control_error = (TrapezoidVec(mean.grid, mean.Eu) / T - u_star).norm();

  // E|I − T x*|² = tr E[IIᵀ] − 2T⟨x*, E I⟩ + T²|x*|², same for J and u*.
  const VectorXd& mu = moments.aug_mean;
  const MatrixXd& M = moments.aug_second;
  const double state_ms = M.block(n, n, n, n).trace() -
                          2.0 * T * x_star.dot(mu.segment(n, n)) +
                          T * T * x_star.squaredNorm();
  const double control_ms = M.block(2 * n, 2 * n, m, m).trace() -
                            2.0 * T * u_star.dot(mu.segment(2 * n, m)) +
                            T * T * u_star.squaredNorm();
  row.state_ms_over_T = state_ms / T;
  row.state_ms_over_T2 = state_ms / (T * T);
  row.control_ms_over_T = control_ms / T;
  row.control_ms_over_T2 = control_ms / (T * T);
  return row;
}

ValueAverageTable ValueAverageCheck(const std::vector<double>& V_T,
                                    double V_static,
                                    const std::vector<double>& T_list) {
  if (V_T.size() != T_list.size() || V_T.empty()) {
    throw std::invalid_argument("one value per horizon is required");
  }
  ValueAverageTable table;
  table.V_static = V_static;
  bool decreasing = true;
  for (std::size_t i = 0; i < V_T.size(); ++i) {
    ValueAverageRow row;
    row.T = T_list[i];
    row.V_T = V_T[i];
    row.V_T_over_T = V_T[i] / T_list[i];
    row.error = std::abs(row.V_T_over_T - V_static);
    row.ratio = i == 0 ? kNaN : row.error / table.rows.back().error;
    if (i > 0 && !(row.error < table.rows.back().error)) decreasing = false;
    table.rows.push_back(row);
  }
  const double last = table.rows.back().error;
  const double limit = V_static == 0.0 ? 0.05 : 0.1 * std::abs(V_static);
  table.pass = decreasing && last < limit;
  return table;
}

}  // namespace slq::turnpike
