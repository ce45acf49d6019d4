#pragma once

#include <vector>

#include "slq/dynamics.h"
#include "slq/linalg.h"

namespace slq::turnpike {

/// |E[X̂](t)| + |E[û](t)| + |E[Ŷ](t)| on the trajectory grid.
std::vector<double> Deviations(const dynamics::MeanTrajectory& mean);
/// |E[Ŷ](t)| alone.
std::vector<double> AdjointDeviations(const dynamics::MeanTrajectory& mean);

/// Envelope d(t) ≤ K (e^{−μt} + e^{−μ(T−t)}).
struct TurnpikeFit {
  std::vector<double> grid;
  std::vector<double> deviations;
  double T = 0.0;
  double K = 0.0;
  double mu = 0.0;
  double mu_left = 0.0;   // NaN when that side has too few usable points
  double mu_right = 0.0;
  double max_violation = 0.0;  // max of d − K·envelope, ≤ 0
  double delta = 0.25;
  double interior_bound = 0.0;  // sup of d over [δT, (1−δ)T]
  bool degenerate = false;      // deviations ~0: K = 0, μ = 0
  bool low_confidence = false;  // log-deviation not monotone in a half
};

/// Values below 1e−14 are clipped; only points at or above 1e−10 enter the
/// log-linear least squares. μ_left comes from [0, T/2], μ_right from
/// [T/2, T]; μ is the smaller of the usable ones and K = max d/envelope.
TurnpikeFit FitEnvelope(const std::vector<double>& grid,
                        const std::vector<double>& deviations,
                        double delta = 0.25);

/// K and μ held fixed, the same envelope evaluated against other
/// deviations (e.g. the adjoint alone).
double EnvelopeViolation(const TurnpikeFit& fit,
                         const std::vector<double>& deviations);

struct WindowCheck {
  bool pass = false;
  double sup = 0.0;
  double bound = 0.0;  // 2K e^{−μδT}
  double t_at_sup = 0.0;
};

/// sup over [δT, (1−δ)T] of the fit's deviations against 2K e^{−μδT}.
WindowCheck InteriorWindowCheck(const TurnpikeFit& fit, double delta);

struct TimeAverageRow {
  double T = 0.0;
  double state_error = 0.0;    // |(1/T)∫E[X̄] − x*|
  double control_error = 0.0;  // |(1/T)∫E[ū] − u*|
  // E|∫(X̄ − x*)dt|² divided by T and by T²; likewise for ū.
  double state_ms_over_T = 0.0;
  double state_ms_over_T2 = 0.0;
  double control_ms_over_T = 0.0;
  double control_ms_over_T2 = 0.0;
};

/// Time averages for one horizon. The mean integrals use the trapezoid
/// rule; the second moments come from the augmented moment flow.
TimeAverageRow TimeAverage(const dynamics::MeanTrajectory& mean,
                           const dynamics::MomentTrajectory& moments,
                           const VectorXd& x_star, const VectorXd& u_star);

struct ValueAverageRow {
  double T = 0.0;
  double V_T = 0.0;
  double V_T_over_T = 0.0;
  double error = 0.0;  // |V_T/T − V_static|
  double ratio = 0.0;  // error / previous error (NaN for the first row)
};

struct ValueAverageTable {
  std::vector<ValueAverageRow> rows;
  double V_static = 0.0;
  bool pass = false;
};

/// Passes when the errors decrease and the last is below 0.1·|V_static|
/// (0.05 absolute when V_static = 0).
ValueAverageTable ValueAverageCheck(const std::vector<double>& V_T,
                                    double V_static,
                                    const std::vector<double>& T_list);

}  // namespace slq::turnpike
