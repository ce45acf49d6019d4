// Acceptance report: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "slq/dynamics.h"
#include "slq/reference_problems.h"
#include "slq/riccati.h"
#include "slq/stability.h"
#include "slq/static_opt.h"
#include "slq/turnpike.h"

namespace {

using namespace slq;

struct AreRecord {
  ReducedLQProblem p;
  riccati::AreSolution are;
};

// ARE solutions produced by criteria 1-4, checked again by criterion 10.
std::vector<AreRecord> g_are;

riccati::AreSolution Are(const ReducedLQProblem& p) {
  riccati::AreSolution s = riccati::SolveAre(p);
  g_are.push_back({p, s});
  return s;
}

MatrixXd Scalar(double x) { return MatrixXd::Constant(1, 1, x); }
VectorXd Vector1(double x) { return VectorXd::Constant(1, x); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

Outcome Ac1() {
  Outcome o;
  const ReducedLQProblem p = Reduce(NoisyIntegrator());
  const riccati::AreSolution are = Are(p);
  const static_opt::StaticSolution st = static_opt::SolveStatic(p, are.P);
  const static_opt::DivergenceReport d =
      static_opt::StaticDivergenceReport(NoisyIntegrator(), are.P);
  o.detail << "P=" << are.P(0, 0) << " theta=" << are.theta(0, 0)
           << " x*=" << st.x_star(0) << " u*=" << st.u_star(0)
           << " naive=(" << d.naive.x(0) << "," << d.naive.u(0) << ")";
  o.Require(std::abs(are.P(0, 0) - 2.0) <= 1e-8, "P = 2");
  o.Require(std::abs(are.theta(0, 0) + 2.0) <= 1e-8, "theta = -2");
  o.Require(std::abs(st.x_star(0) + 0.5) <= 1e-10, "x* = -1/2");
  o.Require(std::abs(st.u_star(0)) <= 1e-10, "u* = 0");
  o.Require(d.naive_feasible && std::abs(d.naive.x(0)) <= 1e-10 &&
                std::abs(d.naive.u(0)) <= 1e-10,
            "naive solution (0, 0)");
  o.Require(!d.coincide, "divergence flagged");
  return o;
}

Outcome Ac2() {
  Outcome o;
  const ReducedLQProblem p = Reduce(CoupledDriftDiffusion());
  const riccati::AreSolution are = Are(p);
  const static_opt::StaticSolution st = static_opt::SolveStatic(p, are.P);
  const static_opt::NaiveSolution naive =
      static_opt::SolveNaiveStatic(CoupledDriftDiffusion());
  o.detail << "P=" << are.P(0, 0) << " x*=" << st.x_star(0)
           << " u*=" << st.u_star(0) << " kkt=" << st.kkt_residual
           << " naive_feasible=" << naive.feasible;
  o.Require(std::abs(are.P(0, 0) - (2.0 + std::sqrt(5.0))) <= 1e-8,
            "P = 2 + sqrt 5");
  o.Require(!naive.feasible, "naive infeasible");
  o.Require(std::abs(st.x_star(0) + 0.5) <= 1e-9, "x* = -1/2");
  o.Require(std::abs(st.u_star(0) + 0.5) <= 1e-9, "u* = -1/2");
  o.Require(st.kkt_residual <= 1e-10, "KKT residual");
  return o;
}

Outcome Ac3() {
  Outcome o;
  const ReducedLQProblem ex1 = Reduce(NoisyIntegrator());
  const riccati::AreSolution a1 = Are(ex1);
  const riccati::DecayFit f1 =
      riccati::MeasureDecayRate(riccati::SigmaFlow(ex1, 10.0, 1e-3), a1.P);

  LQProblem raw = LQProblem::Zero(1, 1);
  raw.A = Scalar(-1);
  raw.D = Scalar(1);
  raw.Q = Scalar(1);
  raw.R = Scalar(1);
  const ReducedLQProblem sc = Reduce(raw);
  const riccati::AreSolution a2 = Are(sc);
  const riccati::DecayFit f2 =
      riccati::MeasureDecayRate(riccati::SigmaFlow(sc, 15.0, 1e-3), a2.P);
  o.detail << "rate_ex1=" << f1.rate << " rate_scalar=" << f2.rate;
  o.Require(f1.rate >= 2.7 && f1.rate <= 3.3, "noisy integrator rate in [2.7, 3.3]");
  o.Require(f2.rate >= 1.96 && f2.rate <= 2.04, "scalar rate in [1.96, 2.04]");
  return o;
}

Outcome Ac4() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst_pair = INFINITY, worst_bound = INFINITY;
  long pairs = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = k < 10 ? 2 : 3;
    const ReducedLQProblem p =
        Reduce(testing::RandomStabilizableProblem(rng, n, n - 1, true));
    const riccati::AreSolution are = Are(p);
    const riccati::SigmaTrajectory s = riccati::SigmaFlow(p, 10.0, 1e-2);
    std::vector<MatrixXd> pts;
    for (std::size_t i = 0; i < s.values.size(); i += 5) pts.push_back(s.values[i]);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
    auto min_eig = [&](const MatrixXd& M) {
      if (n == 2) {
        Eigen::Matrix2d m2 = M;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> e;
        e.computeDirect(m2, Eigen::EigenvaluesOnly);
        return e.eigenvalues()(0);
      }
      Eigen::Matrix3d m3 = M;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> e;
      e.computeDirect(m3, Eigen::EigenvaluesOnly);
      return e.eigenvalues()(0);
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
      worst_bound = std::min(worst_bound, min_eig(are.P - pts[i]));
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        worst_pair = std::min(worst_pair, min_eig(pts[j] - pts[i]));
        ++pairs;
      }
    }
  }
  o.detail << "pairs=" << pairs << " min_eig(S(tj)-S(ti))=" << worst_pair
           << " min_eig(P-S(t))=" << worst_bound;
  o.Require(worst_pair >= -1e-9, "monotone");
  o.Require(worst_bound >= -1e-9, "bounded by P");
  return o;
}

struct TurnpikeRuns {
  ReducedLQProblem p;
  riccati::AreSolution are;
  static_opt::StaticSolution st;
  std::vector<dynamics::HorizonSolution> hs;
  std::vector<turnpike::TurnpikeFit> fits;
};

const TurnpikeRuns& Ex1Runs() {
  static const TurnpikeRuns runs = [] {
    TurnpikeRuns r;
    r.p = Reduce(NoisyIntegrator());
    r.are = riccati::SolveAre(r.p);
    r.st = static_opt::SolveStatic(r.p, r.are.P);
    for (double T : {10.0, 20.0, 40.0}) {
      r.hs.push_back(
          dynamics::SolveHorizon(r.p, r.are, r.st, T, 1e-3, Vector1(1)));
      r.fits.push_back(turnpike::FitEnvelope(
          r.hs.back().mean.grid, turnpike::Deviations(r.hs.back().mean), 0.25));
    }
    return r;
  }();
  return runs;
}

Outcome Ac5() {
  Outcome o;
  const TurnpikeRuns& r = Ex1Runs();
  double lo = INFINITY, hi = 0.0;
  for (const turnpike::TurnpikeFit& f : r.fits) {
    o.detail << "T=" << f.T << ":mu=" << f.mu << ",K=" << f.K
             << ",viol=" << f.max_violation << " ";
    o.Require(f.mu > 0.5, "mu > 0.5");
    o.Require(f.max_violation <= 0.0, "max_violation <= 0");
    o.Require(turnpike::InteriorWindowCheck(f, 0.25).pass,
              "interior window at delta 0.25");
    lo = std::min(lo, f.mu);
    hi = std::max(hi, f.mu);
  }
  const dynamics::MeanTrajectory& m20 = r.hs[1].mean;
  const double mid = std::abs(m20.EX[m20.grid.size() / 2](0) - r.st.x_star(0));
  o.detail << "spread=" << (hi - lo) / lo << " mid_dev=" << mid;
  o.Require((hi - lo) / lo < 0.2, "mu spread < 20%");
  o.Require(mid < 1e-3, "|E X(T/2) - x*| < 1e-3 at T=20");
  return o;
}

Outcome Ac6() {
  Outcome o;
  const TurnpikeRuns& r = Ex1Runs();
  o.detail << "lambda*=" << r.st.lambda_star(0);
  o.Require(std::abs(r.st.lambda_star(0)) <= 1e-12, "lambda* = 0");
  for (std::size_t k = 0; k < r.fits.size(); ++k) {
    const std::vector<double> adj = turnpike::AdjointDeviations(r.hs[k].mean);
    const double v = turnpike::EnvelopeViolation(r.fits[k], adj);
    o.detail << " T=" << r.fits[k].T << ":viol=" << v;
    o.Require(v <= 0.0, "adjoint inside the envelope");
    if (r.fits[k].T == 20.0) {
      const double T = r.fits[k].T;
      double sup = 0.0;
      for (std::size_t i = 0; i < adj.size(); ++i) {
        const double t = r.hs[k].mean.grid[i];
        if (t >= 0.25 * T && t <= 0.75 * T) sup = std::max(sup, adj[i]);
      }
      o.detail << ",interior=" << sup;
      o.Require(sup < 1e-3, "interior adjoint deviation < 1e-3 at T=20");
    }
  }
  return o;
}

Outcome Ac7() {
  Outcome o;
  const ReducedLQProblem p = Reduce(NoisyIntegrator());
  std::vector<double> V;
  const std::vector<double> Ts = {20.0, 40.0};
  for (double T : Ts) {
    const riccati::RiccatiSchedule s = riccati::FiniteHorizonRiccati(p, T, 1e-3);
    V.push_back(dynamics::ValueFunction(p, s, riccati::PhiValueOde(p, s),
                                        Vector1(1)));
  }
  const turnpike::ValueAverageTable t =
      turnpike::ValueAverageCheck(V, -0.5, Ts);
  const double e20 = t.rows[0].error, e40 = t.rows[1].error;
  o.detail << "err20=" << e20 << " err40=" << e40 << " ratio=" << t.rows[1].ratio;
  o.Require(e20 < 0.1 && e40 < 0.1, "errors < 0.1");
  o.Require(t.rows[1].ratio >= 0.3 && t.rows[1].ratio <= 0.7,
            "ratio in [0.3, 0.7]");
  return o;
}

Outcome Ac8() {
  Outcome o;
  const ReducedLQProblem p = Reduce(NoisyIntegrator());
  const riccati::AreSolution are = riccati::SolveAre(p);
  const static_opt::StaticSolution st = static_opt::SolveStatic(p, are.P);
  const dynamics::HorizonSolution hs =
      dynamics::SolveHorizon(p, are, st, 5.0, 1e-3, Vector1(1));
  const dynamics::AffineFeedback fb = dynamics::TurnpikeFeedback(
      p, hs.schedule, hs.phi_turnpike, are.P, st);
  dynamics::McOptions mo;
  mo.paths = 100000;
  mo.h = 1e-3;
  mo.seed = 42;
  mo.record_stride = 10;
  const dynamics::McEnsemble a = dynamics::SimulateMc(p, fb, Vector1(1), mo);
  for (double t : {1.0, 2.5, 4.0}) {
    const auto rec = static_cast<std::size_t>(std::lround(t / 0.01));
    const auto node = static_cast<std::size_t>(std::lround(t / 1e-3));
    const double z =
        (a.mean_X[rec](0) - hs.mean.EX[node](0)) / a.se_X[rec](0);
    o.detail << "z(" << t << ")=" << z << " ";
    o.Require(std::abs(a.times[rec] - t) < 1e-9 && std::abs(z) <= 3.0,
              "mean within 3 SE");
  }
  const double zc = (a.mean_cost - hs.value) / a.se_cost;
  o.detail << "z(cost)=" << zc;
  o.Require(std::abs(zc) <= 3.0, "cost within 3 SE");
  const dynamics::McEnsemble b = dynamics::SimulateMc(p, fb, Vector1(1), mo);
  bool same = a.times.size() == b.times.size() &&
              std::memcmp(&a.mean_cost, &b.mean_cost, sizeof(double)) == 0 &&
              std::memcmp(&a.se_cost, &b.se_cost, sizeof(double)) == 0;
  for (std::size_t j = 0; same && j < a.times.size(); ++j) {
    same = std::memcmp(a.mean_X[j].data(), b.mean_X[j].data(), sizeof(double)) == 0 &&
           std::memcmp(a.se_X[j].data(), b.se_X[j].data(), sizeof(double)) == 0;
  }
  o.Require(same, "bit-identical rerun");
  return o;
}

// Witness from an independent Kronecker solve of PA + AᵀP + CᵀPC = −I.
bool HasLyapunovWitness(const MatrixXd& A, const MatrixXd& C) {
  const MatrixXd I = MatrixXd::Identity(2, 2);
  const MatrixXd L = Kron(I, A.transpose()) + Kron(A.transpose(), I) +
                     Kron(C.transpose(), C.transpose());
  const Eigen::FullPivLU<MatrixXd> lu(L);
  if (!lu.isInvertible()) return false;
  const MatrixXd P = Symmetrize(Unvec(lu.solve(Vec(-I)), 2, 2));
  const MatrixXd lhs = P * A + A.transpose() * P + C.transpose() * P * C;
  return MinEigenvalue(P) > 0.0 && MaxEigenvalue(lhs) < 0.0;
}

Outcome Ac9() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> shift(0.0, 2.5);
  int stable = 0, mismatches = 0;
  for (int k = 0; k < 50; ++k) {
    const MatrixXd A = testing::RandomMatrix(rng, 2, 2) -
                       shift(rng) * MatrixXd::Identity(2, 2);
    const MatrixXd C = testing::RandomMatrix(rng, 2, 2, 0.7);
    const stability::StabilityReport r = stability::IsMsStable(A, C);
    const bool verdict = r.generator_abscissa < 0.0;
    if (verdict) ++stable;
    if (verdict != HasLyapunovWitness(A, C) ||
        verdict != r.lyapunov_witness.has_value())
      ++mismatches;
  }
  o.detail << "stable=" << stable << "/50 mismatches=" << mismatches;
  o.Require(mismatches == 0, "verdict matches witness");
  return o;
}

Outcome Ac10() {
  Outcome o;
  double worst = 0.0;
  for (const AreRecord& r : g_are) {
    const ReducedLQProblem& p = r.p;
    const MatrixXd& P = r.are.P;
    const MatrixXd S = p.B.transpose() * P + p.D.transpose() * P * p.C;
    const MatrixXd K = -(p.R + p.D.transpose() * P * p.D).ldlt().solve(S);
    const MatrixXd Acl = p.A + p.B * K, Ccl = p.C + p.D * K;
    const MatrixXd res = P * Acl + Acl.transpose() * P +
                         Ccl.transpose() * P * Ccl + p.Q +
                         K.transpose() * p.R * K;
    worst = std::max(worst, res.norm());
  }
  o.detail << "solutions=" << g_are.size() << " max_residual=" << worst;
  o.Require(!g_are.empty(), "solutions collected");
  o.Require(worst <= 1e-9, "residual <= 1e-9");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", 1, Ac1},   {"AC2", 1, Ac2},  {"AC3", 5, Ac3},
      {"AC4", 30, Ac4},  {"AC5", 10, Ac5}, {"AC6", 10, Ac6},
      {"AC7", 5, Ac7},   {"AC8", 60, Ac8}, {"AC9", 10, Ac9},
      {"AC10", 1, Ac10},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    if (secs > c.budget) {
      o.pass = false;
      o.detail << " [over budget " << c.budget << " s]";
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %-4s %7.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
