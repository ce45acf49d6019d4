#include "slq/dynamics.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "slq/errors.h"
#include "slq/philox.h"
#include "slq/rk4.h"

namespace slq::dynamics {
namespace {

using riccati::GainK;
using riccati::GainR;
using riccati::PhiTrajectory;
using riccati::RiccatiSchedule;

void CheckShared(const RiccatiSchedule& s, const PhiTrajectory& phi) {
  if (s.size() != phi.size() || s.size() < 2 ||
      std::abs(s.step - phi.step) > 1e-12 * s.step) {
    throw std::invalid_argument("schedule and phi are on different grids");
  }
}

VectorXd TurnpikeOffset(const ReducedLQProblem& p, const MatrixXd& PT,
                        const VectorXd& phi, const MatrixXd& P,
                        const VectorXd& sigma_star) {
  return -SpdSolve(GainR(p, PT),
                   p.B.transpose() * phi +
                       p.D.transpose() * ((PT - P) * sigma_star));
}

VectorXd ValueOffset(const ReducedLQProblem& p, const MatrixXd& PT,
                     const VectorXd& phi) {
  return -SpdSolve(GainR(p, PT), p.B.transpose() * phi +
                                     p.D.transpose() * (PT * p.sigma));
}

}  // namespace

MeanTrajectory MeanFlow(const ReducedLQProblem& p,
                        const RiccatiSchedule& s, const PhiTrajectory& phi,
                        const MatrixXd& P,
                        const static_opt::StaticSolution& st,
                        const VectorXd& x0) {
  CheckShared(s, phi);
  if (x0.size() != p.n) throw DimensionError("x0 has the wrong length");
  const std::size_t N = s.size() - 1;
  const VectorXd& ss = st.sigma_star;

  std::vector<MatrixXd> theta(N + 1);
  std::vector<VectorXd> vhat(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    theta[i] = GainK(p, s.P[i]);
    vhat[i] = TurnpikeOffset(p, s.P[i], phi.values[i], P, ss);
  }

  MeanTrajectory out;
  out.grid = s.grid;
  out.EXhat.resize(N + 1);
  out.EXhat[0] = x0 - st.x_star;
  for (std::size_t i = 0; i < N; ++i) {
    const MatrixXd Pm = s.Midpoint(i);
    const MatrixXd theta_m = GainK(p, Pm);
    const VectorXd vhat_m = TurnpikeOffset(p, Pm, phi.Midpoint(i), P, ss);
    auto rhs = [&](Stage stage, const VectorXd& x) -> VectorXd {
      const std::size_t j = stage == Stage::kEnd ? i + 1 : i;
      const MatrixXd& th = stage == Stage::kMid ? theta_m : theta[j];
      const VectorXd& v = stage == Stage::kMid ? vhat_m : vhat[j];
      return (p.A + p.B * th) * x + p.B * v;
    };
    out.EXhat[i + 1] = Rk4Step(out.EXhat[i], s.step, rhs);
  }

  out.Euhat.resize(N + 1);
  out.EYhat.resize(N + 1);
  out.EX.resize(N + 1);
  out.Eu.resize(N + 1);
  out.EY.resize(N + 1);
  out.EZ.resize(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    out.Euhat[i] = theta[i] * out.EXhat[i] + vhat[i];
    out.EYhat[i] = s.P[i] * out.EXhat[i] + phi.values[i];
    out.EZ[i] = s.P[i] * (p.C * out.EXhat[i] + p.D * out.Euhat[i] + ss);
    out.EX[i] = out.EXhat[i] + st.x_star;
    out.Eu[i] = out.Euhat[i] + st.u_star;
    out.EY[i] = out.EYhat[i] + st.lambda_star;
  }
  return out;
}

double StationarityResidual(const ReducedLQProblem& p,
                            const MeanTrajectory& mean) {
  double worst = 0.0;
  for (std::size_t i = 0; i < mean.grid.size(); ++i) {
    const VectorXd r = p.B.transpose() * mean.EY[i] +
                       p.D.transpose() * mean.EZ[i] + p.R * mean.Eu[i];
    worst = std::max(worst, r.norm());
  }
  return worst;
}

double AdjointOdeResidual(const ReducedLQProblem& p,
                          const MeanTrajectory& mean) {
  const std::size_t size = mean.grid.size();
  if (size < 5) throw std::invalid_argument("grid too short for residual");
  const double h = mean.grid[1] - mean.grid[0];
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < size; ++i) {
    const VectorXd dY = (-mean.EY[i + 2] + 8.0 * mean.EY[i + 1] -
                         8.0 * mean.EY[i - 1] + mean.EY[i - 2]) /
                        (12.0 * h);
    const VectorXd r = dY + p.A.transpose() * mean.EY[i] +
                       p.C.transpose() * mean.EZ[i] + p.Q * mean.EX[i] + p.q;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

AffineFeedback ValueFeedback(const ReducedLQProblem& p,
                             const RiccatiSchedule& s,
                             const PhiTrajectory& phi) {
  CheckShared(s, phi);
  const std::size_t N = s.size() - 1;
  AffineFeedback fb;
  fb.grid = s.grid;
  fb.step = s.step;
  for (std::size_t i = 0; i <= N; ++i) {
    fb.theta.push_back(GainK(p, s.P[i]));
    fb.kappa.push_back(ValueOffset(p, s.P[i], phi.values[i]));
    if (i < N) {
      const MatrixXd Pm = s.Midpoint(i);
      fb.theta_mid.push_back(GainK(p, Pm));
      fb.kappa_mid.push_back(ValueOffset(p, Pm, phi.Midpoint(i)));
    }
  }
  return fb;
}

AffineFeedback TurnpikeFeedback(const ReducedLQProblem& p,
                                const RiccatiSchedule& s,
                                const PhiTrajectory& phi, const MatrixXd& P,
                                const static_opt::StaticSolution& st) {
  CheckShared(s, phi);
  const std::size_t N = s.size() - 1;
  auto offset = [&](const MatrixXd& PT, const MatrixXd& theta,
                    const VectorXd& ph) -> VectorXd {
    return -theta * st.x_star +
           TurnpikeOffset(p, PT, ph, P, st.sigma_star) + st.u_star;
  };
  AffineFeedback fb;
  fb.grid = s.grid;
  fb.step = s.step;
  for (std::size_t i = 0; i <= N; ++i) {
    fb.theta.push_back(GainK(p, s.P[i]));
    fb.kappa.push_back(offset(s.P[i], fb.theta.back(), phi.values[i]));
    if (i < N) {
      const MatrixXd Pm = s.Midpoint(i);
      fb.theta_mid.push_back(GainK(p, Pm));
      fb.kappa_mid.push_back(offset(Pm, fb.theta_mid.back(), phi.Midpoint(i)));
    }
  }
  return fb;
}

MomentTrajectory MomentFlow(const ReducedLQProblem& p,
                            const AffineFeedback& fb, const VectorXd& x0) {
  if (x0.size() != p.n) throw DimensionError("x0 has the wrong length");
  const int n = p.n, m = p.m, d = 2 * n + m;
  const std::size_t N = fb.size() - 1;
  // Packed state: [mean (d) | vec second moment (d²) | cost].
  const int size = d + d * d + 1;

  auto rhs_for = [&](const MatrixXd& theta, const VectorXd& kappa) {
    MatrixXd Aa = MatrixXd::Zero(d, d);
    Aa.topLeftCorner(n, n) = p.A + p.B * theta;
    Aa.block(n, 0, n, n) = MatrixXd::Identity(n, n);
    Aa.block(2 * n, 0, m, n) = theta;
    MatrixXd Ca = MatrixXd::Zero(d, d);
    Ca.topLeftCorner(n, n) = p.C + p.D * theta;
    VectorXd beta = VectorXd::Zero(d);
    beta.head(n) = p.B * kappa + p.b;
    beta.tail(m) = kappa;
    VectorXd gamma = VectorXd::Zero(d);
    gamma.head(n) = p.D * kappa + p.sigma;
    const MatrixXd QR = p.Q + theta.transpose() * p.R * theta;
    const VectorXd lin = p.q + theta.transpose() * (p.R * kappa);
    const double cst = kappa.dot(p.R * kappa) - p.phi0;

    return [=](const VectorXd& y) -> VectorXd {
      const auto mu = y.head(d);
      const Eigen::Map<const MatrixXd> M(y.data() + d, d, d);
      VectorXd out(size);
      out.head(d) = Aa * mu + beta;
      const MatrixXd Cm = Ca * mu;
      MatrixXd dM = Aa * M + Ca * M * Ca.transpose() + beta * mu.transpose() +
                    Cm * gamma.transpose();
      dM = dM + dM.transpose().eval();
      dM -= Ca * M * Ca.transpose();  // counted twice above
      dM += gamma * gamma.transpose();
      out.segment(d, d * d) = Eigen::Map<const VectorXd>(dM.data(), d * d);
      const auto Mxx = M.topLeftCorner(n, n);
      out(size - 1) = 0.5 * ((QR.cwiseProduct(Mxx)).sum() +
                             2.0 * lin.dot(mu.head(n)) + cst);
      return out;
    };
  };

  VectorXd mu0 = VectorXd::Zero(d);
  mu0.head(n) = x0;
  const MatrixXd M0 = mu0 * mu0.transpose();
  VectorXd y(size);
  y.head(d) = mu0;
  y.segment(d, d * d) = Eigen::Map<const VectorXd>(M0.data(), d * d);
  y(size - 1) = 0.0;

  MomentTrajectory out;
  out.grid = fb.grid;
  out.min_covariance_eig = 0.0;
  auto record = [&](const VectorXd& state, double t) {
    const Eigen::Map<const MatrixXd> M(state.data() + d, d, d);
    const VectorXd mx = state.head(n);
    MatrixXd Mxx = Symmetrize(M.topLeftCorner(n, n));
    out.mean.push_back(mx);
    out.second.push_back(Mxx);
    out.cost.push_back(state(size - 1));
    const double eig = MinEigenvalue(Mxx - mx * mx.transpose());
    out.min_covariance_eig = std::min(out.min_covariance_eig, eig);
    if (eig < -1e-8 * (1.0 + Mxx.norm())) {
      throw NumericalError("second moment lost positive semidefiniteness at t = " +
                           std::to_string(t));
    }
  };
  record(y, fb.grid[0]);
  for (std::size_t i = 0; i < N; ++i) {
    const auto f0 = rhs_for(fb.theta[i], fb.kappa[i]);
    const auto fm = rhs_for(fb.theta_mid[i], fb.kappa_mid[i]);
    const auto f1 = rhs_for(fb.theta[i + 1], fb.kappa[i + 1]);
    auto rhs = [&](Stage stage, const VectorXd& s) -> VectorXd {
      switch (stage) {
        case Stage::kStart:
          return f0(s);
        case Stage::kMid:
          return fm(s);
        case Stage::kEnd:
          return f1(s);
      }
      return f0(s);
    };
    y = Rk4Step(y, fb.step, rhs);
    // Keep the second moment exactly symmetric.
    Eigen::Map<MatrixXd> M(y.data() + d, d, d);
    M = Symmetrize(M);
    record(y, fb.grid[i + 1]);
  }
  out.aug_mean = y.head(d);
  out.aug_second = Eigen::Map<const MatrixXd>(y.data() + d, d, d);
  return out;
}

double ValueFunction(const ReducedLQProblem& p, const RiccatiSchedule& s,
                     const PhiTrajectory& phi, const VectorXd& x0) {
  CheckShared(s, phi);
  if (x0.size() != p.n) throw DimensionError("x0 has the wrong length");
  const std::size_t N = s.size() - 1;
  const double h = s.step;

  auto integrand = [&](std::size_t i) {
    const VectorXd w =
        p.B.transpose() * phi.values[i] + p.D.transpose() * (s.P[i] * p.sigma);
    return p.sigma.dot(s.P[i] * p.sigma) + 2.0 * phi.values[i].dot(p.b) -
           w.dot(VectorXd(SpdSolve(GainR(p, s.P[i]), w)));
  };
  // Exact time derivative of the integrand from Ṗ_T and φ̇.
  auto integrand_rate = [&](std::size_t i) {
    const MatrixXd& PT = s.P[i];
    const MatrixXd& Pd = s.Pdot[i];
    const VectorXd w =
        p.B.transpose() * phi.values[i] + p.D.transpose() * (PT * p.sigma);
    const VectorXd wd =
        p.B.transpose() * phi.derivs[i] + p.D.transpose() * (Pd * p.sigma);
    const VectorXd Rw = SpdSolve(GainR(p, PT), w).col(0);
    const MatrixXd Rd = p.D.transpose() * Pd * p.D;
    return p.sigma.dot(Pd * p.sigma) + 2.0 * phi.derivs[i].dot(p.b) -
           2.0 * wd.dot(Rw) + Rw.dot(Rd * Rw);
  };

  double sum = 0.5 * (integrand(0) + integrand(N));
  for (std::size_t i = 1; i < N; ++i) sum += integrand(i);
  // Trapezoid with the Euler–Maclaurin endpoint term.
  const double integral =
      h * sum - (h * h / 12.0) * (integrand_rate(N) - integrand_rate(0));

  const double T = s.horizon;
  return 0.5 * x0.dot(s.P[0] * x0) + phi.values[0].dot(x0) + 0.5 * integral -
         0.5 * p.phi0 * T;
}

int ThreadsFromEnvironment() {
  int threads = 0;
  if (const char* env = std::getenv("TURNPIKE_THREADS")) {
    threads = std::atoi(env);
  }
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  return std::max(threads, 1);
}

namespace {

constexpr long kChunk = 1024;

struct Moments {
  long count = 0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit Moments(std::size_t size) : mean(size, 0.0), m2(size, 0.0) {}

  // Chan et al. pairwise update; applied in a fixed order.
  void Merge(const Moments& o) {
    if (o.count == 0) return;
    const double na = count, nb = o.count, n = na + nb;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const double delta = o.mean[k] - mean[k];
      mean[k] += delta * nb / n;
      m2[k] += o.m2[k] + delta * delta * na * nb / n;
    }
    count += o.count;
  }
};

struct Kernel {
  int n = 0, m = 0;
  long steps = 0;       // MC steps
  long node_stride = 0; // schedule nodes per MC step
  double h = 0.0, sqrt_h = 0.0;
  std::vector<double> A, B, C, D, b, sigma, Q, R, q;  // row-major
  std::vector<double> theta, kappa;                   // per MC step
  std::vector<long> record_of;                        // -1 when not recorded
  long records = 0;
  double phi0_T = 0.0;
  std::uint64_t seed = 0;
  // Layout of a path's statistics: X records, u records, cost.
  std::size_t StatSize() const { return records * (n + m) + 1; }
};

std::vector<double> RowMajor(const MatrixXd& M) {
  std::vector<double> out(M.size());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) out[i * M.cols() + j] = M(i, j);
  return out;
}

// Runs one path; returns false if the state left the finite range. kN and
// kM fix the dimensions at compile time when positive.
template <int kN, int kM>
bool RunPath(const Kernel& k, const VectorXd& x0, std::uint64_t path,
             double* stats) {
  const int n = kN > 0 ? kN : k.n;
  const int m = kM > 0 ? kM : k.m;
  double X[16], Xn[16], v[16];
  for (int i = 0; i < n; ++i) X[i] = x0(i);
  const NormalStream normals(k.seed, path);
  double z[2] = {0.0, 0.0};
  double cost = 0.0;

  for (long j = 0;; ++j) {
    const double* th = k.theta.data() + j * m * n;
    const double* ka = k.kappa.data() + j * m;
    for (int a = 0; a < m; ++a) {
      double s = ka[a];
      for (int c = 0; c < n; ++c) s += th[a * n + c] * X[c];
      v[a] = s;
    }
    double f = 0.0;
    for (int a = 0; a < n; ++a) {
      double s = 0.0;
      for (int c = 0; c < n; ++c) s += k.Q[a * n + c] * X[c];
      f += X[a] * (s + 2.0 * k.q[a]);
    }
    for (int a = 0; a < m; ++a) {
      double s = 0.0;
      for (int c = 0; c < m; ++c) s += k.R[a * m + c] * v[c];
      f += v[a] * s;
    }
    const bool last = j == k.steps;
    cost += (j == 0 || last) ? 0.5 * f : f;

    const long rec = k.record_of[j];
    if (rec >= 0) {
      double* xs = stats + rec * n;
      double* us = stats + k.records * n + rec * m;
      for (int a = 0; a < n; ++a) xs[a] = X[a];
      for (int a = 0; a < m; ++a) us[a] = v[a];
    }
    if (last) break;

    if ((j & 1) == 0) normals.Pair(static_cast<std::uint64_t>(j) >> 1, z);
    const double dw = k.sqrt_h * z[j & 1];
    bool finite = true;
    for (int a = 0; a < n; ++a) {
      double drift = k.b[a], diff = k.sigma[a];
      for (int c = 0; c < n; ++c) {
        drift += k.A[a * n + c] * X[c];
        diff += k.C[a * n + c] * X[c];
      }
      for (int c = 0; c < m; ++c) {
        drift += k.B[a * m + c] * v[c];
        diff += k.D[a * m + c] * v[c];
      }
      Xn[a] = X[a] + drift * k.h + diff * dw;
      finite = finite && std::isfinite(Xn[a]);
    }
    if (!finite) return false;
    for (int a = 0; a < n; ++a) X[a] = Xn[a];
  }
  stats[k.StatSize() - 1] = 0.5 * k.h * cost - k.phi0_T;
  return std::isfinite(stats[k.StatSize() - 1]);
}

}  // namespace

McEnsemble SimulateMc(const ReducedLQProblem& p, const AffineFeedback& fb,
                      const VectorXd& x0, const McOptions& options) {
  if (options.paths < 2) throw std::invalid_argument("need at least 2 paths");
  if (x0.size() != p.n) throw DimensionError("x0 has the wrong length");
  if (p.n > 16 || p.m > 16) {
    throw DimensionError("Monte Carlo supports n, m <= 16");
  }
  const long nodes = static_cast<long>(fb.size()) - 1;
  const double h = options.h > 0.0 ? options.h : fb.step;
  const double ratio = h / fb.step;
  const long stride = std::lround(ratio);
  if (stride < 1 || std::abs(ratio - stride) > 1e-9 * ratio ||
      nodes % stride != 0) {
    throw std::invalid_argument(
        "Monte Carlo step must be an integer multiple of the feedback step "
        "that divides the grid");
  }

  Kernel k;
  k.n = p.n;
  k.m = p.m;
  k.steps = nodes / stride;
  k.node_stride = stride;
  k.h = fb.step * stride;
  k.sqrt_h = std::sqrt(k.h);
  k.A = RowMajor(p.A);
  k.B = RowMajor(p.B);
  k.C = RowMajor(p.C);
  k.D = RowMajor(p.D);
  k.b = RowMajor(p.b);
  k.sigma = RowMajor(p.sigma);
  k.Q = RowMajor(p.Q);
  k.R = RowMajor(p.R);
  k.q = RowMajor(p.q);
  k.seed = options.seed;
  k.phi0_T = 0.5 * p.phi0 * fb.grid.back();
  for (long j = 0; j <= k.steps; ++j) {
    const std::vector<double> th = RowMajor(fb.theta[j * stride]);
    k.theta.insert(k.theta.end(), th.begin(), th.end());
    const VectorXd& ka = fb.kappa[j * stride];
    k.kappa.insert(k.kappa.end(), ka.data(), ka.data() + ka.size());
  }
  const long rs = options.record_stride > 0
                      ? options.record_stride
                      : std::max(1L, (k.steps + 999) / 1000);
  k.record_of.assign(k.steps + 1, -1);
  McEnsemble out;
  for (long j = 0; j <= k.steps; ++j) {
    if (j % rs == 0 || j == k.steps) {
      k.record_of[j] = k.records++;
      out.times.push_back(fb.grid[j * stride]);
    }
  }

  const long chunks = (options.paths + kChunk - 1) / kChunk;
  const std::size_t stat_size = k.StatSize();
  std::vector<Moments> results(chunks, Moments(stat_size));
  std::vector<long> flagged(chunks, 0);
  std::atomic<long> next{0};

  using PathFn = bool (*)(const Kernel&, const VectorXd&, std::uint64_t,
                          double*);
  PathFn run_path = &RunPath<0, 0>;
  if (k.n == 1 && k.m == 1) run_path = &RunPath<1, 1>;
  if (k.n == 2 && k.m == 1) run_path = &RunPath<2, 1>;
  if (k.n == 2 && k.m == 2) run_path = &RunPath<2, 2>;

  auto worker = [&]() {
    std::vector<double> stats(stat_size);
    for (long c; (c = next.fetch_add(1)) < chunks;) {
      Moments& acc = results[c];
      const long first = c * kChunk;
      const long last = std::min(options.paths, first + kChunk);
      for (long path = first; path < last; ++path) {
        if (!run_path(k, x0, static_cast<std::uint64_t>(path), stats.data())) {
          ++flagged[c];
          continue;
        }
        // Welford update, sequential in path order within the chunk.
        ++acc.count;
        const double inv = 1.0 / acc.count;
        for (std::size_t s = 0; s < stat_size; ++s) {
          const double delta = stats[s] - acc.mean[s];
          acc.mean[s] += delta * inv;
          acc.m2[s] += delta * (stats[s] - acc.mean[s]);
        }
      }
    }
  };

  const int threads = static_cast<int>(std::min<long>(
      options.threads > 0 ? options.threads : ThreadsFromEnvironment(),
      chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  Moments total(stat_size);
  long bad = 0;
  for (long c = 0; c < chunks; ++c) {
    total.Merge(results[c]);
    bad += flagged[c];
  }
  if (bad * 1000 > options.paths) {
    throw NumericalError("Monte Carlo aborted: " + std::to_string(bad) +
                         " paths became non-finite");
  }
  if (total.count < 2) {
    throw NumericalError("Monte Carlo produced fewer than two finite paths");
  }

  out.paths = total.count;
  out.flagged = bad;
  out.h = k.h;
  out.seed = options.seed;
  const double N = static_cast<double>(total.count);
  auto se = [&](std::size_t s) {
    return std::sqrt(total.m2[s] / (N - 1.0) / N);
  };
  for (long r = 0; r < k.records; ++r) {
    VectorXd mx(p.n), sx(p.n), mu(p.m), su(p.m);
    for (int a = 0; a < p.n; ++a) {
      const std::size_t s = r * p.n + a;
      mx(a) = total.mean[s];
      sx(a) = se(s);
    }
    for (int a = 0; a < p.m; ++a) {
      const std::size_t s = k.records * p.n + r * p.m + a;
      mu(a) = total.mean[s];
      su(a) = se(s);
    }
    out.mean_X.push_back(mx);
    out.se_X.push_back(sx);
    out.mean_u.push_back(mu);
    out.se_u.push_back(su);
  }
  out.mean_cost = total.mean[stat_size - 1];
  out.se_cost = se(stat_size - 1);
  return out;
}

HorizonSolution SolveHorizon(const ReducedLQProblem& p,
                             const riccati::AreSolution& are,
                             const static_opt::StaticSolution& st, double T,
                             double h, const VectorXd& x0) {
  HorizonSolution out;
  out.T = T;
  out.schedule = riccati::FiniteHorizonRiccati(p, T, h);
  out.phi_value = riccati::PhiValueOde(p, out.schedule);
  out.phi_turnpike = riccati::PhiTurnpikeOde(p, out.schedule, are.P,
                                             st.lambda_star, st.sigma_star);
  out.mean = MeanFlow(p, out.schedule, out.phi_turnpike, are.P, st, x0);
  out.value = ValueFunction(p, out.schedule, out.phi_value, x0);
  return out;
}

}  // namespace slq::dynamics
