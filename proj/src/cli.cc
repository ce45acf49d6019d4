#include "slq/cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "slq/dynamics.h"
#include "slq/errors.h"
#include "slq/problem_io.h"
#include "slq/reference_problems.h"
#include "slq/riccati.h"
#include "slq/stability.h"
#include "slq/static_opt.h"
#include "slq/turnpike.h"

namespace slq::cli {
namespace {

using nlohmann::json;

// Raised for bad option values that CLI11 cannot see (e.g. x0 length).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid problem data, carrying the report for the error record.
class InvalidProblem : public std::runtime_error {
 public:
  explicit InvalidProblem(ValidationReport report)
      : std::runtime_error("problem violates the strong standard condition"),
        report(std::move(report)) {}
  ValidationReport report;
};

struct Config {
  std::string problem;
  std::vector<double> T = {20.0};
  double h = 1e-3;
  long paths = 10000;
  std::uint64_t seed = 42;
  double delta = 0.25;
  std::string x0;
  std::string out = "-";
  std::string deviations_csv;
  bool closed_loop = false;
};

json Num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json ReportToJson(const ValidationReport& r) {
  json v = json::array();
  for (const Violation& x : r.violations) {
    v.push_back({{"what", x.what}, {"margin", Num(x.margin)}});
  }
  return {{"ok", r.ok()},
          {"violations", v},
          {"r_margin", Num(r.r_margin)},
          {"q_margin", Num(r.q_margin)}};
}

json StabilityToJson(const stability::StabilityReport& r) {
  json j = {{"generator_abscissa", r.generator_abscissa},
            {"stable", r.stable},
            {"beta", r.stable ? json(r.beta) : json(nullptr)},
            {"alpha", r.stable ? json(r.alpha) : json(nullptr)},
            {"witness_failed", r.witness_failed}};
  if (r.lyapunov_witness) {
    j["lyapunov_witness"] = MatrixToJson(*r.lyapunov_witness);
    j["witness_residual"] = r.witness_residual;
    j["witness_margin"] = r.witness_margin;
  } else {
    j["lyapunov_witness"] = nullptr;
  }
  return j;
}

json StaticToJson(const static_opt::StaticSolution& s) {
  return {{"x_star", VectorToJson(s.x_star)},
          {"u_star", VectorToJson(s.u_star)},
          {"lambda_star", VectorToJson(s.lambda_star)},
          {"sigma_star", VectorToJson(s.sigma_star)},
          {"F_value", s.F_value},
          {"V_static", s.V_static},
          {"kkt_residual", s.kkt_residual},
          {"feasibility_residual", s.feasibility_residual}};
}

json FitToJson(const turnpike::TurnpikeFit& f) {
  return {{"T", f.T},
          {"K", f.K},
          {"mu", f.mu},
          {"mu_left", Num(f.mu_left)},
          {"mu_right", Num(f.mu_right)},
          {"max_violation", f.max_violation},
          {"delta", f.delta},
          {"interior_bound", f.interior_bound},
          {"degenerate", f.degenerate},
          {"low_confidence", f.low_confidence}};
}

void WriteCsvRow(std::ostream& os, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << FormatDouble(row[i]);
  }
  os << '\n';
}

// Opens `path` for writing, or returns `fallback` for "-".
std::ostream& OpenOut(const std::string& path, std::ostream& fallback,
                      std::unique_ptr<std::ofstream>& holder) {
  if (path.empty() || path == "-") return fallback;
  holder = std::make_unique<std::ofstream>(path);
  if (!*holder) throw UsageError("cannot open output file " + path);
  return *holder;
}

LQProblem LoadValid(const Config& c) {
  const LQProblem p = LoadProblem(c.problem);
  const ValidationReport report = Validate(p);
  if (!report.ok()) throw InvalidProblem(report);
  return p;
}

VectorXd InitialState(const Config& c, int n) {
  if (c.x0.empty()) return VectorXd::Zero(n);
  const std::vector<double> v = ParseVector(c.x0);
  if (static_cast<int>(v.size()) != n) {
    throw UsageError("--x0 needs " + std::to_string(n) + " entries");
  }
  return Eigen::Map<const VectorXd>(v.data(), n);
}

void RequirePositive(double x, const char* name) {
  if (!(x > 0.0)) throw UsageError(std::string(name) + " must be positive");
}

riccati::AreOptions AreOpts(const Config& c) {
  riccati::AreOptions o;
  o.h = c.h;
  return o;
}

json Envelope(json body) {
  json out = {{"schema_version", kSchemaVersion}};
  out.update(body);
  return out;
}

int CheckStability(const Config& c, std::ostream& out) {
  const LQProblem p = LoadProblem(c.problem);
  CheckDimensions(p);
  json body;
  if (c.closed_loop) {
    const ValidationReport report = Validate(p);
    if (!report.ok()) throw InvalidProblem(report);
    const ReducedLQProblem r = Reduce(p);
    const riccati::AreSolution are = riccati::SolveAre(r, AreOpts(c));
    body["mode"] = "closed_loop";
    body["theta"] = MatrixToJson(are.theta);
    body["report"] = StabilityToJson(stability::IsMsStable(
        r.A + r.B * are.theta, r.C + r.D * are.theta));
  } else {
    body["mode"] = "open_loop";
    body["report"] = StabilityToJson(stability::IsMsStable(p.A, p.C));
    stability::StabilizabilityOptions so;
    so.h = c.h;
    const stability::StabilizabilityResult s =
        stability::IsStabilizable(p, so);
    json sj = {{"status", stability::ToString(s.status)}};
    sj["theta"] = s.theta ? MatrixToJson(*s.theta) : json(nullptr);
    if (!s.detail.empty()) sj["detail"] = s.detail;
    body["stabilizability"] = sj;
  }
  out << Envelope(body).dump(2) << '\n';
  return kOk;
}

int SolveAreCmd(const Config& c, std::ostream& out) {
  RequirePositive(c.h, "--h");
  const ReducedLQProblem r = Reduce(LoadValid(c));
  const riccati::AreSolution are = riccati::SolveAre(r, AreOpts(c));
  json body = {{"P", MatrixToJson(are.P)},
               {"theta", MatrixToJson(are.theta)},
               {"residual", are.residual},
               {"iterations", are.iterations},
               {"refined", are.refined},
               {"flow_time", are.flow_time},
               {"closed_loop_abscissa", are.closed_loop_abscissa}};
  try {
    const double horizon = 2.0 * are.flow_time + 5.0;
    const riccati::DecayFit fit = riccati::MeasureDecayRate(
        riccati::SigmaFlow(r, horizon, c.h), are.P);
    body["rate"] = fit.rate;
    body["rate_K"] = fit.K;
  } catch (const NumericalError& e) {
    body["rate"] = nullptr;
    body["rate_error"] = e.what();
  }
  out << Envelope(body).dump(2) << '\n';
  return kOk;
}

int StaticCmd(const Config& c, std::ostream& out) {
  const LQProblem p = LoadValid(c);
  const ReducedLQProblem r = Reduce(p);
  const riccati::AreSolution are = riccati::SolveAre(r, AreOpts(c));
  const static_opt::DivergenceReport d =
      static_opt::StaticDivergenceReport(p, are.P);
  json naive = {{"feasible", d.naive.feasible},
                {"constraint_residual", d.naive.constraint_residual}};
  if (d.naive.feasible) {
    naive["x"] = VectorToJson(d.naive.x);
    naive["u"] = VectorToJson(d.naive.u);
    naive["F0_value"] = d.naive.F0_value;
  }
  json body = {{"P", MatrixToJson(are.P)},
               {"static", StaticToJson(d.correct)},
               {"naive", naive},
               {"coincide", d.coincide},
               {"distance", Num(d.distance)}};
  out << Envelope(body).dump(2) << '\n';
  return kOk;
}

int RiccatiCmd(const Config& c, std::ostream& out) {
  RequirePositive(c.h, "--h");
  RequirePositive(c.T.front(), "--T");
  const ReducedLQProblem r = Reduce(LoadValid(c));
  const double T = c.T.front();
  const riccati::AreSolution are = riccati::SolveAre(r, AreOpts(c));
  const static_opt::StaticSolution st = static_opt::SolveStatic(r, are.P);
  const riccati::RiccatiSchedule s = riccati::FiniteHorizonRiccati(r, T, c.h);
  const std::vector<MatrixXd> gains = riccati::GainSchedule(r, s);
  const riccati::PhiTrajectory phi = riccati::PhiValueOde(r, s);
  const riccati::PhiTrajectory phiT =
      riccati::PhiTurnpikeOde(r, s, are.P, st.lambda_star, st.sigma_star);

  std::unique_ptr<std::ofstream> holder;
  std::ostream& os = OpenOut(c.out, out, holder);
  const int n = r.n, m = r.m;
  os << 't';
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) os << ",P_" << i << '_' << j;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) os << ",theta_" << i << '_' << j;
  for (int i = 0; i < n; ++i) os << ",phi_" << i;
  for (int i = 0; i < n; ++i) os << ",phiT_" << i;
  os << '\n';
  std::vector<double> row;
  for (std::size_t k = 0; k < s.size(); ++k) {
    row.assign(1, s.grid[k]);
    const VectorXd P = Vec(s.P[k]);
    const VectorXd th = Vec(gains[k]);
    row.insert(row.end(), P.data(), P.data() + P.size());
    row.insert(row.end(), th.data(), th.data() + th.size());
    row.insert(row.end(), phi.values[k].data(), phi.values[k].data() + n);
    row.insert(row.end(), phiT.values[k].data(), phiT.values[k].data() + n);
    WriteCsvRow(os, row);
  }
  return kOk;
}

int ValueCmd(const Config& c, std::ostream& out) {
  RequirePositive(c.h, "--h");
  const ReducedLQProblem r = Reduce(LoadValid(c));
  const VectorXd x0 = InitialState(c, r.n);
  json rows = json::array();
  for (double T : c.T) {
    RequirePositive(T, "--T");
    const riccati::RiccatiSchedule s = riccati::FiniteHorizonRiccati(r, T, c.h);
    const double V =
        dynamics::ValueFunction(r, s, riccati::PhiValueOde(r, s), x0);
    rows.push_back({{"T", T}, {"V_T", V}, {"V_T_over_T", V / T}});
  }
  json body = rows.size() == 1 ? rows.front() : json{{"values", rows}};
  out << Envelope(body).dump(2) << '\n';
  return kOk;
}

int SimulateCmd(const Config& c, std::ostream& out) {
  RequirePositive(c.h, "--h");
  RequirePositive(c.T.front(), "--T");
  if (c.paths < 2) throw UsageError("--paths must be at least 2");
  const ReducedLQProblem r = Reduce(LoadValid(c));
  const VectorXd x0 = InitialState(c, r.n);
  const riccati::AreSolution are = riccati::SolveAre(r, AreOpts(c));
  const static_opt::StaticSolution st = static_opt::SolveStatic(r, are.P);
  const dynamics::HorizonSolution hs =
      dynamics::SolveHorizon(r, are, st, c.T.front(), c.h, x0);
  const dynamics::AffineFeedback fb = dynamics::TurnpikeFeedback(
      r, hs.schedule, hs.phi_turnpike, are.P, st);
  dynamics::McOptions mo;
  mo.paths = c.paths;
  mo.seed = c.seed;
  const dynamics::McEnsemble mc = dynamics::SimulateMc(r, fb, x0, mo);

  std::unique_ptr<std::ofstream> holder;
  std::ostream& os = OpenOut(c.out, out, holder);
  const int n = r.n, m = r.m;
  os << 't';
  for (int i = 0; i < n; ++i) os << ",EX_" << i;
  for (int i = 0; i < m; ++i) os << ",Eu_" << i;
  for (int i = 0; i < n; ++i) os << ",EY_" << i;
  for (int i = 0; i < n; ++i) os << ",mc_EX_" << i;
  for (int i = 0; i < n; ++i) os << ",mc_se_" << i;
  os << '\n';
  const double step = hs.schedule.step;
  std::vector<double> row;
  for (std::size_t k = 0; k < mc.times.size(); ++k) {
    const auto g = static_cast<std::size_t>(std::lround(mc.times[k] / step));
    row.assign(1, mc.times[k]);
    const dynamics::MeanTrajectory& mt = hs.mean;
    row.insert(row.end(), mt.EX[g].data(), mt.EX[g].data() + n);
    row.insert(row.end(), mt.Eu[g].data(), mt.Eu[g].data() + m);
    row.insert(row.end(), mt.EY[g].data(), mt.EY[g].data() + n);
    row.insert(row.end(), mc.mean_X[k].data(), mc.mean_X[k].data() + n);
    row.insert(row.end(), mc.se_X[k].data(), mc.se_X[k].data() + n);
    WriteCsvRow(os, row);
  }
  return kOk;
}

int TurnpikeCmd(const Config& c, std::ostream& out) {
  RequirePositive(c.h, "--h");
  if (!(c.delta > 0.0 && c.delta < 0.5)) {
    throw UsageError("--delta must lie in (0, 1/2)");
  }
  const ReducedLQProblem r = Reduce(LoadValid(c));
  const VectorXd x0 = InitialState(c, r.n);
  const riccati::AreSolution are = riccati::SolveAre(r, AreOpts(c));
  const static_opt::StaticSolution st = static_opt::SolveStatic(r, are.P);

  std::unique_ptr<std::ofstream> csv_holder;
  std::ostream* csv = nullptr;
  if (!c.deviations_csv.empty()) {
    csv = &OpenOut(c.deviations_csv, out, csv_holder);
    *csv << "T,t,deviation,adjoint_deviation\n";
  }

  json fits = json::array();
  json averages = json::array();
  std::vector<double> values;
  for (double T : c.T) {
    RequirePositive(T, "--T");
    const dynamics::HorizonSolution hs =
        dynamics::SolveHorizon(r, are, st, T, c.h, x0);
    const std::vector<double> dev = turnpike::Deviations(hs.mean);
    const std::vector<double> adj = turnpike::AdjointDeviations(hs.mean);
    const turnpike::TurnpikeFit fit =
        turnpike::FitEnvelope(hs.mean.grid, dev, c.delta);
    const turnpike::WindowCheck win =
        turnpike::InteriorWindowCheck(fit, c.delta);
    json fj = FitToJson(fit);
    fj["adjoint_max_violation"] = turnpike::EnvelopeViolation(fit, adj);
    fj["interior_window"] = {{"pass", win.pass},
                             {"sup", win.sup},
                             {"bound", win.bound},
                             {"t_at_sup", win.t_at_sup}};
    fits.push_back(fj);

    const dynamics::AffineFeedback fb = dynamics::TurnpikeFeedback(
        r, hs.schedule, hs.phi_turnpike, are.P, st);
    const dynamics::MomentTrajectory mom = dynamics::MomentFlow(r, fb, x0);
    const turnpike::TimeAverageRow ta =
        turnpike::TimeAverage(hs.mean, mom, st.x_star, st.u_star);
    averages.push_back({{"T", T},
                        {"state_error", ta.state_error},
                        {"control_error", ta.control_error},
                        {"state_ms_over_T", ta.state_ms_over_T},
                        {"state_ms_over_T2", ta.state_ms_over_T2},
                        {"control_ms_over_T", ta.control_ms_over_T},
                        {"control_ms_over_T2", ta.control_ms_over_T2}});
    values.push_back(hs.value);
    if (csv) {
      for (std::size_t k = 0; k < dev.size(); ++k) {
        WriteCsvRow(*csv, {T, hs.mean.grid[k], dev[k], adj[k]});
      }
    }
  }
  const turnpike::ValueAverageTable va =
      turnpike::ValueAverageCheck(values, st.V_static, c.T);
  json vrows = json::array();
  for (const turnpike::ValueAverageRow& row : va.rows) {
    vrows.push_back({{"T", row.T},
                     {"V_T", row.V_T},
                     {"V_T_over_T", row.V_T_over_T},
                     {"error", row.error},
                     {"ratio", Num(row.ratio)}});
  }
  json body = {{"static", StaticToJson(st)},
               {"fits", fits},
               {"time_average", averages},
               {"value_average",
                {{"V_static", va.V_static}, {"pass", va.pass}, {"rows", vrows}}}};
  std::unique_ptr<std::ofstream> holder;
  std::ostream& os = OpenOut(c.out, out, holder);
  os << Envelope(body).dump(2) << '\n';
  return kOk;
}

struct ExampleCheck {
  std::string name;
  double expected;
  double got;
  double tol;
};

int ExamplesCmd(std::ostream& out) {
  std::vector<ExampleCheck> checks;
  std::vector<std::pair<std::string, bool>> flags;
  {
    const LQProblem p = NoisyIntegrator();
    const ReducedLQProblem r = Reduce(p);
    const riccati::AreSolution are = riccati::SolveAre(r);
    const static_opt::DivergenceReport d =
        static_opt::StaticDivergenceReport(p, are.P);
    checks.push_back({"example1 P", 2.0, are.P(0, 0), 1e-8});
    checks.push_back({"example1 theta", -2.0, are.theta(0, 0), 1e-8});
    checks.push_back({"example1 x*", -0.5, d.correct.x_star(0), 1e-10});
    checks.push_back({"example1 u*", 0.0, d.correct.u_star(0), 1e-10});
    checks.push_back({"example1 naive x", 0.0,
                      d.naive.feasible ? d.naive.x(0) : NAN, 1e-10});
    checks.push_back({"example1 naive u", 0.0,
                      d.naive.feasible ? d.naive.u(0) : NAN, 1e-10});
    flags.push_back({"example1 problems disagree", !d.coincide});
  }
  {
    const LQProblem p = CoupledDriftDiffusion();
    const ReducedLQProblem r = Reduce(p);
    const riccati::AreSolution are = riccati::SolveAre(r);
    const static_opt::DivergenceReport d =
        static_opt::StaticDivergenceReport(p, are.P);
    checks.push_back({"example2 P", 2.0 + std::sqrt(5.0), are.P(0, 0), 1e-8});
    checks.push_back({"example2 x*", -0.5, d.correct.x_star(0), 1e-9});
    checks.push_back({"example2 u*", -0.5, d.correct.u_star(0), 1e-9});
    checks.push_back(
        {"example2 lambda*", 2.5 + std::sqrt(5.0), d.correct.lambda_star(0),
         1e-9});
    flags.push_back({"example2 naive infeasible", !d.naive.feasible});
    flags.push_back({"example2 KKT residual <= 1e-10",
                     d.correct.kkt_residual <= 1e-10});
  }

  bool all = true;
  out << std::left << std::setw(32) << "check" << std::setw(24) << "expected"
      << std::setw(24) << "computed" << "status\n";
  for (const ExampleCheck& c : checks) {
    const bool ok = std::abs(c.got - c.expected) <= c.tol;
    all = all && ok;
    out << std::setw(32) << c.name << std::setw(24) << FormatDouble(c.expected)
        << std::setw(24) << FormatDouble(c.got) << (ok ? "pass" : "FAIL")
        << '\n';
  }
  for (const auto& [name, ok] : flags) {
    all = all && ok;
    out << std::setw(32) << name << std::setw(24) << "true" << std::setw(24)
        << (ok ? "true" : "false") << (ok ? "pass" : "FAIL") << '\n';
  }
  return all ? kOk : kNumerical;
}

void EmitError(std::ostream& err, const std::string& kind,
               const std::string& message, json extra = json::object()) {
  json e = {{"schema_version", kSchemaVersion},
            {"error", {{"kind", kind}, {"message", message}}}};
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    e["error"][it.key()] = it.value();
  }
  err << e.dump() << '\n';
}

}  // namespace

std::string FormatDouble(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<double> ParseVector(const std::string& text) {
  std::string s = text;
  for (char& ch : s) {
    if (ch == ',' || ch == '[' || ch == ']' || ch == ';') ch = ' ';
  }
  std::istringstream is(s);
  std::vector<double> out;
  std::string token;
  while (is >> token) {
    double value = 0.0;
    const auto res =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      throw UsageError("cannot parse number '" + token + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) throw UsageError("empty vector");
  return out;
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Stochastic LQ turnpike toolkit", "turnpike"};
  app.require_subcommand(1);
  // --h is the step size, so help is long-form only.
  app.set_help_flag("--help", "print this help and exit");
  Config c;

  auto add_problem = [&](CLI::App* sub) {
    sub->add_option("--problem", c.problem, "problem JSON file")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto add_h = [&](CLI::App* sub) {
    sub->add_option("--h", c.h, "integration step")->capture_default_str();
  };
  auto add_T = [&](CLI::App* sub, bool many) {
    auto* opt = sub->add_option("--T", c.T, "horizon")->capture_default_str();
    if (!many) opt->expected(1);
  };
  auto add_x0 = [&](CLI::App* sub) {
    sub->add_option("--x0", c.x0, "initial state, e.g. \"1,0\" (default 0)");
  };
  auto add_out = [&](CLI::App* sub, const char* what) {
    sub->add_option("--out", c.out, what)->capture_default_str();
  };

  auto* stab = app.add_subcommand("check-stability",
                                  "mean-square stability report");
  add_problem(stab);
  add_h(stab);
  stab->add_flag("--closed-loop", c.closed_loop,
                 "test the optimal closed loop instead of [A, C]");

  auto* are = app.add_subcommand("solve-are", "stabilizing ARE solution");
  add_problem(are);
  add_h(are);

  auto* stat = app.add_subcommand("static", "static problem and naive variant");
  add_problem(stat);

  auto* ric = app.add_subcommand("riccati", "P_T, Θ_T and φ schedules as CSV");
  add_problem(ric);
  add_T(ric, false);
  add_h(ric);
  add_out(ric, "CSV path (- for stdout)");

  auto* val = app.add_subcommand("value", "finite-horizon value V_T(x0)");
  add_problem(val);
  add_T(val, true);
  add_h(val);
  add_x0(val);

  auto* sim = app.add_subcommand("simulate", "mean flow vs Monte Carlo CSV");
  add_problem(sim);
  add_T(sim, false);
  add_h(sim);
  add_x0(sim);
  sim->add_option("--paths", c.paths, "Monte Carlo paths")
      ->capture_default_str();
  sim->add_option("--seed", c.seed, "base seed")->capture_default_str();
  add_out(sim, "CSV path (- for stdout)");

  auto* tp = app.add_subcommand("turnpike", "turnpike envelope report");
  add_problem(tp);
  add_T(tp, true);
  add_h(tp);
  add_x0(tp);
  tp->add_option("--delta", c.delta, "interior window parameter")
      ->capture_default_str();
  add_out(tp, "JSON report path (- for stdout)");
  tp->add_option("--deviations-csv", c.deviations_csv,
                 "optional CSV of deviations per horizon");

  auto* ex = app.add_subcommand("examples", "check the built-in reference problems");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub =
        app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << e.what() << "\n\n" << sub->help();
    EmitError(err, "usage", e.what());
    return kUsage;
  }

  try {
    if (stab->parsed()) return CheckStability(c, out);
    if (are->parsed()) return SolveAreCmd(c, out);
    if (stat->parsed()) return StaticCmd(c, out);
    if (ric->parsed()) return RiccatiCmd(c, out);
    if (val->parsed()) return ValueCmd(c, out);
    if (sim->parsed()) return SimulateCmd(c, out);
    if (tp->parsed()) return TurnpikeCmd(c, out);
    if (ex->parsed()) return ExamplesCmd(out);
  } catch (const UsageError& e) {
    EmitError(err, "usage", e.what());
    return kUsage;
  } catch (const FormatError& e) {
    EmitError(err, "format", e.what());
    return kUsage;
  } catch (const InvalidProblem& e) {
    EmitError(err, "validation", e.what(),
              {{"report", ReportToJson(e.report)}});
    return kValidation;
  } catch (const DimensionError& e) {
    EmitError(err, "dimension", e.what());
    return kValidation;
  } catch (const ValidationError& e) {
    EmitError(err, "validation", e.what());
    return kValidation;
  } catch (const DivergenceError& e) {
    EmitError(err, "divergence", e.what(),
              {{"blowup_time", e.blowup_time()}});
    return kNumerical;
  } catch (const NumericalError& e) {
    EmitError(err, "numerical", e.what());
    return kNumerical;
  } catch (const InternalError& e) {
    EmitError(err, "internal", e.what());
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    EmitError(err, "usage", e.what());
    return kUsage;
  }
  return kUsage;
}

}  // namespace slq::cli
