#include "slq/problem_io.h"

#include <fstream>
#include <sstream>

#include "slq/errors.h"

namespace slq {
namespace {

double Number(const nlohmann::json& j, const char* name) {
  if (!j.is_number()) {
    throw FormatError(std::string(name) + ": expected a number");
  }
  return j.get<double>();
}

int Dimension(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing \"") + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw DimensionError(std::string(key) + " must be a positive integer");
  }
  return v.get<int>();
}

}  // namespace

MatrixXd MatrixFromJson(const nlohmann::json& j, int rows, int cols,
                        const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    std::ostringstream os;
    os << name << ": expected " << rows << " rows";
    throw DimensionError(os.str());
  }
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      std::ostringstream os;
      os << name << ": row " << i << " expected " << cols << " entries";
      throw DimensionError(os.str());
    }
    for (int k = 0; k < cols; ++k) M(i, k) = Number(row[k], name);
  }
  return M;
}

VectorXd VectorFromJson(const nlohmann::json& j, int size, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    std::ostringstream os;
    os << name << ": expected " << size << " entries";
    throw DimensionError(os.str());
  }
  VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = Number(j[i], name);
  return v;
}

nlohmann::json MatrixToJson(const Eigen::Ref<const MatrixXd>& M) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::json VectorToJson(const Eigen::Ref<const VectorXd>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

LQProblem ProblemFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("problem must be a JSON object");
  static const char* kKnown[] = {"n", "m", "A", "B", "C", "D", "b",
                                 "sigma", "Q", "S", "R", "q", "r"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    if (!known) throw FormatError("unknown key \"" + key + "\"");
  }
  const int n = Dimension(j, "n");
  const int m = Dimension(j, "m");
  LQProblem p = LQProblem::Zero(n, m);
  auto mat = [&](const char* key, MatrixXd& dst, int rows, int cols) {
    if (j.contains(key)) dst = MatrixFromJson(j.at(key), rows, cols, key);
  };
  auto vec = [&](const char* key, VectorXd& dst, int size) {
    if (j.contains(key)) dst = VectorFromJson(j.at(key), size, key);
  };
  mat("A", p.A, n, n);
  mat("B", p.B, n, m);
  mat("C", p.C, n, n);
  mat("D", p.D, n, m);
  vec("b", p.b, n);
  vec("sigma", p.sigma, n);
  mat("Q", p.Q, n, n);
  mat("S", p.S, m, n);
  mat("R", p.R, m, m);
  vec("q", p.q, n);
  vec("r", p.r, m);
  return p;
}

nlohmann::json ProblemToJson(const LQProblem& p) {
  CheckDimensions(p);
  nlohmann::json j;
  j["n"] = p.n;
  j["m"] = p.m;
  j["A"] = MatrixToJson(p.A);
  j["B"] = MatrixToJson(p.B);
  j["C"] = MatrixToJson(p.C);
  j["D"] = MatrixToJson(p.D);
  j["b"] = VectorToJson(p.b);
  j["sigma"] = VectorToJson(p.sigma);
  j["Q"] = MatrixToJson(p.Q);
  j["S"] = MatrixToJson(p.S);
  j["R"] = MatrixToJson(p.R);
  j["q"] = VectorToJson(p.q);
  j["r"] = VectorToJson(p.r);
  return j;
}

LQProblem LoadProblem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open problem file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return ProblemFromJson(j);
}

}  // namespace slq
