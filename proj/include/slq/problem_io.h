#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "slq/model.h"

namespace slq {

// Problem files are JSON objects with keys "n", "m", "A", "B", "C", "D",
// "b", "sigma", "Q", "S", "R", "q", "r". Matrices are row-major nested
// arrays, vectors flat arrays. Omitted blocks default to zero. Values are
// taken verbatim (no symmetrization), so ProblemToJson(ProblemFromJson(j))
// reproduces every number exactly.

LQProblem ProblemFromJson(const nlohmann::json& j);
nlohmann::json ProblemToJson(const LQProblem& problem);

/// Throws FormatError for unreadable or malformed files.
LQProblem LoadProblem(const std::filesystem::path& path);

nlohmann::json MatrixToJson(const Eigen::Ref<const MatrixXd>& M);
nlohmann::json VectorToJson(const Eigen::Ref<const VectorXd>& v);
MatrixXd MatrixFromJson(const nlohmann::json& j, int rows, int cols,
                        const char* name);
VectorXd VectorFromJson(const nlohmann::json& j, int size, const char* name);

}  // namespace slq
