#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ddctl/collect.hpp"
#include "ddctl/design.hpp"
#include "ddctl/dp.hpp"
#include "ddctl/experiment.hpp"
#include "ddctl/lti.hpp"

namespace ddctl {

using Json = nlohmann::ordered_json;

/// Row-major nested arrays. Parsing errors throw kConfig naming `what`.
Json to_json(const MatrixXd& M);
Json to_json(const VectorXd& v);
MatrixXd matrix_from_json(const Json& j, std::string_view what);
VectorXd vector_from_json(const Json& j, std::string_view what);

/// Throws kConfig when `j` is not an object or has a key outside `allowed`.
void require_keys(const Json& j, const std::vector<std::string>& allowed, std::string_view what);
/// Throws kConfig when `key` is missing.
const Json& require(const Json& j, const std::string& key, std::string_view what);

/// {"n","m","A","B"} and optionally "Q","R".
Json system_to_json(const LtiSystem& sys);
Json system_to_json(const LtiSystem& sys, const CostWeights& w);
LtiSystem system_from_json(const Json& j);
/// Weights from "Q"/"R" in `j`; identity weights when both are absent.
CostWeights weights_from_json(const Json& j, int n, int m);

Json record_to_json(const DataRecord& rec);
DataRecord record_from_json(const Json& j);

Json riccati_to_json(const RiccatiSolution& sol);
Json design_to_json(const DesignResult& r);
Json verdict_to_json(const StabilityVerdict& v);
Json certificate_to_json(const CostCertificate& c);
Json trace_to_json(const DpTrace& t);
Json mc_to_json(const McReport& r);

/// Dump of an LMI problem: dimension, objective and per-block coefficients.
Json problem_to_json(const LmiProblem& p);

/// Doubles are written as shortest round-trip decimals.
std::string dump(const Json& j);
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// iteration,residual[,gain_error]; the gain error column is written when
/// `Fstar` is non-empty.
std::string trace_csv(const DpTrace& t, const MatrixXd& Fstar = {});
/// N,lambda_min[,relative_error].
std::string mc_csv(const McReport& r);

}  // namespace ddctl
