#include "ddctl/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ddctl/errors.hpp"

namespace ddctl {

namespace {

[[noreturn]] void config_error(std::string_view what, const std::string& msg) {
  throw Failure(Signal::kConfig, std::string(what) + ": " + msg);
}

double number(const Json& j, std::string_view what) {
  if (!j.is_number()) config_error(what, "expected a number");
  return j.get<double>();
}

}  // namespace

Json to_json(const MatrixXd& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

MatrixXd matrix_from_json(const Json& j, std::string_view what) {
  if (!j.is_array()) config_error(what, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return MatrixXd(0, 0);
  if (!j[0].is_array()) config_error(what, "expected an array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      config_error(what, "rows have different lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return M;
}

VectorXd vector_from_json(const Json& j, std::string_view what) {
  if (!j.is_array()) config_error(what, "expected an array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

void require_keys(const Json& j, const std::vector<std::string>& allowed, std::string_view what) {
  if (!j.is_object()) config_error(what, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(what, "unknown key '" + key + "'");
    }
  }
}

const Json& require(const Json& j, const std::string& key, std::string_view what) {
  if (!j.is_object() || !j.contains(key)) config_error(what, "missing key '" + key + "'");
  return j.at(key);
}

Json system_to_json(const LtiSystem& sys) {
  Json j;
  j["n"] = sys.n();
  j["m"] = sys.m();
  j["A"] = to_json(sys.A());
  j["B"] = to_json(sys.B());
  return j;
}

Json system_to_json(const LtiSystem& sys, const CostWeights& w) {
  Json j = system_to_json(sys);
  j["Q"] = to_json(w.Q());
  j["R"] = to_json(w.R());
  return j;
}

LtiSystem system_from_json(const Json& j) {
  require_keys(j, {"n", "m", "A", "B", "Q", "R", "meta", "command", "status"}, "system");
  MatrixXd A = matrix_from_json(require(j, "A", "system"), "system.A");
  MatrixXd B = matrix_from_json(require(j, "B", "system"), "system.B");
  const int n = require(j, "n", "system").get<int>();
  const int m = require(j, "m", "system").get<int>();
  if (A.rows() != n || A.cols() != n || B.rows() != n || B.cols() != m) {
    config_error("system", "A must be n x n and B n x m");
  }
  try {
    return LtiSystem(std::move(A), std::move(B));
  } catch (const Failure& e) {
    config_error("system", e.what());
  }
}

CostWeights weights_from_json(const Json& j, int n, int m) {
  if (!j.contains("Q") && !j.contains("R")) return CostWeights::identity(n, m);
  MatrixXd Q = j.contains("Q") ? matrix_from_json(j.at("Q"), "Q") : MatrixXd::Identity(n, n);
  MatrixXd R = j.contains("R") ? matrix_from_json(j.at("R"), "R") : MatrixXd::Identity(m, m);
  if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m) {
    config_error("weights", "Q must be n x n and R m x m");
  }
  try {
    return CostWeights(std::move(Q), std::move(R));
  } catch (const Failure& e) {
    config_error("weights", e.what());
  }
}

Json record_to_json(const DataRecord& rec) {
  Json j;
  j["kind"] = std::string(kind_name(rec.kind));
  j["scheme"] = std::string(scheme_name(rec.scheme));
  j["n"] = rec.n;
  j["m"] = rec.m;
  j["sample_count"] = rec.sample_count;
  j["seed"] = rec.seed;
  j["S"] = to_json(rec.S);
  j["H"] = to_json(rec.H);
  Json params = Json::object();
  const auto& p = rec.params;
  if (p.F) params["F"] = to_json(*p.F);
  if (p.z) params["z"] = to_json(*p.z);
  if (p.U) params["U"] = to_json(*p.U);
  if (p.epsilon) params["epsilon"] = *p.epsilon;
  if (p.K) params["K"] = to_json(*p.K);
  if (p.N) params["N"] = *p.N;
  if (p.settle_steps) params["settle_steps"] = *p.settle_steps;
  j["params"] = std::move(params);
  return j;
}

DataRecord record_from_json(const Json& j) {
  constexpr std::string_view what = "data record";
  require_keys(j, {"kind", "scheme", "n", "m", "sample_count", "seed", "S", "H", "params", "meta",
                    "command", "status"},
               what);
  DataRecord rec;
  rec.kind = parse_kind(require(j, "kind", what).get<std::string>());
  rec.scheme = parse_scheme(require(j, "scheme", what).get<std::string>());
  rec.n = require(j, "n", what).get<int>();
  rec.m = require(j, "m", what).get<int>();
  rec.sample_count = require(j, "sample_count", what).get<long>();
  rec.seed = require(j, "seed", what).get<std::uint64_t>();
  rec.S = matrix_from_json(require(j, "S", what), "record.S");
  rec.H = matrix_from_json(require(j, "H", what), "record.H");
  if (j.contains("params")) {
    const Json& p = j.at("params");
    require_keys(p, {"F", "z", "U", "epsilon", "K", "N", "settle_steps"}, "record.params");
    if (p.contains("F")) rec.params.F = matrix_from_json(p.at("F"), "params.F");
    if (p.contains("z")) rec.params.z = vector_from_json(p.at("z"), "params.z");
    if (p.contains("U")) rec.params.U = matrix_from_json(p.at("U"), "params.U");
    if (p.contains("epsilon")) rec.params.epsilon = number(p.at("epsilon"), "params.epsilon");
    if (p.contains("K")) rec.params.K = matrix_from_json(p.at("K"), "params.K");
    if (p.contains("N")) rec.params.N = p.at("N").get<long>();
    if (p.contains("settle_steps")) rec.params.settle_steps = p.at("settle_steps").get<long>();
  }
  try {
    validate_record(rec);
  } catch (const Failure& e) {
    config_error(what, e.what());
  }
  return rec;
}

Json riccati_to_json(const RiccatiSolution& sol) {
  Json j;
  j["X"] = to_json(sol.X);
  j["F"] = to_json(sol.Fstar.F);
  j["P"] = to_json(sol.Pstar);
  j["residual"] = sol.residual;
  j["iterations"] = sol.iterations;
  return j;
}

Json design_to_json(const DesignResult& r) {
  Json j;
  j["F"] = to_json(r.F.F);
  j["objective"] = r.objective;
  j["margin"] = r.margin;
  j["status"] = std::string(status_name(r.solution.status));
  j["P"] = to_json(r.P);
  j["G"] = to_json(r.G);
  j["X"] = to_json(r.X);
  j["iterations"] = r.solution.iterations;
  return j;
}

Json verdict_to_json(const StabilityVerdict& v) {
  Json j;
  j["stable"] = v.stable;
  j["margin"] = v.margin;
  j["status"] = std::string(status_name(v.solution.status));
  j["P"] = to_json(v.P);
  return j;
}

Json certificate_to_json(const CostCertificate& c) {
  Json j;
  j["objective"] = c.value;
  j["status"] = std::string(status_name(c.solution.status));
  j["P"] = to_json(c.P);
  return j;
}

Json trace_to_json(const DpTrace& t) {
  Json j;
  j["iterates"] = t.iterates.size();
  j["residuals"] = t.residuals;
  j["final_P"] = t.iterates.empty() ? Json::array() : to_json(t.final_P());
  j["final_F"] = t.gains.empty() ? Json::array() : to_json(t.final_F().F);
  j["converged"] = t.converged;
  return j;
}

Json mc_to_json(const McReport& r) {
  Json j;
  j["scheme"] = std::string(scheme_name(r.scheme));
  j["N_max"] = r.N_max;
  j["seed"] = r.seed;
  j["checkpoints"] = r.checkpoints;
  j["lambda_min"] = r.lambda_min;
  j["analytic_lambda_min"] = r.analytic_lambda_min;
  if (!r.relative_error.empty()) j["relative_error"] = r.relative_error;
  if (r.mean.size() > 0) j["mean"] = to_json(r.mean);
  j["S"] = to_json(r.S);
  j["convention"] = r.convention;
  return j;
}

Json problem_to_json(const LmiProblem& p) {
  Json j;
  j["d"] = p.dim;
  j["c"] = to_json(p.objective);
  Json blocks = Json::array();
  for (const auto& b : p.blocks) {
    Json bj;
    bj["F0"] = to_json(b.constant);
    Json terms = Json::array();
    for (std::size_t i = 0; i < b.coefficients.size(); ++i) {
      if (b.has_term(i)) terms.push_back(Json{{"i", i}, {"F", to_json(b.coefficients[i])}});
    }
    bj["F"] = std::move(terms);
    blocks.push_back(std::move(bj));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Failure(Signal::kConfig, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Failure(Signal::kConfig, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure(Signal::kConfig, "cannot write " + path.string());
  out << text;
}

std::string trace_csv(const DpTrace& t, const MatrixXd& Fstar) {
  std::ostringstream os;
  os.precision(17);
  const bool with_gain = Fstar.size() > 0;
  os << "iteration,residual" << (with_gain ? ",gain_error" : "") << "\n";
  // Residual k belongs to the iterate it produced.
  const std::size_t offset = t.iterates.size() - t.residuals.size();
  for (std::size_t k = 0; k < t.residuals.size(); ++k) {
    os << k + offset + 1 << "," << t.residuals[k];
    if (with_gain) os << "," << (t.gains[k + offset].F - Fstar).norm();
    os << "\n";
  }
  return os.str();
}

std::string mc_csv(const McReport& r) {
  std::ostringstream os;
  os.precision(17);
  const bool with_error = !r.relative_error.empty();
  os << "N,lambda_min" << (with_error ? ",relative_error" : "") << "\n";
  for (std::size_t i = 0; i < r.lambda_min.size(); ++i) {
    os << r.checkpoints[i] << "," << r.lambda_min[i];
    if (with_error) os << "," << r.relative_error[i];
    os << "\n";
  }
  return os.str();
}

}  // namespace ddctl
