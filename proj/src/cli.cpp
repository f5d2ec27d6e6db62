#include "ddctl/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ddctl/errors.hpp"

namespace ddctl::cli {

namespace fs = std::filesystem;

namespace {

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string csv_path;
  // gen only.
  std::optional<int> n;
  std::optional<int> m;
  bool stable = false;
  std::optional<double> cap;
};

// Per-run state shared by the handlers.
struct Context {
  Json config;
  fs::path base;
  std::uint64_t seed = 0;
  std::string csv;
  /// Result fields that survive a domain failure.
  Json partial;
};

[[noreturn]] void config_error(const std::string& msg) { throw Failure(Signal::kConfig, msg); }

template <class T>
T get(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    config_error("key '" + key + "' has the wrong type");
  }
}

MatrixXd get_matrix(const Json& j, const std::string& key, const MatrixXd& fallback) {
  return j.contains(key) ? matrix_from_json(j.at(key), key) : fallback;
}

VectorXd get_vector(const Json& j, const std::string& key, const VectorXd& fallback) {
  return j.contains(key) ? vector_from_json(j.at(key), key) : fallback;
}

// A string names a JSON file relative to the config file; an object is inline.
Json resolve(const Context& ctx, const Json& ref, std::string_view what) {
  if (ref.is_string()) {
    fs::path p = ref.get<std::string>();
    if (p.is_relative()) p = ctx.base / p;
    return read_json(p);
  }
  if (ref.is_object()) return ref;
  config_error(std::string(what) + " must be a path or an object");
}

// A config holding the system record itself is read as {"system": config}.
Json normalized(const Json& config) {
  if (config.is_object() && config.contains("A")) return Json{{"system", config}};
  return config;
}

struct SystemSource {
  LtiSystem sys;
  Json json;
};

std::optional<SystemSource> load_system(const Context& ctx) {
  if (!ctx.config.contains("system")) return std::nullopt;
  Json j = resolve(ctx, ctx.config.at("system"), "system");
  LtiSystem sys = system_from_json(j);
  return SystemSource{std::move(sys), std::move(j)};
}

SystemSource need_system(const Context& ctx) {
  auto s = load_system(ctx);
  if (!s) config_error("config needs a \"system\"");
  return std::move(*s);
}

// Weights from the config, else from the system file, else identity.
CostWeights load_weights(const Context& ctx, const std::optional<SystemSource>& src, int n, int m) {
  if (ctx.config.contains("Q") || ctx.config.contains("R")) {
    return weights_from_json(ctx.config, n, m);
  }
  if (src) return weights_from_json(src->json, n, m);
  return CostWeights::identity(n, m);
}

SolverOptions solver_options(const Json& j) {
  SolverOptions o;
  if (j.is_null()) return o;
  require_keys(j, {"feas_tol", "gap_tol", "max_iter", "infeas_tol", "accept_tol"}, "solver");
  o.feas_tol = get(j, "feas_tol", o.feas_tol);
  o.gap_tol = get(j, "gap_tol", o.gap_tol);
  o.max_iter = get(j, "max_iter", o.max_iter);
  o.infeas_tol = get(j, "infeas_tol", o.infeas_tol);
  o.accept_tol = get(j, "accept_tol", o.accept_tol);
  return o;
}

DesignOptions design_options(const Json& cfg) {
  DesignOptions o;
  if (cfg.contains("options")) {
    const Json& j = cfg.at("options");
    require_keys(j, {"strict_tol", "epsilon", "max_condition", "solver"}, "options");
    o.strict_tol = get(j, "strict_tol", o.strict_tol);
    o.epsilon = get(j, "epsilon", o.epsilon);
    o.max_condition = get(j, "max_condition", o.max_condition);
    if (j.contains("solver")) o.solver = solver_options(j.at("solver"));
  }
  o.epsilon = get(cfg, "epsilon", o.epsilon);
  return o;
}

const std::vector<std::string> kCollectKeys = {"scheme", "F",          "N",       "z",
                                               "U",      "epsilon",    "K",       "max_steps",
                                               "settle_max", "threads"};

DataRecord collect_with(const LtiSystem& sys, const Json& c, std::uint64_t seed) {
  require_keys(c, kCollectKeys, "collection");
  const int n = sys.n();
  const int m = sys.m();
  const Plant plant(sys);
  const Scheme scheme = parse_scheme(get<std::string>(c, "scheme", "restarting"));
  if (scheme == Scheme::kExploringStarts) {
    if (!c.contains("F")) config_error("exploring-starts collection needs \"F\"");
    return on_collect(plant, Gain{matrix_from_json(c.at("F"), "F")}, get(c, "N", n + m + 2), seed);
  }
  ExcitationSpec spec;
  spec.U = get_matrix(c, "U", MatrixXd::Identity(m, m));
  spec.z = get_vector(c, "z", VectorXd::Ones(n));
  spec.epsilon = get(c, "epsilon", spec.epsilon);
  if (c.contains("K")) spec.K = matrix_from_json(c.at("K"), "K");
  switch (scheme) {
    case Scheme::kExploration:
      return off_collect(plant, spec, get(c, "max_steps", 100000L), seed);
    case Scheme::kRestarting:
      return off_collect_restart(plant, spec, get(c, "N", 200L), seed, get(c, "threads", 0));
    case Scheme::kPeriodicExcitation:
      return off_collect_periodic(plant, spec, get(c, "N", 200L), get(c, "settle_max", 100000L),
                                  seed);
    case Scheme::kExploringStarts: break;
  }
  config_error("unsupported scheme");
}

struct DataSource {
  DataRecord rec;
  std::optional<SystemSource> system;
};

// "data" (a record) or "system" plus optional "collection" parameters.
DataSource load_data(const Context& ctx, DataKind kind) {
  DataSource out;
  out.system = load_system(ctx);
  if (ctx.config.contains("data")) {
    out.rec = record_from_json(resolve(ctx, ctx.config.at("data"), "data"));
    return out;
  }
  if (!out.system) config_error("config needs \"data\" or \"system\"");
  Json c = ctx.config.contains("collection") ? ctx.config.at("collection") : Json::object();
  if (kind == DataKind::kOnPolicy && !c.contains("scheme")) c["scheme"] = "exploring-starts";
  out.rec = collect_with(out.system->sys, c, ctx.seed);
  return out;
}

const std::vector<std::string> kDataKeys = {"data", "system", "collection", "options",
                                            "seed", "Q",      "R",          "epsilon"};

Json oracle_gain(const LtiSystem& sys, const Gain& F) {
  Json j;
  j["closed_loop_spectral_radius"] = spectral_radius(sys.A() + sys.B() * F.F);
  return j;
}

// --- handlers ---------------------------------------------------------------

Json cmd_gen(Context& ctx) {
  require_keys(ctx.config, {"n", "m", "stable_open_loop", "spectral_radius_cap", "seed"}, "gen");
  GenOptions opts;
  opts.stable_open_loop = get(ctx.config, "stable_open_loop", false);
  opts.spectral_radius_cap = get(ctx.config, "spectral_radius_cap", opts.spectral_radius_cap);
  const int n = get(ctx.config, "n", 0);
  const int m = get(ctx.config, "m", 0);
  if (n < 1 || m < 1) config_error("gen needs n >= 1 and m >= 1");
  const GeneratedSystem g = gen_system(n, m, opts, ctx.seed);
  return system_to_json(g.sys, g.weights);
}

Json cmd_oracle(Context& ctx) {
  require_keys(ctx.config, {"system", "Q", "R", "seed"}, "oracle");
  const auto src = need_system(ctx);
  const CostWeights w = load_weights(ctx, src, src.sys.n(), src.sys.m());
  const RiccatiSolution sol = solve_dare(src.sys, w);
  Json j = riccati_to_json(sol);
  j["cost_index"] = cost_index(src.sys, w, sol.Fstar);
  j["augmented_cost"] = augmented_cost(src.sys, w, sol.Fstar);
  return j;
}

Json cmd_simulate(Context& ctx) {
  require_keys(ctx.config, {"system", "x0", "steps", "policy", "seed", "final_input"}, "simulate");
  const auto src = need_system(ctx);
  const int n = src.sys.n();
  const int m = src.sys.m();
  const Json pj = ctx.config.contains("policy") ? ctx.config.at("policy") : Json::object();
  require_keys(pj, {"type", "F", "K", "U", "inputs"}, "policy");
  const std::string type = get<std::string>(pj, "type", "noise");
  InputPolicy policy;
  if (type == "gain") {
    policy = policy::FixedGain{get_matrix(pj, "F", MatrixXd::Zero(m, n))};
  } else if (type == "gain-noise") {
    policy = policy::GainPlusNoise{get_matrix(pj, "K", MatrixXd::Zero(m, n)),
                                   get_matrix(pj, "U", MatrixXd::Identity(m, m))};
  } else if (type == "noise") {
    policy = policy::PureNoise{get_matrix(pj, "U", MatrixXd::Identity(m, m))};
  } else if (type == "prescribed") {
    const MatrixXd U = get_matrix(pj, "inputs", MatrixXd(0, 0));
    policy::Prescribed p;
    for (Eigen::Index k = 0; k < U.rows(); ++k) p.inputs.push_back(U.row(k).transpose());
    policy = std::move(p);
  } else {
    config_error("unknown policy type '" + type + "'");
  }
  RandomStream rng(ctx.seed);
  const Trajectory t = simulate(src.sys, get_vector(ctx.config, "x0", VectorXd::Zero(n)), policy,
                                get(ctx.config, "steps", 10), rng,
                                get(ctx.config, "final_input", false));
  Json states = Json::array();
  Json inputs = Json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "k";
  for (int i = 0; i < n; ++i) csv << ",x" << i;
  for (int i = 0; i < m; ++i) csv << ",u" << i;
  csv << "\n";
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    states.push_back(to_json(t.states[k]));
    csv << k;
    for (int i = 0; i < n; ++i) csv << "," << t.states[k](i);
    if (k < t.inputs.size()) {
      inputs.push_back(to_json(t.inputs[k]));
      for (int i = 0; i < m; ++i) csv << "," << t.inputs[k](i);
    }
    csv << "\n";
  }
  ctx.csv = csv.str();
  Json j;
  j["policy"] = t.policy;
  j["states"] = std::move(states);
  j["inputs"] = std::move(inputs);
  return j;
}

// Collection parameters either at the top level or under "collection", as
// for the commands that collect on the fly.
Json cmd_collect(Context& ctx) {
  const auto src = need_system(ctx);
  Json c = ctx.config;
  if (c.contains("collection")) {
    require_keys(c, {"system", "seed", "collection"}, "collect");
    c = c.at("collection");
  } else {
    std::vector<std::string> keys = kCollectKeys;
    keys.insert(keys.end(), {"system", "seed"});
    require_keys(c, keys, "collect");
    c.erase("system");
    c.erase("seed");
  }
  return record_to_json(collect_with(src.sys, c, ctx.seed));
}

Json cmd_eval_stability(Context& ctx) {
  require_keys(ctx.config, kDataKeys, "eval-stability");
  const DataSource ds = load_data(ctx, DataKind::kOnPolicy);
  Json j = verdict_to_json(eval_stability(ds.rec, design_options(ctx.config)));
  if (ds.system && ds.rec.params.F) {
    j["oracle"] = oracle_gain(ds.system->sys, Gain{*ds.rec.params.F});
  }
  return j;
}

Json cmd_eval_cost(Context& ctx) {
  require_keys(ctx.config, kDataKeys, "eval-cost");
  const DataSource ds = load_data(ctx, DataKind::kOnPolicy);
  const CostWeights w = load_weights(ctx, ds.system, ds.rec.n, ds.rec.m);
  Json j = certificate_to_json(eval_cost(ds.rec, w, design_options(ctx.config)));
  if (ds.system && ds.rec.params.F) {
    j["oracle"] = oracle_gain(ds.system->sys, Gain{*ds.rec.params.F});
    j["oracle"]["augmented_cost"] = augmented_cost(ds.system->sys, w, Gain{*ds.rec.params.F});
  }
  return j;
}

Json cmd_design_stab(Context& ctx) {
  require_keys(ctx.config, kDataKeys, "design-stab");
  const DataSource ds = load_data(ctx, DataKind::kOffPolicy);
  const DesignResult r = design_stabilizing(ds.rec, design_options(ctx.config));
  Json j = design_to_json(r);
  if (ds.system) j["oracle"] = oracle_gain(ds.system->sys, r.F);
  return j;
}

Json gain_check(const LtiSystem& sys, const CostWeights& w, const Gain& F) {
  const RiccatiSolution sol = solve_dare(sys, w);
  Json j = oracle_gain(sys, F);
  j["F_star"] = to_json(sol.Fstar.F);
  const double err = (F.F - sol.Fstar.F).norm();
  j["gain_error"] = err;
  j["relative_gain_error"] = err / (1.0 + sol.Fstar.F.norm());
  return j;
}

Json cmd_design_lqr(Context& ctx) {
  require_keys(ctx.config, kDataKeys, "design-lqr");
  const DataSource ds = load_data(ctx, DataKind::kOffPolicy);
  const CostWeights w = load_weights(ctx, ds.system, ds.rec.n, ds.rec.m);
  const DesignResult r = design_lqr(ds.rec, w, design_options(ctx.config));
  Json j = design_to_json(r);
  if (ds.system) j["oracle"] = gain_check(ds.system->sys, w, r.F);
  return j;
}

Json trace_result(Context& ctx, const DpTrace& t, const std::optional<SystemSource>& src,
                  const CostWeights& w) {
  Json j = trace_to_json(t);
  MatrixXd Fstar;
  if (src && !t.gains.empty()) {
    j["oracle"] = gain_check(src->sys, w, t.final_F());
    Fstar = solve_dare(src->sys, w).Fstar.F;
  }
  ctx.csv = trace_csv(t, Fstar);
  if (!t.converged) {
    ctx.partial = j;
    throw Failure(Signal::kNonConvergence, "stopping rule not met within max_iter",
                  t.residuals.empty() ? std::nullopt : std::optional<double>(t.residuals.back()));
  }
  return j;
}

Json cmd_vi(Context& ctx) {
  std::vector<std::string> keys = kDataKeys;
  keys.insert(keys.end(), {"eps_stop", "max_iter"});
  require_keys(ctx.config, keys, "vi");
  const DataSource ds = load_data(ctx, DataKind::kOffPolicy);
  const CostWeights w = load_weights(ctx, ds.system, ds.rec.n, ds.rec.m);
  ViOptions o;
  o.eps_stop = get(ctx.config, "eps_stop", o.eps_stop);
  o.max_iter = get(ctx.config, "max_iter", o.max_iter);
  return trace_result(ctx, value_iteration(ds.rec, w, o), ds.system, w);
}

Json cmd_pi(Context& ctx) {
  require_keys(ctx.config,
               {"system", "Q", "R", "F0", "N", "eps_stop", "max_iter", "orientation", "seed"}, "pi");
  const auto src = need_system(ctx);
  const int n = src.sys.n();
  const int m = src.sys.m();
  const CostWeights w = load_weights(ctx, src, n, m);
  PiOptions o;
  o.eps_stop = get(ctx.config, "eps_stop", o.eps_stop);
  o.max_iter = get(ctx.config, "max_iter", o.max_iter);
  const std::string orient = get<std::string>(ctx.config, "orientation", "q-bellman");
  if (orient == "printed") {
    o.orientation = Orientation::kPrinted;
  } else if (orient != "q-bellman") {
    config_error("orientation must be \"q-bellman\" or \"printed\"");
  }
  const Gain F0{get_matrix(ctx.config, "F0", MatrixXd::Zero(m, n))};
  const Collector collect = on_policy_collector(Plant(src.sys), get(ctx.config, "N", 0), ctx.seed);
  return trace_result(ctx, policy_iteration(collect, w, F0, o), src, w);
}

Json cmd_mc(Context& ctx) {
  require_keys(ctx.config,
               {"system", "scheme", "z", "U", "epsilon", "K", "N_max", "checkpoints", "seed",
                "settle_max", "threads"},
               "mc-validity");
  const auto src = need_system(ctx);
  const int n = src.sys.n();
  const int m = src.sys.m();
  McConfig c;
  c.scheme = parse_scheme(get<std::string>(ctx.config, "scheme", "restarting"));
  c.spec.U = get_matrix(ctx.config, "U", MatrixXd::Identity(m, m));
  c.spec.z = get_vector(ctx.config, "z", VectorXd::Ones(n));
  c.spec.epsilon = get(ctx.config, "epsilon", c.spec.epsilon);
  if (ctx.config.contains("K")) c.spec.K = matrix_from_json(ctx.config.at("K"), "K");
  c.N_max = get(ctx.config, "N_max", c.N_max);
  c.checkpoints = get(ctx.config, "checkpoints", std::vector<long>{});
  c.seed = ctx.seed;
  c.settle_max = get(ctx.config, "settle_max", c.settle_max);
  c.threads = get(ctx.config, "threads", 0);
  const McReport r = mc_validity(src.sys, c);
  ctx.csv = mc_csv(r);
  return mc_to_json(r);
}

using Handler = Json (*)(Context&);

struct Command {
  const char* name;
  const char* help;
  Handler handler;
};

const Command kCommands[] = {
    {"gen", "Generate a random controllable system with weights", cmd_gen},
    {"oracle", "Model-based Riccati solution", cmd_oracle},
    {"simulate", "Simulate a trajectory", cmd_simulate},
    {"collect", "Collect trajectory data (S, H)", cmd_collect},
    {"eval-stability", "Data-driven stability test of the data policy", cmd_eval_stability},
    {"eval-cost", "Data-driven cost of the data policy", cmd_eval_cost},
    {"design-stab", "Data-driven stabilizing gain", cmd_design_stab},
    {"design-lqr", "Data-driven LQR gain", cmd_design_lqr},
    {"pi", "Data-driven policy iteration", cmd_pi},
    {"vi", "Data-driven value iteration", cmd_vi},
    {"mc-validity", "Monte Carlo validity study of the restart and periodic schemes", cmd_mc},
};

void emit(const Invocation& inv, const Json& result, std::ostream& out) {
  const std::string text = dump(result);
  if (inv.out_path.empty()) {
    out << text;
  } else {
    write_text(inv.out_path, text);
  }
}

}  // namespace

std::string config_hash(const Json& config) {
  const std::string canonical = nlohmann::json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-driven LQR design and evaluation", "ddctl"};
  app.require_subcommand(1);
  Invocation inv;
  for (const Command& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", inv.config_path, "Config JSON");
    sub->add_option("--seed", inv.seed, "Seed; overrides the config");
    sub->add_option("--out", inv.out_path, "Result JSON (stdout when omitted)");
    sub->add_option("--csv", inv.csv_path, "Per-iteration or per-step CSV");
    if (std::string_view(c.name) == "gen") {
      sub->add_option("--n", inv.n, "State dimension");
      sub->add_option("--m", inv.m, "Input dimension");
      sub->add_flag("--stable", inv.stable, "Rescale A to a stable open loop");
      sub->add_option("--cap", inv.cap, "Spectral radius cap with --stable");
    }
    sub->callback([&inv, name = c.name] { inv.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Context ctx;
  Json result;
  try {
    try {
      Json config = Json::object();
      if (!inv.config_path.empty()) {
        config = read_json(inv.config_path);
        ctx.base = fs::path(inv.config_path).parent_path();
      }
      if (inv.n) config["n"] = *inv.n;
      if (inv.m) config["m"] = *inv.m;
      if (inv.stable) config["stable_open_loop"] = true;
      if (inv.cap) config["spectral_radius_cap"] = *inv.cap;
      if (!config.is_object()) config_error("config must be a JSON object");
      ctx.config = inv.command == "collect" || inv.command == "gen" ? config : normalized(config);
      ctx.seed = inv.seed ? *inv.seed : get<std::uint64_t>(ctx.config, "seed", 0);
      const Json meta = {{"seed", ctx.seed},
                         {"config_hash", config_hash(config)},
                         {"version", std::string(kVersion)}};
      const Command* cmd = nullptr;
      for (const Command& c : kCommands) {
        if (inv.command == c.name) cmd = &c;
      }
      result = Json::object();
      result["command"] = inv.command;
      try {
        Json body = cmd->handler(ctx);
        result["status"] = body.contains("status") ? body["status"] : Json("ok");
        for (auto& [k, v] : body.items()) {
          if (k != "status") result[k] = v;
        }
        result["meta"] = meta;
      } catch (const Failure& f) {
        if (f.signal() == Signal::kConfig) throw;
        result["status"] = std::string(signal_name(f.signal()));
        result["message"] = f.what();
        if (ctx.partial.is_object()) {
          for (auto& [k, v] : ctx.partial.items()) result[k] = v;
        }
        if (f.value()) result["value"] = *f.value();
        result["meta"] = meta;
        emit(inv, result, out);
        if (!inv.csv_path.empty() && !ctx.csv.empty()) write_text(inv.csv_path, ctx.csv);
        err << "ddctl " << inv.command << ": " << signal_name(f.signal()) << ": " << f.what()
            << "\n";
        return 1;
      }
    } catch (const Json::exception& e) {
      config_error(e.what());
    }
    emit(inv, result, out);
    if (!inv.csv_path.empty()) write_text(inv.csv_path, ctx.csv);
    return 0;
  } catch (const Failure& f) {
    err << "ddctl: " << f.what() << "\n";
    return 2;
  }
}

}  // namespace ddctl::cli
