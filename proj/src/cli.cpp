#include "lowrank/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowrank/aca.hpp"
#include "lowrank/eim.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/functional.hpp"
#include "lowrank/gappy.hpp"
#include "lowrank/json_io.hpp"
#include "lowrank/kernels.hpp"
#include "lowrank/pod.hpp"
#include "lowrank/sampling.hpp"
#include "lowrank/verify.hpp"

namespace lowrank {

namespace {

constexpr const char* kToolVersion = "0.1.0";

enum class LogLevel { quiet = 0, info = 1, debug = 2 };
LogLevel g_log_level = LogLevel::info;

void log_info(const std::string& msg) {
  if (g_log_level >= LogLevel::info) std::fprintf(stderr, "[lowrank] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (g_log_level >= LogLevel::debug)
    std::fprintf(stderr, "[lowrank:debug] %s\n", msg.c_str());
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat key=value configuration files: each key supplies a default for the
// flag --key of the invoked subcommand. Explicit command-line flags win, so
// a file value is appended only when its flag is absent from the input.
std::vector<std::string> expand_config_args(const std::vector<std::string>& args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw io_error("cannot open '" + config_path + "' for reading");

  std::vector<std::string> expanded = args;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw contract_error("config file " + config_path + " line " +
                           std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key == "config") continue;
    const std::string flag = "--" + key;
    bool given = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (!given) expanded.push_back(flag + "=" + value);
  }
  return expanded;
}

// ---------------------------------------------------------------------------
// Snapshot sources shared by decompose / compare / report.

struct SourceOptions {
  std::string input;
  std::string family;
  std::size_t mx = 20;
  std::size_t ny = 20;
  std::uint64_t seed = 1;
  std::size_t family_rank = 3;
  double noise = 1e-3;
};

void add_source_flags(CLI::App* cmd, SourceOptions& src) {
  auto* input = cmd->add_option("--input", src.input, "CSV snapshot matrix");
  auto* family = cmd->add_option(
      "--family", src.family,
      "built-in family: product, rank_k, cauchy, analytic, exp_abs, random");
  input->excludes(family);
  family->excludes(input);
  cmd->add_option("--mx", src.mx, "x-grid size for family sources")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--ny", src.ny, "y-grid size for family sources")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", src.seed, "seed for the random family");
  cmd->add_option("--family-rank", src.family_rank,
                  "construction rank of the random family")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--noise", src.noise, "noise amplitude of the random family")
      ->check(CLI::NonNegativeNumber);
}

SnapshotMatrix load_source(const SourceOptions& src) {
  if (!src.input.empty()) {
    log_info("reading snapshots from " + src.input);
    return read_matrix_csv(src.input);
  }
  if (src.family.empty()) {
    throw contract_error("exactly one of --input or --family is required");
  }
  if (src.family == "random") {
    log_info("building random family, seed " + std::to_string(src.seed));
    return random_low_rank(src.mx, src.ny, src.family_rank, src.noise, src.seed);
  }
  // The singular kernels live on [0,1]; the smooth comparison kernels use the
  // symmetric interval.
  const bool unit_domain = src.family == "analytic" || src.family == "cauchy";
  const double lo = unit_domain ? 0.0 : -1.0;
  log_info("building family " + src.family);
  return materialize(builtin_family(src.family), uniform_grid(lo, 1.0, src.mx),
                     uniform_grid(lo, 1.0, src.ny));
}

nlohmann::json source_config(const SourceOptions& src) {
  nlohmann::json cfg;
  if (!src.input.empty()) {
    cfg["input"] = src.input;
  } else {
    cfg["family"] = src.family;
    cfg["mx"] = src.mx;
    cfg["ny"] = src.ny;
    if (src.family == "random") {
      cfg["family_rank"] = src.family_rank;
      cfg["noise"] = src.noise;
    }
  }
  cfg["seed"] = src.seed;
  return cfg;
}

SourceOptions source_from_config(const nlohmann::json& cfg) {
  SourceOptions src;
  if (cfg.contains("input")) {
    src.input = cfg.at("input").get<std::string>();
    return src;
  }
  src.family = cfg.at("family").get<std::string>();
  src.mx = cfg.at("mx").get<std::size_t>();
  src.ny = cfg.at("ny").get<std::size_t>();
  if (cfg.contains("seed")) src.seed = cfg.at("seed").get<std::uint64_t>();
  if (cfg.contains("family_rank"))
    src.family_rank = cfg.at("family_rank").get<std::size_t>();
  if (cfg.contains("noise")) src.noise = cfg.at("noise").get<double>();
  return src;
}

// ---------------------------------------------------------------------------
// JSON fragments.

nlohmann::json grid_json(const Grid& g) {
  return nlohmann::json{{"points", g.points}, {"measure", g.domain_measure}};
}

Grid grid_from_json(const nlohmann::json& j) {
  return Grid(j.at("points").get<std::vector<double>>(),
              j.at("measure").get<double>());
}

nlohmann::json grids_json(const SnapshotMatrix& s) {
  return nlohmann::json{{"x", grid_json(s.grid_x)}, {"y", grid_json(s.grid_y)}};
}

nlohmann::json matrix_json(const DenseMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

PNorm pnorm_from_string(const std::string& p) {
  if (p == "1") return PNorm::one;
  if (p == "2") return PNorm::two;
  if (p == "inf") return PNorm::inf;
  throw contract_error("--p must be one of 1, 2, inf");
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeOptions {
  SourceOptions src;
  std::string method;
  std::string pivot = "global";
  std::string p = "inf";
  double tol = 1e-10;
  std::size_t rank = 0;  // 0 = no cap
  std::string out;
  std::string config_file;
  bool tol_given = false;
  bool rank_given = false;
};

int run_decompose(const DecomposeOptions& opt) {
  const SnapshotMatrix s = load_source(opt.src);
  log_debug("snapshots: " + std::to_string(s.rows()) + " x " +
            std::to_string(s.cols()) + ", weight " + format_double(s.weight));
  const std::size_t cap = opt.rank == 0 ? kNoRankCap : opt.rank;

  nlohmann::json config = source_config(opt.src);
  config["version"] = kToolVersion;
  config["command"] = "decompose";
  config["method"] = opt.method;
  config["out"] = opt.out;
  if (!opt.config_file.empty()) config["config_file"] = opt.config_file;

  nlohmann::json factors;
  nlohmann::json history = nlohmann::json::array();

  if (opt.method == "pod") {
    if (opt.rank_given == opt.tol_given) {
      throw contract_error("pod needs exactly one of --rank or --tol");
    }
    config[opt.rank_given ? "rank" : "tol"] =
        opt.rank_given ? nlohmann::json(opt.rank) : nlohmann::json(opt.tol);
    const PodTruncation trunc = opt.rank_given ? PodTruncation::rank(opt.rank)
                                               : PodTruncation::energy(opt.tol);
    const PodBasis basis = pod_basis(s, trunc);
    factors["eigenvalues"] = basis.eigenvalues;
    factors["weight"] = basis.weight;
    factors["modes"] = basis.basis;
    // Mean-square projection error with 0, 1, ..., q modes.
    PodBasis partial;
    partial.eigenvalues = basis.eigenvalues;
    partial.weight = basis.weight;
    history.push_back(pod_error(s, partial));
    for (const std::vector<double>& mode : basis.basis) {
      partial.basis.push_back(mode);
      history.push_back(pod_error(s, partial));
    }
    log_info("pod kept " + std::to_string(basis.q()) + " modes");
  } else if (opt.method == "aca") {
    config["pivot"] = opt.pivot;
    config["tol"] = opt.tol;
    if (opt.rank_given) config["rank"] = opt.rank;
    const PivotRule rule =
        opt.pivot == "global" ? PivotRule::global : PivotRule::partial;
    const Aca2Result res = aca2_bivariate(s, opt.tol, rule, cap);
    factors["tau"] = res.cross.tau;
    factors["sigma"] = res.cross.sigma;
    factors["pivot_values"] = res.cross.pivot_values;
    factors["u"] = res.cross.u_vectors;
    factors["v"] = res.cross.v_vectors;
    factors["status"] = to_string(res.cross.status);
    history = res.cross.indicator_history;
    log_info("aca rank " + std::to_string(res.cross.rank()) + ", status " +
             to_string(res.cross.status));
  } else if (opt.method == "eim") {
    config["p"] = opt.p;
    config["tol"] = opt.tol;
    if (opt.rank_given) config["rank"] = opt.rank;
    const EimSystem sys = eim_greedy(s, opt.tol, pnorm_from_string(opt.p), cap);
    factors["points"] = sys.interp_indices;
    factors["samples"] = sys.sample_indices;
    factors["basis"] = sys.basis_h;
    factors["b"] = matrix_json(sys.b);
    factors["status"] = to_string(sys.status);
    history = sys.err_history;
    log_info("eim rank " + std::to_string(sys.q()) + ", status " +
             to_string(sys.status));
  } else if (opt.method == "geim") {
    config["p"] = opt.p;
    config["tol"] = opt.tol;
    if (opt.rank_given) config["rank"] = opt.rank;
    // Command-line dictionary: every nodal evaluation plus the cell average.
    std::vector<Functional> dictionary;
    dictionary.reserve(s.rows() + 1);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      dictionary.push_back(Functional::dirac(i, s.rows()));
    }
    dictionary.push_back(Functional::average(s.rows()));
    const GeimSystem sys =
        geim_greedy(s, dictionary, opt.tol, pnorm_from_string(opt.p), cap);
    nlohmann::json labels = nlohmann::json::array();
    for (std::size_t idx : sys.moment_indices) labels.push_back(dictionary[idx].label);
    factors["moments"] = sys.moment_indices;
    factors["moment_labels"] = labels;
    factors["samples"] = sys.sample_indices;
    factors["basis"] = sys.basis_h;
    factors["b"] = matrix_json(sys.b);
    factors["status"] = to_string(sys.status);
    history = sys.err_history;
    log_info("geim rank " + std::to_string(sys.q()) + ", status " +
             to_string(sys.status));
  } else {
    throw contract_error("unknown method " + opt.method);
  }

  const nlohmann::json artifact = {{"method", opt.method},
                                   {"grids", grids_json(s)},
                                   {"factors", factors},
                                   {"history", history},
                                   {"config", config}};
  write_text_atomic(opt.out, json_to_string(artifact));
  log_info("wrote " + opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
  SourceOptions src;
  std::size_t qmax = 8;
  std::string config_file;
};

int run_compare(const CompareOptions& opt) {
  const SnapshotMatrix s = load_source(opt.src);
  const EquivalenceReport rep = check_equivalence_aca_eim(s, opt.qmax);

  std::printf("steps: %zu\n", rep.steps);
  std::printf("max coefficient gap: %s\n", format_double(rep.max_coefficient_gap).c_str());
  std::printf("max interpolant gap: %s\n", format_double(rep.max_interpolant_gap).c_str());
  for (const std::string& failure : rep.failures) {
    std::printf("divergence: %s\n", failure.c_str());
  }
  std::printf("result: %s\n", rep.passed ? "PASS" : "FAIL");
  return rep.passed ? 0 : 2;
}

// ---------------------------------------------------------------------------
// sensors

struct SensorsOptions {
  std::string basis_path;
  std::string criterion = "cond";
  std::size_t count = 0;
  std::string out;
  std::string config_file;
};

int run_sensors(const SensorsOptions& opt) {
  const nlohmann::json artifact = read_json_file(opt.basis_path);
  const std::string method = artifact.at("method").get<std::string>();
  if (method != "pod" && method != "eim") {
    throw contract_error("sensors needs a pod or eim factorization, got " + method);
  }
  const auto basis_h = artifact.at("factors")
                           .at(method == "pod" ? "modes" : "basis")
                           .get<std::vector<std::vector<double>>>();
  if (basis_h.empty()) {
    throw contract_error("factorization in " + opt.basis_path + " holds no basis");
  }
  const Grid grid = grid_from_json(artifact.at("grids").at("x"));

  SensorPlacement placement;
  if (opt.criterion == "cond") {
    placement = place_sensors_cond(basis_h, grid, opt.count);
  } else {
    // Worst-case training error needs the snapshots; rebuild them from the
    // source description embedded in the factorization artifact.
    const SnapshotMatrix s =
        load_source(source_from_config(artifact.at("config")));
    placement = place_sensors_error(basis_h, s, opt.count, PNorm::two);
  }

  const GappySystem sys =
      make_gappy_system(basis_h, placement.sensors, grid.domain_measure);

  nlohmann::json config;
  config["version"] = kToolVersion;
  config["command"] = "sensors";
  config["basis"] = opt.basis_path;
  config["criterion"] = opt.criterion;
  config["L"] = opt.count;
  config["source"] = artifact.at("config");
  if (!opt.config_file.empty()) config["config_file"] = opt.config_file;

  const nlohmann::json out = {
      {"method", "sensors"},
      {"grids", artifact.at("grids")},
      {"factors",
       {{"criterion", opt.criterion},
        {"sensors", placement.sensors},
        {"gram_cond", sys.gram_cond}}},
      {"history", placement.history},
      {"config", config}};
  write_text_atomic(opt.out, json_to_string(out));
  log_info("wrote " + opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  SourceOptions src;
  std::string methods = "pod,aca_global,aca_partial,eim_inf,eim_2";
  std::size_t qmax = 8;
  std::string out;
  std::string config_file;
};

int run_report(const ReportOptions& opt) {
  const SnapshotMatrix s = load_source(opt.src);

  std::vector<DecayMethod> methods;
  std::string token;
  for (char c : opt.methods + ",") {
    if (c == ',') {
      if (!token.empty()) methods.push_back(decay_method_from_string(token));
      token.clear();
    } else {
      token += c;
    }
  }

  const DecayReport rep = decay_report(s, methods, opt.qmax);

  std::string csv = "q,floor";
  for (DecayMethod m : rep.methods) csv += std::string(",") + to_string(m);
  csv += "\n";
  for (const DecayRow& row : rep.rows) {
    csv += std::to_string(row.q);
    csv += ",";
    csv += format_double(row.floor);
    for (double err : row.errors) {
      csv += ",";
      csv += format_double(err);
    }
    csv += "\n";
  }
  write_text_atomic(opt.out, csv);
  log_info("wrote " + opt.out);
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int cli_run(int argc, char** argv) {
  g_log_level = LogLevel::info;
  if (const char* env = std::getenv("LOWRANK_LOG")) {
    const std::string level = env;
    if (level == "quiet") {
      g_log_level = LogLevel::quiet;
    } else if (level == "info") {
      g_log_level = LogLevel::info;
    } else if (level == "debug") {
      g_log_level = LogLevel::debug;
    } else {
      std::fprintf(stderr, "LOWRANK_LOG must be quiet, info or debug, got '%s'\n",
                   env);
      return 1;
    }
  }

  CLI::App app{"sparse and low-rank representations of sampled bivariate data"};
  app.require_subcommand(1);

  DecomposeOptions dec;
  CLI::App* decompose =
      app.add_subcommand("decompose", "factor a snapshot matrix and persist it");
  decompose->add_option("--method", dec.method, "pod | aca | eim | geim")
      ->required()
      ->check(CLI::IsMember({"pod", "aca", "eim", "geim"}));
  decompose->add_option("--pivot", dec.pivot, "aca pivot rule")
      ->check(CLI::IsMember({"global", "partial"}));
  decompose->add_option("--p", dec.p, "residual norm for eim/geim")
      ->check(CLI::IsMember({"1", "2", "inf"}));
  auto* tol_opt = decompose->add_option("--tol", dec.tol, "stopping tolerance");
  auto* rank_opt = decompose->add_option("--rank", dec.rank, "rank cap")
                       ->check(CLI::PositiveNumber);
  add_source_flags(decompose, dec.src);
  decompose->add_option("--out", dec.out, "output JSON path")->required();
  decompose->add_option("--config", dec.config_file,
                        "flat key=value defaults; explicit flags win");

  CompareOptions cmp;
  CLI::App* compare = app.add_subcommand(
      "compare", "check that global cross pivoting and sup-norm greedy "
                 "interpolation walk identical paths");
  add_source_flags(compare, cmp.src);
  compare->add_option("--qmax", cmp.qmax, "maximal rank to walk")
      ->check(CLI::PositiveNumber);
  compare->add_option("--config", cmp.config_file,
                      "flat key=value defaults; explicit flags win");

  SensorsOptions sen;
  CLI::App* sensors =
      app.add_subcommand("sensors", "greedy sensor placement for a stored basis");
  sensors->add_option("--basis", sen.basis_path, "pod/eim factorization JSON")
      ->required();
  sensors->add_option("--criterion", sen.criterion, "cond | error")
      ->check(CLI::IsMember({"cond", "error"}));
  sensors->add_option("--L", sen.count, "number of sensors")
      ->required()
      ->check(CLI::PositiveNumber);
  sensors->add_option("--out", sen.out, "output JSON path")->required();
  sensors->add_option("--config", sen.config_file,
                      "flat key=value defaults; explicit flags win");

  ReportOptions rep;
  CLI::App* report =
      app.add_subcommand("report", "error decay table across methods (CSV)");
  add_source_flags(report, rep.src);
  report->add_option("--methods", rep.methods,
                     "comma list of pod, aca_global, aca_partial, eim_inf, eim_2");
  report->add_option("--qmax", rep.qmax, "table depth")->check(CLI::PositiveNumber);
  report->add_option("--out", rep.out, "output CSV path")->required();
  report->add_option("--config", rep.config_file,
                     "flat key=value defaults; explicit flags win");

  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  try {
    args = expand_config_args(args);
  } catch (const io_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const contract_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  }
  std::vector<const char*> cargv;
  cargv.reserve(args.size() + 1);
  cargv.push_back(argc > 0 ? argv[0] : "lowrank");
  for (const std::string& a : args) cargv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  dec.tol_given = tol_opt->count() > 0;
  dec.rank_given = rank_opt->count() > 0;

  try {
    if (decompose->parsed()) return run_decompose(dec);
    if (compare->parsed()) return run_compare(cmp);
    if (sensors->parsed()) return run_sensors(sen);
    return run_report(rep);
  } catch (const io_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const contract_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace lowrank
