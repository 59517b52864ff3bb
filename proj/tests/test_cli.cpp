#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "lowrank/cli.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/json_io.hpp"
#include "lowrank/sampling.hpp"
#include "lowrank/verify.hpp"

namespace {

std::string g_cli_binary;  // real executable, supplied by the test driver
std::filesystem::path g_tmp;

int main_impl(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (argv[i][0] != '-') {
      g_cli_binary = argv[i];
      break;
    }
  }
  setenv("LOWRANK_LOG", "quiet", 1);
  g_tmp = std::filesystem::current_path() / "cli_test_tmp";
  std::filesystem::remove_all(g_tmp);
  std::filesystem::create_directories(g_tmp);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}

std::string tmp_path(const std::string& name) { return (g_tmp / name).string(); }

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"lowrank"};
  storage.insert(storage.end(), args);
  std::vector<char*> argv;
  argv.reserve(storage.size());
  for (std::string& s : storage) argv.push_back(s.data());
  return lowrank::cli_run(static_cast<int>(argv.size()), argv.data());
}

int run_process(const std::string& args) {
  const std::string cmd = g_cli_binary + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::string cell;
  rows.emplace_back();
  for (char c : text) {
    if (c == ',') {
      rows.back().push_back(cell);
      cell.clear();
    } else if (c == '\n') {
      rows.back().push_back(cell);
      cell.clear();
      rows.emplace_back();
    } else {
      cell += c;
    }
  }
  if (rows.back().empty() || (rows.back().size() == 1 && rows.back()[0].empty()))
    rows.pop_back();
  return rows;
}

}  // namespace

using lowrank::json_to_string;
using lowrank::read_json_file;
using lowrank::write_text_atomic;

TEST_CASE("json writer: sorted keys, inline scalar arrays, stable output") {
  nlohmann::json j;
  j["zeta"] = 1;
  j["alpha"] = nlohmann::json::array({1.5, 2.0, 3.25});
  j["mid"] = nlohmann::json{{"b", true}, {"a", nullptr}, {"s", "he\"llo"}};
  j["nested"] = nlohmann::json::array({nlohmann::json::array({1.0, 2.0})});

  const std::string text = json_to_string(j);
  CHECK(text == json_to_string(j));  // same value, same bytes
  CHECK(text.back() == '\n');
  // Alphabetical member order regardless of insertion order.
  CHECK(text.find("\"alpha\"") < text.find("\"mid\""));
  CHECK(text.find("\"mid\"") < text.find("\"nested\""));
  CHECK(text.find("\"nested\"") < text.find("\"zeta\""));
  // Scalar arrays stay on a single line.
  CHECK(text.find("[1.5, 2, 3.25]") != std::string::npos);
  // String escaping survives.
  CHECK(text.find("he\\\"llo") != std::string::npos);
}

TEST_CASE("json writer: doubles round-trip through 17 significant digits") {
  const std::vector<double> values = {0.1,
                                      1.0 / 3.0,
                                      6.02214076e23,
                                      -2.2250738585072014e-308,
                                      5e-324,
                                      123456789.123456789};
  nlohmann::json j;
  j["v"] = values;
  const nlohmann::json back = nlohmann::json::parse(json_to_string(j));
  const auto parsed = back.at("v").get<std::vector<double>>();
  REQUIRE(parsed.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(parsed[i] == values[i]);
}

TEST_CASE("json writer: non-finite numbers become tagged strings") {
  nlohmann::json j;
  j["a"] = std::numeric_limits<double>::infinity();
  j["b"] = -std::numeric_limits<double>::infinity();
  j["c"] = std::numeric_limits<double>::quiet_NaN();
  const std::string text = json_to_string(j);
  CHECK(text.find("\"inf\"") != std::string::npos);
  CHECK(text.find("\"-inf\"") != std::string::npos);
  CHECK(text.find("\"nan\"") != std::string::npos);
  const nlohmann::json reparsed = nlohmann::json::parse(text);
  CHECK(reparsed.at("a") == "inf");
}

TEST_CASE("atomic write and json read round-trip; io errors surface") {
  const std::string path = tmp_path("roundtrip.json");
  nlohmann::json j = {{"x", 1.25}, {"y", "z"}};
  write_text_atomic(path, json_to_string(j));
  CHECK(read_json_file(path) == j);
  CHECK(!std::filesystem::exists(path + ".tmp"));

  CHECK_THROWS_AS(read_json_file(tmp_path("absent.json")), lowrank::io_error);
  write_text_atomic(tmp_path("broken.json"), "{not json");
  CHECK_THROWS_AS(read_json_file(tmp_path("broken.json")), lowrank::io_error);
  CHECK_THROWS_AS(write_text_atomic("/nonexistent_dir/x.json", "{}"),
                  lowrank::io_error);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli({}) == 1);
  CHECK(run_cli({"decompose", "--family", "analytic", "--out", tmp_path("x.json")}) == 1);
  CHECK(run_cli({"decompose", "--method", "nope", "--family", "analytic", "--out",
                 tmp_path("x.json")}) == 1);
  // pod needs exactly one truncation control
  CHECK(run_cli({"decompose", "--method", "pod", "--family", "analytic", "--out",
                 tmp_path("x.json")}) == 1);
  CHECK(run_cli({"decompose", "--method", "pod", "--family", "analytic", "--rank", "2",
                 "--tol", "0.1", "--out", tmp_path("x.json")}) == 1);
  // a snapshot source is mandatory
  CHECK(run_cli({"decompose", "--method", "pod", "--rank", "2", "--out",
                 tmp_path("x.json")}) == 1);
  // unknown family name
  CHECK(run_cli({"decompose", "--method", "pod", "--family", "martian", "--rank", "2",
                 "--out", tmp_path("x.json")}) == 1);
}

TEST_CASE("i/o errors exit 3") {
  CHECK(run_cli({"decompose", "--method", "pod", "--input", tmp_path("absent.csv"),
                 "--rank", "2", "--out", tmp_path("x.json")}) == 3);
  CHECK(run_cli({"decompose", "--method", "pod", "--family", "analytic", "--rank", "2",
                 "--out", "/nonexistent_dir/x.json"}) == 3);
  CHECK(run_cli({"sensors", "--basis", tmp_path("absent.json"), "--L", "3", "--out",
                 tmp_path("x.json")}) == 3);
}

TEST_CASE("invalid LOWRANK_LOG rejected, valid levels accepted") {
  setenv("LOWRANK_LOG", "verbose", 1);
  CHECK(run_cli({"report", "--family", "analytic", "--mx", "6", "--ny", "6", "--qmax",
                 "2", "--out", tmp_path("log.csv")}) == 1);
  setenv("LOWRANK_LOG", "debug", 1);
  CHECK(run_cli({"report", "--family", "analytic", "--mx", "6", "--ny", "6", "--qmax",
                 "2", "--out", tmp_path("log.csv")}) == 0);
  setenv("LOWRANK_LOG", "quiet", 1);
}

TEST_CASE("decompose pod: artifact schema and projection history") {
  const std::string out = tmp_path("pod.json");
  REQUIRE(run_cli({"decompose", "--method", "pod", "--family", "analytic", "--mx", "12",
                   "--ny", "10", "--rank", "4", "--out", out}) == 0);
  const nlohmann::json a = read_json_file(out);

  CHECK(a.at("method") == "pod");
  CHECK(a.at("config").at("version") == "0.1.0");
  CHECK(a.at("config").at("command") == "decompose");
  CHECK(a.at("config").at("family") == "analytic");
  CHECK(a.at("config").at("rank") == 4);
  CHECK(a.at("config").contains("seed"));
  CHECK(a.at("grids").at("x").at("points").size() == 12);
  CHECK(a.at("grids").at("y").at("points").size() == 10);
  CHECK(a.at("grids").at("x").at("measure") == 1.0);

  CHECK(a.at("factors").at("modes").size() == 4);
  CHECK(a.at("factors").at("modes").at(0).size() == 12);
  CHECK(a.at("factors").at("eigenvalues").size() == 10);
  const auto eig = a.at("factors").at("eigenvalues").get<std::vector<double>>();
  for (std::size_t i = 1; i < eig.size(); ++i) CHECK(eig[i] <= eig[i - 1]);

  // history[q] = mean-square projection error with q modes: decreasing, q+1 entries
  const auto hist = a.at("history").get<std::vector<double>>();
  REQUIRE(hist.size() == 5);
  for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] < hist[i - 1]);
}

TEST_CASE("decompose pod accepts an energy tolerance instead of a rank") {
  const std::string out = tmp_path("pod_tol.json");
  REQUIRE(run_cli({"decompose", "--method", "pod", "--family", "analytic", "--mx", "12",
                   "--ny", "12", "--tol", "1e-6", "--out", out}) == 0);
  const nlohmann::json a = read_json_file(out);
  CHECK(a.at("config").at("tol") == 1e-6);
  CHECK(!a.at("config").contains("rank"));
  const auto hist = a.at("history").get<std::vector<double>>();
  CHECK(hist.back() <= 1e-6);
}

TEST_CASE("decompose aca: cross factors with pivot indices and history") {
  const std::string out = tmp_path("aca.json");
  REQUIRE(run_cli({"decompose", "--method", "aca", "--pivot", "partial", "--family",
                   "cauchy", "--mx", "15", "--ny", "15", "--tol", "1e-8", "--out",
                   out}) == 0);
  const nlohmann::json a = read_json_file(out);

  CHECK(a.at("method") == "aca");
  CHECK(a.at("config").at("pivot") == "partial");
  const auto tau = a.at("factors").at("tau").get<std::vector<std::size_t>>();
  const auto sigma = a.at("factors").at("sigma").get<std::vector<std::size_t>>();
  REQUIRE(!tau.empty());
  CHECK(tau.size() == sigma.size());
  CHECK(a.at("factors").at("u").size() == tau.size());
  CHECK(a.at("factors").at("v").size() == tau.size());
  CHECK(a.at("factors").at("pivot_values").size() == tau.size());
  CHECK(a.at("factors").at("status") == "converged");
  CHECK(a.at("history").size() == tau.size() + 1);
  CHECK(a.at("history").back().get<double>() < 1e-8);
}

TEST_CASE("decompose eim: interpolation system with unit-diagonal b") {
  const std::string out = tmp_path("eim.json");
  REQUIRE(run_cli({"decompose", "--method", "eim", "--p", "inf", "--family", "random",
                   "--mx", "12", "--ny", "9", "--seed", "11", "--family-rank", "4",
                   "--tol", "1e-9", "--out", out}) == 0);
  const nlohmann::json a = read_json_file(out);

  CHECK(a.at("method") == "eim");
  CHECK(a.at("config").at("seed") == 11);
  const auto points = a.at("factors").at("points").get<std::vector<std::size_t>>();
  const auto samples = a.at("factors").at("samples").get<std::vector<std::size_t>>();
  REQUIRE(!points.empty());
  CHECK(points.size() == samples.size());
  CHECK(a.at("factors").at("basis").size() == points.size());
  const auto b = a.at("factors").at("b").get<std::vector<std::vector<double>>>();
  REQUIRE(b.size() == points.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    CHECK(b[k][k] == 1.0);
    for (std::size_t l = k + 1; l < b.size(); ++l) CHECK(b[k][l] == 0.0);
  }
}

TEST_CASE("decompose geim: moment dictionary labels recorded") {
  const std::string out = tmp_path("geim.json");
  REQUIRE(run_cli({"decompose", "--method", "geim", "--family", "analytic", "--mx",
                   "10", "--ny", "10", "--rank", "3", "--tol", "1e-13", "--out",
                   out}) == 0);
  const nlohmann::json a = read_json_file(out);

  CHECK(a.at("method") == "geim");
  const auto moments = a.at("factors").at("moments").get<std::vector<std::size_t>>();
  const auto labels = a.at("factors").at("moment_labels").get<std::vector<std::string>>();
  REQUIRE(moments.size() == 3);
  REQUIRE(labels.size() == 3);
  for (const std::string& l : labels) {
    CHECK((l.rfind("dirac(", 0) == 0 || l == "average"));
  }
  CHECK(a.at("factors").at("status") == "rank_capped");
}

TEST_CASE("decompose reads csv input and preserves its grids") {
  using namespace lowrank;
  SnapshotMatrix s = random_low_rank(8, 6, 2, 0.0, 21);
  const std::string csv = tmp_path("input.csv");
  write_matrix_csv(s, csv);

  const std::string out = tmp_path("from_csv.json");
  REQUIRE(run_cli({"decompose", "--method", "aca", "--tol", "1e-12", "--input", csv,
                   "--out", out}) == 0);
  const nlohmann::json a = read_json_file(out);
  CHECK(a.at("config").at("input") == csv);
  const auto xs = a.at("grids").at("x").at("points").get<std::vector<double>>();
  REQUIRE(xs.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(xs[i] == s.grid_x.points[i]);
  // noiseless rank 2: elimination must stop at 2 terms
  CHECK(a.at("factors").at("tau").size() == 2);
}

TEST_CASE("compare: equivalence walk exits 0 on its built-in corpus entry") {
  CHECK(run_cli({"compare", "--family", "random", "--mx", "12", "--ny", "10", "--seed",
                 "7", "--qmax", "8"}) == 0);
  CHECK(run_cli({"compare", "--family", "analytic", "--mx", "10", "--ny", "10",
                 "--qmax", "6"}) == 0);
}

TEST_CASE("sensors: condition-number and worst-error placement from a pod basis") {
  const std::string basis = tmp_path("sensor_basis.json");
  REQUIRE(run_cli({"decompose", "--method", "pod", "--family", "analytic", "--mx", "15",
                   "--ny", "15", "--rank", "4", "--out", basis}) == 0);

  const std::string out_cond = tmp_path("sensors_cond.json");
  REQUIRE(run_cli({"sensors", "--basis", basis, "--criterion", "cond", "--L", "6",
                   "--out", out_cond}) == 0);
  const nlohmann::json sc = read_json_file(out_cond);
  const auto picked = sc.at("factors").at("sensors").get<std::vector<std::size_t>>();
  REQUIRE(picked.size() == 6);
  for (std::size_t i = 0; i < picked.size(); ++i) {
    CHECK(picked[i] < 15);
    for (std::size_t j = i + 1; j < picked.size(); ++j) CHECK(picked[i] != picked[j]);
  }
  CHECK(sc.at("factors").at("gram_cond").get<double>() >= 1.0);
  CHECK(sc.at("config").at("criterion") == "cond");
  CHECK(sc.at("config").at("source") == read_json_file(basis).at("config"));

  // The worst-error criterion rebuilds the training snapshots from the
  // source description embedded in the basis artifact.
  const std::string out_err = tmp_path("sensors_err.json");
  REQUIRE(run_cli({"sensors", "--basis", basis, "--criterion", "error", "--L", "6",
                   "--out", out_err}) == 0);
  const nlohmann::json se = read_json_file(out_err);
  CHECK(se.at("factors").at("sensors").get<std::vector<std::size_t>>().size() == 6);
  CHECK(se.at("factors").at("gram_cond").get<double>() >= 1.0);
}

TEST_CASE("sensors: rejects bases that are not pod or eim") {
  const std::string basis = tmp_path("aca_basis.json");
  REQUIRE(run_cli({"decompose", "--method", "aca", "--family", "cauchy", "--mx", "10",
                   "--ny", "10", "--tol", "1e-6", "--out", basis}) == 0);
  CHECK(run_cli({"sensors", "--basis", basis, "--L", "3", "--out",
                 tmp_path("x.json")}) == 1);
}

TEST_CASE("report: csv decay table matches the library") {
  using namespace lowrank;
  const std::string out = tmp_path("decay.csv");
  REQUIRE(run_cli({"report", "--family", "analytic", "--mx", "12", "--ny", "12",
                   "--methods", "pod,eim_inf", "--qmax", "5", "--out", out}) == 0);

  const auto rows = parse_csv(slurp(out));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"q", "floor", "pod", "eim_inf"});

  const SnapshotMatrix s = materialize(builtin_family("analytic"),
                                       uniform_grid(0.0, 1.0, 12),
                                       uniform_grid(0.0, 1.0, 12));
  const DecayReport rep =
      decay_report(s, {DecayMethod::pod, DecayMethod::eim_inf}, 5);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(std::stoul(rows[r + 1][0]) == rep.rows[r].q);
    CHECK(std::stod(rows[r + 1][1]) == rep.rows[r].floor);
    CHECK(std::stod(rows[r + 1][2]) == rep.rows[r].errors[0]);
    CHECK(std::stod(rows[r + 1][3]) == rep.rows[r].errors[1]);
  }
}

TEST_CASE("report: unknown method name is a usage error") {
  CHECK(run_cli({"report", "--family", "analytic", "--mx", "6", "--ny", "6",
                 "--methods", "pod,bogus", "--qmax", "2", "--out",
                 tmp_path("x.csv")}) == 1);
}

TEST_CASE("config file supplies defaults, flags override") {
  const std::string cfg = tmp_path("dec.cfg");
  {
    std::ofstream out(cfg);
    out << "# decomposition defaults\n"
        << "method=pod\n"
        << "family=analytic\n"
        << "mx=10\n"
        << "ny=10\n"
        << "rank=3\n"
        << "out=" << tmp_path("cfg_a.json") << "\n";
  }
  REQUIRE(run_cli({"decompose", "--config", cfg}) == 0);
  const nlohmann::json a = read_json_file(tmp_path("cfg_a.json"));
  CHECK(a.at("config").at("rank") == 3);
  CHECK(a.at("config").at("config_file") == cfg);
  CHECK(a.at("factors").at("modes").size() == 3);

  REQUIRE(run_cli({"decompose", "--config", cfg, "--rank", "5", "--out",
                   tmp_path("cfg_b.json")}) == 0);
  const nlohmann::json b = read_json_file(tmp_path("cfg_b.json"));
  CHECK(b.at("config").at("rank") == 5);
  CHECK(b.at("factors").at("modes").size() == 5);

  const std::string bad = tmp_path("bad.cfg");
  {
    std::ofstream out(bad);
    out << "method pod\n";
  }
  CHECK(run_cli({"decompose", "--config", bad}) == 1);
  CHECK(run_cli({"decompose", "--config", tmp_path("absent.cfg")}) == 3);
}

TEST_CASE("executable: byte-identical reruns and exit codes") {
  REQUIRE_MESSAGE(!g_cli_binary.empty(),
                  "pass the CLI executable path as the first argument");

  const std::string out = tmp_path("proc.json");
  const std::string invocation =
      "decompose --method eim --family random --mx 14 --ny 11 --seed 42 "
      "--family-rank 3 --tol 1e-10 --out " + out;
  REQUIRE(run_process(invocation) == 0);
  const std::string first = slurp(out);
  REQUIRE(run_process(invocation) == 0);
  CHECK(first == slurp(out));

  const std::string csv = tmp_path("proc.csv");
  const std::string rep =
      "report --family cauchy --mx 10 --ny 10 --qmax 4 --out " + csv;
  REQUIRE(run_process(rep) == 0);
  const std::string first_csv = slurp(csv);
  REQUIRE(run_process(rep) == 0);
  CHECK(first_csv == slurp(csv));

  CHECK(run_process("--help") == 0);
  CHECK(run_process("decompose --help") == 0);
  CHECK(run_process("") == 1);
  CHECK(run_process("decompose --method pod --family analytic --rank 2 --out "
                    "/nonexistent_dir/x.json") == 3);
}

int main(int argc, char** argv) { return main_impl(argc, argv); }
