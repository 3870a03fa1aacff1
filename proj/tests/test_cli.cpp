#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <doctest.h>

#include "d2dstore/analytic.hpp"
#include "d2dstore/app/commands.hpp"
#include "d2dstore/app/config.hpp"
#include "d2dstore/app/csv.hpp"
#include "d2dstore/app/golden.hpp"

using namespace d2dstore;
using namespace d2dstore::app;
namespace fs = std::filesystem;

namespace {

// Fresh directory per test, removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("d2dstore_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Table read_table(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return read_csv(in);
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string& command, const fs::path& config, const fs::path& out_dir,
        std::vector<std::string> overrides = {}, bool force = false) {
  Manifest m;
  m.command = command;
  m.config_path = config;
  m.out_dir = out_dir;
  m.force = force;
  m.overrides = std::move(overrides);
  std::ostringstream out, err;
  const int code = run_command(m, out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(D2D_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kAnalyticConfig = R"({
  "codes": [{"family": "Replication", "m": 2}, {"family": "MDS", "m": 9, "h": 3, "r": 3},
            {"family": "LRC", "m": 6, "h": 3, "r": 2}],
  "scheme": ["conventional", "hybrid"],
  "grid": {"delta": [0, 0.5, 1, 2]}
})";

const char* kSimulateConfig = R"({
  "codes": [{"family": "MDS", "m": 9, "h": 3, "r": 3}],
  "grid": {"delta": [0.5, 1]},
  "sim": {"horizon": 20000, "seed": 7}
})";

}  // namespace

TEST_CASE("format_number uses 12 significant digits") {
  CHECK(format_number(2.6) == "2.6");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("CSV round trip reproduces the table exactly") {
  Table t;
  t.header = {"name", "value", "note"};
  t.add({"plain", format_number(0.1 + 0.2), ""});
  t.add({"comma,inside", format_number(1e-300), "quote \" inside"});
  t.add({"line\nbreak", "inf", " padded "});
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str().find('\r') == std::string::npos);
  std::istringstream is(os.str());
  CHECK(read_csv(is) == t);
}

TEST_CASE("analytic table round trips through its CSV file") {
  TempDir dir("roundtrip");
  const auto cfg = write_file(dir.path / "c.json", kAnalyticConfig);
  REQUIRE(run("analytic", cfg, dir.path).code == kOk);
  const Table t = analytic_table(load_config(cfg, {}));
  CHECK(read_table(dir.path / "analytic.csv") == t);
  CHECK(t.rows.size() == 3 * 2 * 4);
  CHECK(t.header.size() == 12);
}

TEST_CASE("overrides set nested keys with JSON or string values") {
  nlohmann::json doc = nlohmann::json::object();
  apply_override(doc, "network.omega=0.5");
  apply_override(doc, "scheme=hybrid");
  apply_override(doc, "grid.delta=[0.1,0.2]");
  apply_override(doc, "sim.exclude_requester=true");
  CHECK(doc["network"]["omega"].get<double>() == 0.5);
  CHECK(doc["scheme"].get<std::string>() == "hybrid");
  CHECK(doc["grid"]["delta"].size() == 2);
  CHECK(doc["sim"]["exclude_requester"].get<bool>());
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "a..b=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "scheme.x=1"), ConfigError);

  const Config c = parse_config(doc);
  CHECK(c.network.omega == 0.5);
  CHECK(c.schemes == std::vector<Scheme>{Scheme::Hybrid});
  CHECK(c.sim.exclude_requester);
}

TEST_CASE("grid forms") {
  using nlohmann::json;
  CHECK(parse_grid(json{{"linspace", {0.5, 1.5, 3}}}) == std::vector<double>{0.5, 1.0, 1.5});
  const auto lg = parse_grid(json{{"logspace", {0.01, 1, 3}}, {"include_zero", true}});
  REQUIRE(lg.size() == 4);
  CHECK(lg[0] == 0.0);
  CHECK(lg[2] == doctest::Approx(0.1));
  CHECK_THROWS_AS(parse_grid(json{{"delta", json::array()}}), ConfigError);
  CHECK_THROWS_AS(parse_grid(json{{"delta", json::array()}, {"include_zero", true}}), ConfigError);
  CHECK_THROWS_AS(parse_grid(json{{"delta", {1, 0.5}}}), ConfigError);
  CHECK_THROWS_AS(parse_grid(json{{"delta", {-1}}}), ConfigError);
  CHECK_THROWS_AS(parse_grid(json{{"delta", {1}}, {"linspace", {0, 1, 2}}}), ConfigError);
  CHECK_THROWS_AS(parse_grid(json::object()), ConfigError);
}

TEST_CASE("invalid configurations exit with the config-error code") {
  TempDir dir("config");
  const auto cfg = write_file(dir.path / "c.json", kAnalyticConfig);
  SUBCASE("constraint names the failing invariant") {
    const Run r = run("analytic", cfg, dir.path, {"network.mu=-1"});
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("mu >= 0") != std::string::npos);
  }
  SUBCASE("code constraint") {
    const Run r = run("analytic", cfg, dir.path, {R"(codes=[{"family":"MDS","m":9,"h":3,"r":4}])"});
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("MDS r = h") != std::string::npos);
  }
  SUBCASE("empty grid") {
    CHECK(run("analytic", cfg, dir.path, {R"(grid={"delta":[]})"}).code == kConfigError);
  }
  SUBCASE("unknown key") {
    CHECK(run("analytic", cfg, dir.path, {"network.rho=4"}).code == kConfigError);
  }
  SUBCASE("no codes") {
    CHECK(run("analytic", cfg, dir.path, {"codes=[]"}).code == kConfigError);
  }
  SUBCASE("unreadable or malformed file") {
    CHECK(run("analytic", dir.path / "missing.json", dir.path).code == kConfigError);
    CHECK(run("analytic", write_file(dir.path / "bad.json", "{"), dir.path).code == kConfigError);
  }
  SUBCASE("unknown command") { CHECK(run("plot", cfg, dir.path).code == kConfigError); }
  SUBCASE("lambda_c above mu") {
    CHECK(run("analytic", cfg, dir.path, {"network.lambda_c=2", "incoming=true"}).code ==
          kConfigError);
  }
  CHECK_FALSE(fs::exists(dir.path / "analytic.csv"));
}

TEST_CASE("existing outputs are kept unless forced") {
  TempDir dir("force");
  const auto cfg = write_file(dir.path / "c.json", kAnalyticConfig);
  REQUIRE(run("analytic", cfg, dir.path).code == kOk);
  write_file(dir.path / "analytic.csv", "sentinel");
  const Run refused = run("analytic", cfg, dir.path);
  CHECK(refused.code == kConfigError);
  CHECK(refused.err.find("--force") != std::string::npos);
  CHECK(read_file(dir.path / "analytic.csv") == "sentinel");
  CHECK(run("analytic", cfg, dir.path, {}, true).code == kOk);
  CHECK(read_file(dir.path / "analytic.csv") != "sentinel");
}

TEST_CASE("delta = 0 rows use the instantaneous-repair limit") {
  TempDir dir("zero");
  const auto cfg = write_file(dir.path / "c.json", kAnalyticConfig);
  REQUIRE(run("analytic", cfg, dir.path).code == kOk);
  const Table t = read_table(dir.path / "analytic.csv");
  const NetworkParams np;
  int checked = 0;
  for (const auto& row : t.rows) {
    if (row[5] != "0") continue;
    const CodeFamily f = parse_family(row[0]);
    const int m = std::stoi(row[1]), h = std::stoi(row[2]), r = std::stoi(row[3]);
    const CodeSpec c = f == CodeFamily::Replication ? replication(m) : derive_code(f, m, h, r);
    CHECK(row[10] == format_number(limit_cost_zero(np, c)));
    ++checked;
  }
  CHECK(checked == 3 * 2);
}

TEST_CASE("simulate writes identical records for the same seed") {
  TempDir dir("simulate");
  const auto cfg = write_file(dir.path / "c.json", kSimulateConfig);
  REQUIRE(run("simulate", cfg, dir.path / "a").code == kOk);
  REQUIRE(run("simulate", cfg, dir.path / "b").code == kOk);
  const std::string a = read_file(dir.path / "a" / "simulate.jsonl");
  CHECK(!a.empty());
  CHECK(a == read_file(dir.path / "b" / "simulate.jsonl"));
  CHECK(read_file(dir.path / "a" / "report.csv") == read_file(dir.path / "b" / "report.csv"));

  REQUIRE(run("simulate", cfg, dir.path / "c", {"sim.seed=8"}).code == kOk);
  CHECK(a != read_file(dir.path / "c" / "simulate.jsonl"));

  std::istringstream lines(a);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["seed"].get<int>() == 7 + n);
    CHECK(j.contains("cost"));
    CHECK(j.contains("stderr"));
    CHECK(j.contains("analytic"));
    ++n;
  }
  CHECK(n == 2);
  const Table report = read_table(dir.path / "a" / "report.csv");
  CHECK(report.header == simulation_report_header());
  CHECK(report.rows.size() == 2);
}

TEST_CASE("simulate with omega = 0 has no download cost") {
  TempDir dir("omega0");
  const auto cfg = write_file(dir.path / "c.json", kSimulateConfig);
  REQUIRE(run("simulate", cfg, dir.path, {"network.omega=0"}).code == kOk);
  std::istringstream lines(read_file(dir.path / "simulate.jsonl"));
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["cost"]["download_bs"].get<double>() == 0.0);
    CHECK(j["cost"]["download_d2d"].get<double>() == 0.0);
    CHECK(j["analytic"]["download_bs"].get<double>() == 0.0);
    CHECK(j["cost"]["repair_d2d"].get<double>() > 0.0);
  }
}

TEST_CASE("simulation report flags runs beyond three standard errors") {
  Config cfg = load_config({}, {R"(codes=[{"family":"Replication","m":2}])", "grid.delta=[1]",
                                "sim.horizon=5000"});
  const auto ok = simulate_all(cfg);
  REQUIRE(ok.size() == 1);
  const double z = ok[0].json["z"].get<double>();
  CHECK(ok[0].flagged == (std::abs(z) > 3));
  CHECK(ok[0].report_row.back() == (ok[0].flagged ? "FLAG" : "ok"));
}

TEST_CASE("simulate trace files") {
  TempDir dir("trace");
  const auto cfg = write_file(dir.path / "c.json", kSimulateConfig);
  REQUIRE(run("simulate", cfg, dir.path, {"sim.trace=true", "sim.horizon=2000"}).code == kOk);
  const std::string trace = read_file(dir.path / "trace_0.csv");
  CHECK(trace.rfind("time,event,value,cost_bs,cost_d2d\n", 0) == 0);
  CHECK(trace.find("departure") != std::string::npos);
  CHECK(fs::exists(dir.path / "trace_1.csv"));
}

TEST_CASE("search at instantaneous repair picks 2-replication") {
  TempDir dir("search");
  const auto cfg = write_file(dir.path / "c.json", R"({"grid": {"delta": [0, 0.5, 1]}})");
  REQUIRE(run("search", cfg, dir.path).code == kOk);
  const Table t = read_table(dir.path / "search.csv");
  CHECK(t.header == std::vector<std::string>{"delta", "family", "m", "h", "r", "cost", "normalized"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0] == std::vector<std::string>{"0", "Replication", "2", "1", "1", "2.6",
                                              format_number(2.6 / 24.0)});
  const Table codes = read_table(dir.path / "search_codes.csv");
  CHECK(codes.rows.size() == 161);
}

TEST_CASE("search at rho = 2 answers BS-only everywhere") {
  TempDir dir("bsonly");
  const auto cfg = write_file(dir.path / "c.json", R"({"grid": {"linspace": [0, 3, 31]}})");
  REQUIRE(run("search", cfg, dir.path, {"network.rho_bs=2"}).code == kOk);
  const Table t = read_table(dir.path / "search.csv");
  REQUIRE(t.rows.size() == 31);
  for (const auto& row : t.rows) CHECK(row[1] == "BS-only");
}

TEST_CASE("search with several schemes writes one file per scheme") {
  TempDir dir("schemes");
  const auto cfg = write_file(dir.path / "c.json",
                              R"({"grid": {"delta": [0, 0.5]}, "scheme": ["conventional", "hybrid"]})");
  REQUIRE(run("search", cfg, dir.path).code == kOk);
  CHECK(fs::exists(dir.path / "search_conventional.csv"));
  CHECK(fs::exists(dir.path / "search_hybrid.csv"));
  CHECK(fs::exists(dir.path / "search_codes_hybrid.csv"));
  CHECK(run("search", cfg, dir.path / "x", {R"(grid={"delta":[0.5]})"}).code == kConfigError);
}

TEST_CASE("figures writes every dataset") {
  TempDir dir("figures");
  const Run r = run("figures", {}, dir.path);
  REQUIRE(r.code == kOk);
  for (const char* name : {"cost_vs_delta.csv", "delta_max_vs_rho.csv", "lrc_cost_vs_omega.csv",
                           "msr_cost_vs_r.csv", "hybrid_vs_conventional.csv",
                           "winners_conventional.csv", "winners_hybrid.csv",
                           "incoming_cost_vs_lambda_c.csv", "winners_incoming.csv"}) {
    CAPTURE(name);
    const Table t = read_table(dir.path / name);
    CHECK(!t.header.empty());
    CHECK(!t.rows.empty());
  }
}

TEST_CASE("golden file checks") {
  TempDir dir("golden");
  SUBCASE("reference goldens reproduce") {
    for (const auto& c : check_goldens(load_goldens(D2D_GOLDEN_FILE))) {
      CAPTURE(c.name);
      CHECK(c.pass);
    }
  }
  SUBCASE("corrupted value fails") {
    auto doc = load_goldens(D2D_GOLDEN_FILE);
    doc["mds933_repair_delta0.5"]["value"] = doc["mds933_repair_delta0.5"]["value"].get<double>() * 1.1;
    bool failed = false;
    for (const auto& c : check_goldens(doc)) {
      if (c.name == "mds933_repair_delta0.5") failed = !c.pass;
    }
    CHECK(failed);
  }
  SUBCASE("removed entry fails") {
    auto doc = load_goldens(D2D_GOLDEN_FILE);
    doc.erase("p_d2d_h3_m9_delta0.5");
    int failures = 0;
    for (const auto& c : check_goldens(doc)) failures += !c.pass;
    CHECK(failures >= 1);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_goldens(dir.path / "none.json"), GoldenMissing);
    const Run r = run("validate", {}, dir.path, {"golden=" + (dir.path / "none.json").string()});
    CHECK(r.code == kGoldenMissing);
    CHECK_FALSE(fs::exists(dir.path / "validate.json"));
  }
}

TEST_CASE("command-line binary exit codes") {
  TempDir dir("binary");
  const auto cfg = write_file(dir.path / "c.json", kAnalyticConfig);
  const std::string base = "--config " + cfg.string() + " --out " + dir.path.string();
  CHECK(run_binary("analytic " + base) == 0);
  CHECK(run_binary("analytic " + base) == 2);
  CHECK(run_binary("analytic " + base + " --force") == 0);
  CHECK(run_binary("analytic " + base + " --force --set network.omega=-1") == 2);
  CHECK(run_binary("analytic " + base + " --force --set network.omega=0.5 --set scheme=hybrid") == 0);
  CHECK(run_binary("") == 2);
  CHECK(run_binary("analytic --no-such-flag") == 2);
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("validate --out " + dir.path.string() + " --set golden=" +
                   (dir.path / "none.json").string()) == 3);
}
