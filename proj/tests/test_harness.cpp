#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "sh/io.hpp"
#include "sh/stats.hpp"
#include "sh/suites.hpp"

namespace fs = std::filesystem;
using sh::harness::ExperimentConfig;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

sh::stats::TestReport report_named(const std::string& name, double stat, double expected,
                                   double score, bool pass) {
  sh::stats::TestReport r;
  r.suite = name;
  r.statistic = stat;
  r.expected = expected;
  r.dispersion = 1.0;
  r.score = score;
  r.pass = pass;
  r.replicas = 10;
  r.seed = 7;
  return r;
}

}  // namespace

TEST_CASE("typed parameter access falls back, parses, and rejects junk") {
  ExperimentConfig cfg;
  CHECK(cfg.seed == 1);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.parallelism == 1);
  CHECK(cfg.real("missing", 2.5) == 2.5);
  CHECK(cfg.integer("missing", -4) == -4);
  CHECK(cfg.replicas(12) == 12);

  cfg.parameters["alpha"] = "0.125";
  cfg.parameters["count"] = "42";
  cfg.parameters["replicas"] = "3";
  CHECK(cfg.real("alpha", 0.0) == 0.125);
  CHECK(cfg.integer("count", 0) == 42);
  CHECK(cfg.replicas(99) == 3);

  cfg.parameters["alpha"] = "0.125x";
  CHECK_THROWS_AS((void)cfg.real("alpha", 0.0), std::invalid_argument);
  cfg.parameters["count"] = "forty";
  CHECK_THROWS_AS((void)cfg.integer("count", 0), std::invalid_argument);
  cfg.parameters["replicas"] = "0";
  CHECK_THROWS_AS((void)cfg.replicas(1), std::invalid_argument);
}

TEST_CASE("apply_setting routes reserved keys onto typed fields") {
  ExperimentConfig cfg;
  sh::harness::apply_setting(cfg, "suite", "separation");
  sh::harness::apply_setting(cfg, "seed", "123456789012345");
  sh::harness::apply_setting(cfg, "out", "/tmp/somewhere");
  sh::harness::apply_setting(cfg, "parallelism", "4");
  sh::harness::apply_setting(cfg, "rho", "0.4");
  CHECK(cfg.suite == "separation");
  CHECK(cfg.seed == 123456789012345ull);
  CHECK(cfg.output_dir == "/tmp/somewhere");
  CHECK(cfg.parallelism == 4);
  CHECK(cfg.parameters.at("rho") == "0.4");
  CHECK(cfg.parameters.count("suite") == 0);

  // `output_dir` is an alias for `out`.
  sh::harness::apply_setting(cfg, "output_dir", "elsewhere");
  CHECK(cfg.output_dir == "elsewhere");

  CHECK_THROWS_AS(sh::harness::apply_setting(cfg, "seed", "not-a-number"), std::invalid_argument);
  CHECK_THROWS_AS(sh::harness::apply_setting(cfg, "parallelism", "0"), std::invalid_argument);
}

TEST_CASE("load_config parses key=value files with comments and blank lines") {
  fs::path dir = fresh_dir("sh_harness_cfg");
  fs::path good = dir / "good.cfg";
  {
    std::ofstream out(good);
    out << "# full-line comment\n"
        << "\n"
        << "suite = queue-output-law\n"
        << "seed=9\n"
        << "  replicas = 250   # inline comment\n"
        << "rho=0.4\n";
  }
  const ExperimentConfig cfg = sh::harness::load_config(good.string());
  CHECK(cfg.suite == "queue-output-law");
  CHECK(cfg.seed == 9);
  CHECK(cfg.replicas(1) == 250);
  CHECK(cfg.parameters.at("rho") == "0.4");

  fs::path bad = dir / "bad.cfg";
  sh::io::write_text_file(bad.string(), "this line has no equals sign\n");
  CHECK_THROWS_AS((void)sh::harness::load_config(bad.string()), std::invalid_argument);
  CHECK_THROWS_AS((void)sh::harness::load_config((dir / "absent.cfg").string()),
                  std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("emit_report writes a JSON array and a summary with a pass count") {
  fs::path dir = fresh_dir("sh_harness_report");
  fs::path path = dir / "report.json";

  SUBCASE("all passing") {
    const std::vector<sh::stats::TestReport> reports = {
        report_named("alpha", 1.5, 1.4, 0.3, true),
        report_named("beta", 0.0, 0.0, 0.0, true),
    };
    const std::string summary = sh::harness::emit_report(reports, path.string());
    CHECK(summary.find("2/2 pass\n") != std::string::npos);
    CHECK(summary.find("failures") == std::string::npos);
    CHECK(summary.find("alpha") != std::string::npos);

    const auto parsed = nlohmann::json::parse(sh::io::read_text_file(path.string()));
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0]["suite"] == "alpha");
    CHECK(parsed[0]["statistic"].get<double>() == 1.5);
    CHECK(parsed[0]["expected"].get<double>() == 1.4);
    CHECK(parsed[0]["dispersion"].get<double>() == 1.0);
    CHECK(parsed[0]["score"].get<double>() == 0.3);
    CHECK(parsed[0]["pass"].get<bool>());
    CHECK(parsed[0]["replicas"].get<std::int64_t>() == 10);
    CHECK(parsed[0]["seed"].get<std::uint64_t>() == 7);
  }

  SUBCASE("mixed outcome is counted and flagged") {
    const std::vector<sh::stats::TestReport> reports = {
        report_named("alpha", 1.0, 1.0, 0.1, true),
        report_named("beta", 9.0, 1.0, 8.0, false),
    };
    const std::string summary = sh::harness::emit_report(reports, path.string());
    CHECK(summary.find("1/2 pass\n") != std::string::npos);
    CHECK(summary.find("failures: 1\n") != std::string::npos);
    CHECK(summary.find(" NO\n") != std::string::npos);
    const auto parsed = nlohmann::json::parse(sh::io::read_text_file(path.string()));
    CHECK_FALSE(parsed[1]["pass"].get<bool>());
  }

  SUBCASE("infinite scores are clamped to finite JSON numbers") {
    const std::vector<sh::stats::TestReport> reports = {
        report_named("gamma", 1.0, 0.0, std::numeric_limits<double>::infinity(), false),
    };
    (void)sh::harness::emit_report(reports, path.string());
    const auto parsed = nlohmann::json::parse(sh::io::read_text_file(path.string()));
    CHECK(parsed[0]["score"].get<double>() == std::numeric_limits<double>::max());
  }

  SUBCASE("an empty report list is rejected") {
    CHECK_THROWS_AS((void)sh::harness::emit_report({}, path.string()), std::invalid_argument);
  }

  fs::remove_all(dir);
}

TEST_CASE("suite registry exposes names and rejects unknown suites") {
  const auto& names = sh::harness::suite_names();
  CHECK(names.size() >= 15);
  CHECK(sh::harness::is_suite("queue-dp-equivalence"));
  CHECK(sh::harness::is_suite("reproducibility"));
  CHECK_FALSE(sh::harness::is_suite("no-such-suite"));

  ExperimentConfig cfg;
  cfg.suite = "no-such-suite";
  CHECK_THROWS_AS((void)sh::harness::run_suite(cfg), std::invalid_argument);
}

TEST_CASE("suite artifacts are byte-identical across reruns and worker counts") {
  ExperimentConfig cfg;
  cfg.suite = "queue-dp-equivalence";
  cfg.seed = 3;
  cfg.parameters["replicas"] = "6";
  cfg.parameters["window"] = "64";
  cfg.parameters["levels"] = "6";

  cfg.parallelism = 1;
  const auto first = sh::harness::run_suite(cfg);
  REQUIRE(first.replica_rows.size() == 6);
  CHECK(!first.replica_header.empty());
  for (const auto& row : first.replica_rows) {
    REQUIRE(!row.empty());
    CHECK(row.back() == '\n');
  }

  const auto rerun = sh::harness::run_suite(cfg);
  cfg.parallelism = 2;
  const auto threaded = sh::harness::run_suite(cfg);
  const std::string base = sh::harness::serialize_outcome(first);
  CHECK(sh::harness::serialize_outcome(rerun) == base);
  CHECK(sh::harness::serialize_outcome(threaded) == base);
}

TEST_CASE("run_experiment writes artifacts and reports exit codes honestly") {
  fs::path dir = fresh_dir("sh_harness_run");

  SUBCASE("unknown suite exits 2 without writing anything") {
    ExperimentConfig cfg;
    cfg.suite = "no-such-suite";
    cfg.output_dir = (dir / "unknown").string();
    CHECK(sh::harness::run_experiment(cfg) == 2);
    CHECK_FALSE(fs::exists(dir / "unknown"));
  }

  SUBCASE("invalid parameter values exit 2") {
    ExperimentConfig cfg;
    cfg.suite = "queue-dp-equivalence";
    cfg.output_dir = (dir / "badparam").string();
    cfg.parameters["rho"] = "1.5";
    CHECK(sh::harness::run_experiment(cfg) == 2);
  }

  SUBCASE("a passing run exits 0 and leaves parseable artifacts") {
    ExperimentConfig cfg;
    cfg.suite = "queue-dp-equivalence";
    cfg.seed = 5;
    cfg.output_dir = (dir / "pass").string();
    cfg.parameters["replicas"] = "4";
    cfg.parameters["window"] = "64";
    cfg.parameters["levels"] = "5";
    CHECK(sh::harness::run_experiment(cfg) == 0);

    const auto parsed =
        nlohmann::json::parse(sh::io::read_text_file((dir / "pass" / "report.json").string()));
    REQUIRE(parsed.is_array());
    CHECK(parsed[0]["pass"].get<bool>());
    CHECK(parsed[0]["replicas"].get<std::int64_t>() == 4);
    CHECK(parsed[0]["seed"].get<std::uint64_t>() == 5);

    const std::string csv = sh::io::read_text_file((dir / "pass" / "replicas.csv").string());
    std::size_t lines = 0;
    for (char c : csv) lines += (c == '\n') ? 1 : 0;
    CHECK(lines == 5);  // header + one row per replica
    CHECK(csv.rfind("replica,", 0) == 0);
  }

  SUBCASE("a failing gate exits 1 but still writes its artifacts") {
    ExperimentConfig cfg;
    cfg.suite = "queue-dp-equivalence";
    cfg.seed = 5;
    cfg.output_dir = (dir / "fail").string();
    cfg.parameters["replicas"] = "3";
    cfg.parameters["window"] = "64";
    cfg.parameters["levels"] = "5";
    cfg.parameters["tolerance"] = "1e-30";  // float roundoff alone exceeds this
    CHECK(sh::harness::run_experiment(cfg) == 1);
    const auto parsed =
        nlohmann::json::parse(sh::io::read_text_file((dir / "fail" / "report.json").string()));
    CHECK_FALSE(parsed[0]["pass"].get<bool>());
  }

  fs::remove_all(dir);
}
