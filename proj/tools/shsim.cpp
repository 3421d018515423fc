// Command-line driver: sampling commands for the lattice model and the
// horizon process, plus the verification-suite runner.

#include "sh/horizon.hpp"
#include "sh/io.hpp"
#include "sh/lattice.hpp"
#include "sh/scaling.hpp"
#include "sh/suites.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace {

struct VerifyArgs {
  std::string suite;
  std::string config_path;
  bool has_seed = false;
  std::uint64_t seed = 1;
  bool has_replicas = false;
  std::int64_t replicas = 0;
  bool has_out = false;
  std::string out;
  bool has_parallelism = false;
  int parallelism = 1;
};

// Config file first, then command-line overrides on top.
sh::harness::ExperimentConfig resolve_config(const VerifyArgs& args) {
  sh::harness::ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = sh::harness::load_config(args.config_path);
  if (!args.suite.empty()) cfg.suite = args.suite;
  if (args.has_seed) cfg.seed = args.seed;
  if (args.has_replicas) cfg.parameters["replicas"] = std::to_string(args.replicas);
  if (args.has_out) cfg.output_dir = args.out;
  if (args.has_parallelism) cfg.parallelism = args.parallelism;
  return cfg;
}

void add_verify_flags(CLI::App* cmd, VerifyArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key=value config file");
  cmd->add_option("--suite", args.suite, "suite name (overrides config)");
  cmd->add_option("--seed", args.seed, "base seed")->each([&](const std::string&) {
    args.has_seed = true;
  });
  cmd->add_option("--replicas", args.replicas, "replica count")->each([&](const std::string&) {
    args.has_replicas = true;
  });
  cmd->add_option("--out", args.out, "output directory")->each([&](const std::string&) {
    args.has_out = true;
  });
  cmd->add_option("--parallelism", args.parallelism, "worker threads")
      ->each([&](const std::string&) { args.has_parallelism = true; });
}

int cmd_sample_lpp(std::uint64_t seed, std::int64_t width, std::int64_t height, double rho,
                   const std::string& out_dir) {
  sh::io::ensure_dir(out_dir);
  std::string passage = "column,row,passage_time\n";
  std::string geodesic = "step,column,row\n";
  if (rho > 0.0) {
    const auto quad = sh::lattice::stationary_quadrant(seed, rho, {0, 0}, width, height);
    for (std::int64_t n = 0; n < height; ++n)
      for (std::int64_t m = 0; m < width; ++m)
        passage += sh::io::csv_row({std::to_string(m), std::to_string(n),
                                    sh::io::format17(quad.table.at(m, n))}) +
                   "\n";
    const auto path = sh::lattice::trace_geodesic(quad.table, {width - 1, height - 1});
    std::int64_t step = 0;
    for (const auto& site : path.sites)
      geodesic += sh::io::csv_row({std::to_string(step++), std::to_string(site.first),
                                   std::to_string(site.second)}) +
                  "\n";
  } else {
    const auto field = sh::lattice::sample_weight_field(seed, {0, 0}, width, height);
    const auto table = sh::lattice::passage_table(field, {0, 0});
    for (std::int64_t n = 0; n < height; ++n)
      for (std::int64_t m = 0; m < width; ++m)
        passage += sh::io::csv_row({std::to_string(m), std::to_string(n),
                                    sh::io::format17(table.at(m, n))}) +
                   "\n";
    const auto path = sh::lattice::trace_geodesic(table, {width - 1, height - 1});
    std::int64_t step = 0;
    for (const auto& site : path.sites)
      geodesic += sh::io::csv_row({std::to_string(step++), std::to_string(site.first),
                                   std::to_string(site.second)}) +
                  "\n";
  }
  sh::io::write_text_file(out_dir + "/passage.csv", passage);
  sh::io::write_text_file(out_dir + "/geodesic.csv", geodesic);
  std::printf("wrote %s/passage.csv and %s/geodesic.csv\n", out_dir.c_str(), out_dir.c_str());
  return 0;
}

int cmd_sample_horizon(std::uint64_t seed, double grid_min, double grid_max, double step,
                       std::vector<double> xi, const std::string& out_dir) {
  if (xi.empty()) xi = {-1.0, 0.0, 1.0};
  const auto hs = sh::horizon::sample_horizon(xi, {grid_min, grid_max, step}, seed);
  sh::io::ensure_dir(out_dir);
  std::string csv = "x";
  for (std::size_t i = 1; i <= xi.size(); ++i) csv += ",line_" + std::to_string(i);
  csv += "\n";
  for (Eigen::Index i = 0; i < hs.lines[0].size(); ++i) {
    std::vector<std::string> cells{sh::io::format17(hs.lines[0].x_at(i))};
    for (const auto& line : hs.lines) cells.push_back(sh::io::format17(line.values[i]));
    csv += sh::io::csv_row(cells) + "\n";
  }
  sh::io::write_text_file(out_dir + "/lines.csv", csv);
  std::printf("wrote %s/lines.csv (%zu lines)\n", out_dir.c_str(), xi.size());
  return 0;
}

int cmd_busemann(std::uint64_t seed, double rho, std::vector<std::int64_t> schedule,
                 const std::string& out_dir) {
  if (schedule.empty()) schedule = {64, 128, 256, 512};
  std::vector<std::pair<sh::lattice::Site, sh::lattice::Site>> pairs;
  for (std::int64_t c = 0; c < 4; ++c) pairs.push_back({{c, 0}, {c + 1, 0}});
  for (std::int64_t n = 0; n < 4; ++n) pairs.push_back({{0, n}, {0, n + 1}});
  const auto est = sh::scaling::busemann_estimate(rho, pairs, schedule, seed);
  sh::io::ensure_dir(out_dir);
  std::string csv = "pair,from_col,from_row,to_col,to_row,difference\n";
  for (std::size_t i = 0; i < pairs.size(); ++i)
    csv += sh::io::csv_row({std::to_string(i), std::to_string(pairs[i].first.first),
                            std::to_string(pairs[i].first.second),
                            std::to_string(pairs[i].second.first),
                            std::to_string(pairs[i].second.second),
                            sh::io::format17(est.values[i])}) +
           "\n";
  sh::io::write_text_file(out_dir + "/busemann.csv", csv);
  std::printf("wrote %s/busemann.csv (stabilized: %s, corners used: %lld)\n", out_dir.c_str(),
              est.stabilized ? "yes" : "no", static_cast<long long>(est.n_used));
  return 0;
}

int cmd_report(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(sh::io::read_text_file(path));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot read report: %s\n", e.what());
    return 1;
  }
  if (!doc.is_array() || doc.empty()) {
    std::fprintf(stderr, "report must be a non-empty JSON array\n");
    return 1;
  }
  int passed = 0;
  for (const auto& entry : doc) {
    const bool ok = entry.value("pass", false);
    passed += ok ? 1 : 0;
    std::printf("%-40s statistic=%-12.6g score=%-10.4g %s\n",
                entry.value("suite", std::string("?")).c_str(), entry.value("statistic", 0.0),
                entry.value("score", 0.0), ok ? "pass" : "FAIL");
  }
  std::printf("%d/%zu pass\n", passed, doc.size());
  return passed == static_cast<int>(doc.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stationary-horizon simulator and verification harness"};
  app.require_subcommand(1);

  // sample-lpp
  auto* lpp = app.add_subcommand("sample-lpp", "sample a lattice passage-time table and geodesic");
  std::uint64_t lpp_seed = 1;
  std::int64_t lpp_width = 64, lpp_height = 64;
  double lpp_rho = 0.0;
  std::string lpp_out = "out";
  lpp->add_option("--seed", lpp_seed, "seed");
  lpp->add_option("--width", lpp_width, "columns")->check(CLI::PositiveNumber);
  lpp->add_option("--height", lpp_height, "rows")->check(CLI::PositiveNumber);
  lpp->add_option("--rho", lpp_rho, "boundary density in (0,1); 0 = narrow wedge");
  lpp->add_option("--out", lpp_out, "output directory");

  // sample-horizon
  auto* hor = app.add_subcommand("sample-horizon", "sample a joint horizon line family");
  std::uint64_t hor_seed = 1;
  double hor_min = -12.0, hor_max = 2.0, hor_step = 1.0 / 256.0;
  std::vector<double> hor_xi;
  std::string hor_out = "out";
  hor->add_option("--seed", hor_seed, "seed");
  hor->add_option("--grid-min", hor_min, "left grid edge");
  hor->add_option("--grid-max", hor_max, "right grid edge");
  hor->add_option("--step", hor_step, "grid step")->check(CLI::PositiveNumber);
  hor->add_option("--xi", hor_xi, "direction list (default -1 0 1)");
  hor->add_option("--out", hor_out, "output directory");

  // busemann
  auto* bus = app.add_subcommand("busemann", "estimate passage-time differences to a far corner");
  std::uint64_t bus_seed = 1;
  double bus_rho = 0.5;
  std::vector<std::int64_t> bus_schedule;
  std::string bus_out = "out";
  bus->add_option("--seed", bus_seed, "seed");
  bus->add_option("--rho", bus_rho, "direction density")->check(CLI::Range(0.05, 0.95));
  bus->add_option("--schedule", bus_schedule, "corner distances (default 64 128 256 512)");
  bus->add_option("--out", bus_out, "output directory");

  // verify
  auto* ver = app.add_subcommand("verify", "run a verification suite");
  VerifyArgs vargs;
  ver->add_option("name", vargs.suite, "suite name");
  add_verify_flags(ver, vargs);

  // dimension = verify dimension
  auto* dim = app.add_subcommand("dimension", "run the box-dimension probe");
  VerifyArgs dargs;
  add_verify_flags(dim, dargs);

  // report
  auto* rep = app.add_subcommand("report", "summarize a report.json");
  std::string rep_path = "out/report.json";
  rep->add_option("path", rep_path, "path to report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (lpp->parsed()) return cmd_sample_lpp(lpp_seed, lpp_width, lpp_height, lpp_rho, lpp_out);
    if (hor->parsed()) return cmd_sample_horizon(hor_seed, hor_min, hor_max, hor_step, hor_xi, hor_out);
    if (bus->parsed()) return cmd_busemann(bus_seed, bus_rho, bus_schedule, bus_out);
    if (ver->parsed()) return sh::harness::run_experiment(resolve_config(vargs));
    if (dim->parsed()) {
      auto cfg = resolve_config(dargs);
      if (cfg.suite.empty()) cfg.suite = "dimension";
      return sh::harness::run_experiment(cfg);
    }
    if (rep->parsed()) return cmd_report(rep_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
