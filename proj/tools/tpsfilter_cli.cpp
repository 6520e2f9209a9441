// tpsfilter: curate, split, score and filter generated terpene synthase candidates.
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "tpsfilter/tpsfilter.h"

namespace {

constexpr int kExitUsage = 64;

using RunFn = tps_status (*)(const tps_config*, tps_result**);

void print_result(const std::string& command, const tps_result* r) {
  for (size_t i = 0; i < tps_result_warning_count(r); ++i) {
    std::cerr << "warning: " << tps_result_warning(r, i) << '\n';
  }
  std::cout << command << '\n';
  for (size_t i = 0; i < tps_result_stage_count(r); ++i) {
    std::cout << "  " << tps_result_stage_name(r, i) << '\t' << tps_result_stage_input(r, i) << " -> "
              << tps_result_stage_output(r, i) << '\n';
  }
  for (size_t i = 0; i < tps_result_metric_count(r); ++i) {
    std::cout << "  " << tps_result_metric_name(r, i) << '\t' << tps_result_metric_value(r, i) << '\n';
  }
  if (command == "filter" || command == "report") {
    std::cout << "  passing\t";
    for (size_t i = 0; i < tps_result_final_count(r); ++i) std::cout << (i ? "," : "") << tps_result_final_id(r, i);
    std::cout << '\n';
  }
  for (size_t i = 0; i < tps_result_output_count(r); ++i) {
    std::cout << "  wrote " << tps_result_output(r, i) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filter generated terpene synthase sequences"};
  app.set_version_flag("--version", std::string(tps_version()));
  app.require_subcommand(1);

  std::string config_path;
  unsigned threads = 0;
  bool threads_set = false;
  bool strict = false;
  std::string output_dir;
  app.add_option("-c,--config", config_path, "Pipeline configuration (JSON)");
  app.add_option_function<unsigned>(
      "-t,--threads", [&](const unsigned& t) { threads = t; threads_set = true; },
      "Worker threads (0 = all cores)");
  app.add_option("-o,--output-dir", output_dir, "Override the configured output directory");
  app.add_flag("--strict", strict, "Treat warnings about unknown ids and leakage as errors");

  const std::map<std::string, std::pair<std::string, RunFn>> commands{
      {"curate", {"Length, motif, profile-hit and blocklist screens", tps_run_curate}},
      {"split", {"Homology-aware train/validation split", tps_run_split}},
      {"maxid", {"Max identity of queries against a database", tps_run_maxid}},
      {"ingest", {"Validate evidence files and copy them into the store", tps_run_ingest}},
      {"filter", {"Apply the filter chain to the evidence store", tps_run_filter}},
      {"report", {"Filter plus pLDDT distribution and run manifest", tps_run_report}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (config_path.empty()) {
    std::cerr << "error: --config is required\n\n" << app.help();
    return kExitUsage;
  }

  tps_config* cfg = nullptr;
  tps_status st = tps_config_load(config_path.c_str(), &cfg);
  if (st != TPS_OK) {
    std::cerr << "error: " << tps_last_error() << '\n';
    return st;
  }
  if (threads_set) tps_config_set_threads(cfg, threads);
  if (strict) tps_config_set_strict(cfg, 1);
  if (!output_dir.empty()) tps_config_set_output_dir(cfg, output_dir.c_str());

  const std::string command = app.get_subcommands().front()->get_name();
  tps_result* result = nullptr;
  st = commands.at(command).second(cfg, &result);
  if (st != TPS_OK) {
    std::cerr << "error: " << tps_last_error() << '\n';
  } else {
    print_result(command, result);
  }
  tps_result_free(result);
  tps_config_free(cfg);
  return st;
}
