// pmfspoof command-line driver.
//
//   pmfspoof <stage> --config run.json [--seed N] [--no-gender-split] [--lenient]
//   pmfspoof --stage <stage> --config run.json
//
// Exit codes: 0 success, 1 usage or configuration, 2 data, 3 numeric.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pmfspoof/error.hpp"
#include "pmfspoof/pipeline.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumeric = 3;

const std::vector<std::string> kStages = {"synth-gen", "build-models", "extract",      "dm-fit", "dm-extend",
                                          "train",     "evaluate",     "export-plots", "run-all"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PMF-based spoofing countermeasure pipeline"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string stage_name;
  std::optional<std::uint64_t> seed;
  bool no_gender_split = false;
  bool lenient = false;
  std::string log_level = "info";

  app.add_option("--config", config_path, "pipeline config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--stage", stage_name, "stage to run when no subcommand is given")
      ->check(CLI::IsMember(kStages));
  app.add_option("--seed", seed, "override synth and diffusion-map seeds");
  app.add_flag("--no-gender-split", no_gender_split, "pool both genders into one bucket");
  app.add_flag("--lenient", lenient, "skip unreadable audio files instead of failing");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  for (const auto& s : kStages) app.add_subcommand(s, "run stage " + s)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  std::string chosen = stage_name;
  for (auto* sub : app.get_subcommands()) {
    if (!chosen.empty() && chosen != sub->get_name()) {
      std::fprintf(stderr, "error: --stage %s conflicts with subcommand %s\n", chosen.c_str(),
                   sub->get_name().c_str());
      return kUsage;
    }
    chosen = sub->get_name();
  }
  if (chosen.empty()) {
    std::fprintf(stderr, "error: no stage given\n%s", app.help().c_str());
    return kUsage;
  }
  if (config_path.empty()) {
    std::fprintf(stderr, "error: --config is required\n");
    return kUsage;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("pmfspoof"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    auto cfg = pmfspoof::load_config(config_path);
    pmfspoof::apply_overrides(cfg, {seed, no_gender_split, lenient});
    pmfspoof::run_stage(cfg, pmfspoof::parse_stage(chosen));
  } catch (const pmfspoof::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const pmfspoof::DataError& e) {
    spdlog::error("{}", e.what());
    return kData;
  } catch (const pmfspoof::NumericError& e) {
    spdlog::error("{}", e.what());
    return kNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kData;
  }
  return 0;
}
