#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <iosfwd>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "avr/analysis/analysis.hpp"
#include "avr/core/run_handle.hpp"
#include "avr/core/types.hpp"
#include "avr/evaluator/evaluator.hpp"
#include "avr/gateway/registry.hpp"
#include "avr/recorder/recorder.hpp"

namespace avr::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2, kPartial = 3 };

struct RecorderConfig {
  /// simulated, browser or auto.
  std::string kind = "auto";
  recorder::BrowserOptions browser;
};

struct ExperimentConfig {
  /// Coder clients compared as "models"; the first is the regression baseline.
  std::vector<std::string> models;
  /// Benchmark ids; empty means the easy-moderate set.
  std::vector<std::string> specs;
  /// Setting indices 0..7; empty means all eight.
  std::vector<int> settings;
  /// k used when a setting asks for best-of-k initial content.
  int k_best = 3;
  fs::path asset_root;
};

struct EngineConfig {
  std::vector<gateway::ClientSpec> models;
  RunConfig run;
  evaluator::EvalMode eval_mode;
  RecorderConfig recorder;
  ExperimentConfig experiment;
  /// Directory of the config file; relative paths resolve against it.
  fs::path base_dir;
};

/// YAML scalars, maps and sequences as JSON; quoted scalars stay strings.
nlohmann::json yaml_to_json(const YAML::Node& node);

EngineConfig parse_config(const std::string& text, const std::string& source_name, const fs::path& base_dir = {});
EngineConfig load_config(const fs::path& path);

/// Configured model specs; under `mock`, missing roles get default mocks.
gateway::ClientRegistry build_registry(const EngineConfig& config, bool mock);
recorder::RecorderPtr build_recorder(const EngineConfig& config, bool mock);

/// Stored recording of a finished run's final (or best-of-k initial)
/// version, recorded on demand. `label` replaces the side's content id.
std::optional<evaluator::Side> run_side(const fs::path& run_dir, bool final_stage, recorder::Recorder& rec,
                                        const std::string& label = {});
/// Same for any version of an open run.
std::optional<evaluator::Side> version_side(RunHandle& run, int version_id, recorder::Recorder& rec);

struct ExperimentSummary {
  std::size_t runs = 0;
  std::size_t failed_runs = 0;
  std::size_t comparisons = 0;
  std::size_t rows = 0;
};

/// Runs every arm the dataset needs under `out/runs/`, then judges the
/// comparisons into `out/dataset-<x>/comparisons/`. Existing runs and
/// comparison records are reused.
ExperimentSummary execute_experiment(analysis::Dataset dataset, const EngineConfig& config,
                                     gateway::ClientRegistry& registry, recorder::Recorder& recorder,
                                     const fs::path& out, std::size_t workers, std::ostream& log);

/// Full command line, argv[0] included. Returns the process exit code.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace avr::cli
