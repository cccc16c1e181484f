#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "avr/core/run_handle.hpp"
#include "avr/recorder/recorder.hpp"

namespace avr::recorder {

struct StoredRecording {
  AVRecording recording;
  ConsoleLog log;
  std::vector<std::string> warnings;
};

/// Records `version` and stages `recordings/vNNN.webm` and
/// `logs/vNNN.console.jsonl` in the step. The run directory is served so
/// `assets/...` references resolve.
StoredRecording record_into(Recorder& recorder, StepTx& tx, const ContentVersion& version, const RecordOptions& opts);

/// Step payload describing a stored recording (paths relative to the run).
nlohmann::json to_step_data(const StoredRecording& stored, const fs::path& run_dir);
/// Inverse of to_step_data; reads the console log back from the run.
StoredRecording load_stored(const nlohmann::json& data, const fs::path& run_dir);

}  // namespace avr::recorder
