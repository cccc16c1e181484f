#include <unistd.h>

#include "avr/core/io.hpp"
#include "avr/recorder/run_io.hpp"

namespace avr::recorder {

StoredRecording record_into(Recorder& recorder, StepTx& tx, const ContentVersion& version,
                            const RecordOptions& opts) {
  const auto stem = version_stem(version.version_id);
  const auto scratch = fs::temp_directory_path() /
                       ("avr-rec-" + std::to_string(::getpid()) + "-" + tx.name().substr(tx.name().find('/') + 1) +
                        "-" + stem + ".webm");
  RecordJob job{version.source, tx.root(), scratch, opts};
  RecordResult result;
  try {
    result = recorder.record(job);
  } catch (...) {
    std::error_code ec;
    fs::remove(scratch, ec);
    throw;
  }
  StoredRecording out{result.recording, result.log, result.warnings};
  out.recording.media_path = tx.copy_in(scratch, fs::path("recordings") / (stem + ".webm"));
  std::error_code ec;
  fs::remove(scratch, ec);
  tx.write(fs::path("logs") / (stem + ".console.jsonl"), out.log.to_jsonl());
  return out;
}

nlohmann::json to_step_data(const StoredRecording& stored, const fs::path& run_dir) {
  const auto media = stored.recording.media_path.lexically_relative(run_dir);
  const auto stem = stored.recording.media_path.stem().string();
  return {{"recording", to_json(stored.recording, run_dir)},
          {"log", (fs::path("logs") / (stem + ".console.jsonl")).generic_string()},
          {"error_count", stored.log.error_count()},
          {"warn_count", stored.log.warn_count()},
          {"warnings", stored.warnings}};
}

StoredRecording load_stored(const nlohmann::json& data, const fs::path& run_dir) {
  StoredRecording out;
  out.recording = recording_from(data.at("recording"), run_dir);
  out.log = ConsoleLog::from_jsonl(io::read_file(run_dir / data.at("log").get<std::string>()));
  out.warnings = data.value("warnings", std::vector<std::string>{});
  return out;
}

}  // namespace avr::recorder
