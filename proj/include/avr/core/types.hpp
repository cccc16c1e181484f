#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace avr {

enum class ContentKind { game, animation };
enum class Difficulty { easy_moderate, hard };

std::string_view to_string(ContentKind kind);
std::string_view to_string(Difficulty difficulty);
ContentKind parse_content_kind(std::string_view token);
Difficulty parse_difficulty(std::string_view token);

/// One benchmark item.
struct ContentSpec {
  std::string id;
  ContentKind kind = ContentKind::game;
  std::string title;
  std::string description;
  Difficulty difficulty = Difficulty::easy_moderate;

  /// "Title - description", the form the content is presented to models in.
  std::string full_description() const;
  bool operator==(const ContentSpec&) const = default;
};

enum class VersionStage { initial_candidate, best_initial, improved, error_fix };

std::string_view to_string(VersionStage stage);
VersionStage parse_version_stage(std::string_view token);

/// One generated single-file web document and where it came from.
struct ContentVersion {
  int version_id = 0;
  std::string source;
  VersionStage stage = VersionStage::initial_candidate;
  int iteration = 0;
  std::optional<int> parent;
  std::string producer;

  bool operator==(const ContentVersion&) const = default;
};

/// Throws ValidationError when the lineage invariants do not hold.
void validate(const ContentVersion& version);

/// Zero-padded file stem used for every per-version artifact ("v007").
std::string version_stem(int version_id);

struct RecordOptions {
  double duration_s = 20.0;
  int fps = 30;
  int width_px = 640;
  int height_px = 480;
  int audio_sample_rate_hz = 44100;
  int start_wait_ms = 1000;
  int load_timeout_ms = 15000;

  bool operator==(const RecordOptions&) const = default;
};

void validate(const RecordOptions& opts);

struct RunConfig {
  std::string coder_model;
  std::string omni_model;
  std::string reviewer_model;
  int k_initial = 1;
  int improve_iters = 0;
  bool with_assets = false;
  bool with_feedback = false;
  bool omni_direct = false;
  int error_fix_budget = 2;
  RecordOptions record_opts;
  double gen_temperature = 0.8;
  double improve_temperature = 0.2;
  double eval_temperature = 0.0;
  std::int64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

/// Range and sign checks only; capability checks live with the agent.
void validate(const RunConfig& config);

}  // namespace avr
