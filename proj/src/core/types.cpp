#include "avr/core/types.hpp"

#include <cstdio>

#include "avr/core/errors.hpp"

namespace avr {

std::string_view to_string(ContentKind kind) {
  switch (kind) {
    case ContentKind::game:
      return "game";
    case ContentKind::animation:
      return "animation";
  }
  return "?";
}

std::string_view to_string(Difficulty difficulty) {
  return difficulty == Difficulty::hard ? "hard" : "easy_moderate";
}

ContentKind parse_content_kind(std::string_view token) {
  if (token == "game") return ContentKind::game;
  if (token == "animation") return ContentKind::animation;
  throw ValidationError("unknown content kind '" + std::string(token) + "' (expected game|animation)");
}

Difficulty parse_difficulty(std::string_view token) {
  if (token == "easy_moderate") return Difficulty::easy_moderate;
  if (token == "hard") return Difficulty::hard;
  throw ValidationError("unknown difficulty '" + std::string(token) + "' (expected easy_moderate|hard)");
}

std::string ContentSpec::full_description() const {
  if (title.empty()) return description;
  return title + " - " + description;
}

std::string_view to_string(VersionStage stage) {
  switch (stage) {
    case VersionStage::initial_candidate:
      return "initial_candidate";
    case VersionStage::best_initial:
      return "best_initial";
    case VersionStage::improved:
      return "improved";
    case VersionStage::error_fix:
      return "error_fix";
  }
  return "?";
}

VersionStage parse_version_stage(std::string_view token) {
  if (token == "initial_candidate") return VersionStage::initial_candidate;
  if (token == "best_initial") return VersionStage::best_initial;
  if (token == "improved") return VersionStage::improved;
  if (token == "error_fix") return VersionStage::error_fix;
  throw ValidationError("unknown version stage '" + std::string(token) + "'");
}

void validate(const ContentVersion& v) {
  if (v.version_id <= 0) throw ValidationError("version_id must be positive");
  if (v.iteration < 0) throw ValidationError("iteration must be non-negative");
  switch (v.stage) {
    case VersionStage::initial_candidate:
      if (v.iteration != 0 || v.parent)
        throw ValidationError("initial candidate " + version_stem(v.version_id) +
                              " must have iteration 0 and no parent");
      break;
    case VersionStage::best_initial:
    case VersionStage::improved:
    case VersionStage::error_fix:
      if (!v.parent)
        throw ValidationError(version_stem(v.version_id) + " (" + std::string(to_string(v.stage)) +
                              ") requires a parent");
      if (*v.parent >= v.version_id)
        throw ValidationError(version_stem(v.version_id) + " has parent " + version_stem(*v.parent) +
                              " that is not older");
      break;
  }
}

std::string version_stem(int version_id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%03d", version_id);
  return buf;
}

void validate(const RecordOptions& o) {
  if (!(o.duration_s >= 1.0)) throw ValidationError("record duration_s must be >= 1");
  if (o.fps < 1) throw ValidationError("record fps must be >= 1");
  if (o.width_px < 1 || o.height_px < 1) throw ValidationError("record viewport must be positive");
  if (o.audio_sample_rate_hz < 1) throw ValidationError("audio_sample_rate_hz must be positive");
  if (o.start_wait_ms < 0) throw ValidationError("start_wait_ms must be non-negative");
  if (o.load_timeout_ms < 1) throw ValidationError("load_timeout_ms must be positive");
}

void validate(const RunConfig& c) {
  if (c.k_initial < 1) throw ValidationError("k_initial must be >= 1");
  if (c.improve_iters < 0) throw ValidationError("improve_iters must be >= 0");
  if (c.error_fix_budget < 0) throw ValidationError("error_fix_budget must be >= 0");
  auto temp_ok = [](double t) { return t >= 0.0 && t <= 2.0; };
  if (!temp_ok(c.gen_temperature) || !temp_ok(c.improve_temperature) || !temp_ok(c.eval_temperature))
    throw ValidationError("temperatures must lie in [0, 2]");
  validate(c.record_opts);
}

}  // namespace avr
