#pragma once

// Media probe, analysis and synthesis. Everything here goes through libav so
// that recordings are decoded by the same code regardless of who produced
// them (browser shim, simulated recorder, test fixtures).

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace avr::media {

struct MediaStats {
  double duration_s = 0.0;
  bool has_video = false;
  bool has_audio = false;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  /// Mean over pixels of the temporal variance of luma across sampled frames.
  double frame_variance = 0.0;
  /// RMS of every decoded sample, normalized to [-1, 1].
  double audio_rms = 0.0;
  std::size_t frames_sampled = 0;
  std::size_t audio_samples = 0;
};

struct AnalyzeOptions {
  double sample_fps = 2.0;
  int analysis_width = 160;
};

/// Decodes the whole file. Throws RuntimeFailure if it cannot be opened or
/// holds neither a video nor an audio stream.
MediaStats analyze(const std::filesystem::path& path, const AnalyzeOptions& opts = {});

/// Duration from the container header alone (no decoding). Throws when the
/// header carries none.
double container_duration(const std::filesystem::path& path);

/// Per-pixel running variance over a sequence of equally sized gray frames.
class FrameVarianceAccumulator {
 public:
  void add(std::span<const std::uint8_t> gray);
  double mean_variance() const;
  std::size_t frames() const { return frames_; }

 private:
  std::size_t frames_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

double rms(std::span<const float> samples);

using Rgb = std::array<std::uint8_t, 3>;

/// Parameters for a generated test clip: a box over a solid background and
/// an optional gated sine beep.
struct SynthSpec {
  double duration_s = 5.0;
  int fps = 30;
  int width = 320;
  int height = 240;
  bool motion = true;
  /// Box travel in pixels per second.
  double speed_px_s = 160.0;
  bool audio = true;
  double tone_hz = 440.0;
  double beep_period_s = 0.5;
  double audio_start_s = 0.0;
  Rgb background{16, 16, 48};
  Rgb box{240, 200, 40};
};

/// Writes a WebM (VP8 video, Opus audio when `spec.audio`). Output bytes are
/// a pure function of `spec`.
void synthesize_webm(const std::filesystem::path& out, const SynthSpec& spec);

/// Re-encodes the video stream at no more than `max_fps` (WebM, no audio).
/// Returns false when the input has no video.
bool downsample_video(const std::filesystem::path& in, const std::filesystem::path& out, double max_fps);

/// Decodes the audio stream to mono 16-bit PCM WAV at `sample_rate_hz`.
/// Returns false when the input has no audio.
bool extract_audio_wav(const std::filesystem::path& in, const std::filesystem::path& out, int sample_rate_hz);

}  // namespace avr::media
