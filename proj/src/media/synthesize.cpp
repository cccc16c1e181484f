#include <cmath>
#include <numbers>

#include "av_util.hpp"
#include "avr/core/errors.hpp"
#include "avr/media/media.hpp"
#include "encoder.hpp"

namespace avr::media {

using namespace detail;

namespace {

struct Yuv {
  std::uint8_t y, u, v;
};

Yuv to_yuv(const Rgb& c) {
  const double r = c[0], g = c[1], b = c[2];
  auto clamp = [](double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 255.0))); };
  return {clamp(16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0),
          clamp(128.0 + (-37.797 * r - 74.203 * g + 112.0 * b) / 255.0),
          clamp(128.0 + (112.0 * r - 93.786 * g - 18.214 * b) / 255.0)};
}

void fill_rect(AVFrame* f, int x0, int y0, int w, int h, Yuv c) {
  for (int y = y0; y < y0 + h; ++y) {
    std::fill_n(f->data[0] + static_cast<std::ptrdiff_t>(y) * f->linesize[0] + x0, w, c.y);
  }
  for (int y = y0 / 2; y < (y0 + h + 1) / 2; ++y) {
    std::fill_n(f->data[1] + static_cast<std::ptrdiff_t>(y) * f->linesize[1] + x0 / 2, (w + 1) / 2, c.u);
    std::fill_n(f->data[2] + static_cast<std::ptrdiff_t>(y) * f->linesize[2] + x0 / 2, (w + 1) / 2, c.v);
  }
}

int box_x(const SynthSpec& s, int box, double t) {
  const int travel = s.width - box;
  if (!s.motion || travel <= 0) return std::max(0, travel / 2) & ~1;
  const double pos = std::fmod(t * s.speed_px_s, 2.0 * travel);
  const double x = pos < travel ? pos : 2.0 * travel - pos;
  return static_cast<int>(x) & ~1;
}

float beep_sample(const SynthSpec& s, double t) {
  if (t < s.audio_start_s) return 0.0f;
  const double local = t - s.audio_start_s;
  if (std::fmod(local, s.beep_period_s) >= s.beep_period_s / 2.0) return 0.0f;
  return static_cast<float>(0.3 * std::sin(2.0 * std::numbers::pi * s.tone_hz * local));
}

}  // namespace

void synthesize_webm(const std::filesystem::path& out_path, const SynthSpec& s) {
  if (s.duration_s <= 0 || s.fps < 1 || s.width < 16 || s.height < 16 || (s.width % 2) || (s.height % 2))
    throw ValidationError("synthesize_webm: bad clip parameters");

  auto out = open_output(out_path, "webm");
  VideoEncoder venc(out.get(), s.width, s.height, s.fps);
  std::unique_ptr<AudioEncoder> aenc;
  if (s.audio) aenc = std::make_unique<AudioEncoder>(out.get(), 48000);
  open_file_and_header(out.get(), out_path);

  const int box = std::max(8, std::min(s.width, s.height) / 4) & ~1;
  const int box_y = ((s.height - box) / 2) & ~1;
  const Yuv bg = to_yuv(s.background);
  const Yuv fg = to_yuv(s.box);
  const auto total_frames = static_cast<std::int64_t>(std::llround(s.duration_s * s.fps));
  const auto total_samples = static_cast<std::int64_t>(std::llround(s.duration_s * 48000.0));

  std::int64_t frame_index = 0;
  std::int64_t sample_index = 0;
  std::vector<float> chunk;
  while (frame_index < total_frames || (aenc && sample_index < total_samples)) {
    const double vt = static_cast<double>(frame_index) / s.fps;
    const double at = static_cast<double>(sample_index) / 48000.0;
    const bool video_next = frame_index < total_frames && (!aenc || sample_index >= total_samples || vt <= at);
    if (video_next) {
      AVFrame* f = venc.next_frame();
      fill_rect(f, 0, 0, s.width, s.height, bg);
      fill_rect(f, box_x(s, box, vt), box_y, box, box, fg);
      venc.submit(frame_index++);
    } else {
      const int n = static_cast<int>(std::min<std::int64_t>(aenc->frame_size(), total_samples - sample_index));
      chunk.resize(n);
      for (int i = 0; i < n; ++i) chunk[i] = beep_sample(s, static_cast<double>(sample_index + i) / 48000.0);
      aenc->submit(chunk, sample_index);
      sample_index += n;
    }
  }
  venc.flush();
  if (aenc) aenc->flush();
  check(av_write_trailer(out.get()), "write trailer");
}

}  // namespace avr::media
