#pragma once

#include <filesystem>
#include <span>

#include "av_util.hpp"

namespace avr::media::detail {

/// VP8 stream in an output context. Single-threaded and bit-exact.
class VideoEncoder {
 public:
  VideoEncoder(AVFormatContext* out, int width, int height, int fps);
  /// Writable YUV420P frame for the next submit().
  AVFrame* next_frame();
  void submit(std::int64_t pts);
  void flush();

 private:
  void drain(AVFrame* frame);

  AVFormatContext* out_;
  AVStream* stream_ = nullptr;
  CodecPtr ctx_;
  FramePtr frame_;
  PacketPtr pkt_;
};

/// Mono Opus stream at `sample_rate` (48 kHz is the only rate every Opus
/// build accepts).
class AudioEncoder {
 public:
  AudioEncoder(AVFormatContext* out, int sample_rate);
  int frame_size() const { return ctx_->frame_size > 0 ? ctx_->frame_size : 960; }
  /// `samples.size()` must not exceed frame_size().
  void submit(std::span<const float> samples, std::int64_t pts);
  void flush();

 private:
  void drain(AVFrame* frame);

  AVFormatContext* out_;
  AVStream* stream_ = nullptr;
  CodecPtr ctx_;
  FramePtr frame_;
  PacketPtr pkt_;
};

void open_file_and_header(AVFormatContext* out, const std::filesystem::path& path);

}  // namespace avr::media::detail
