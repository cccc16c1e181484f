#pragma once

extern "C" {
#include <libavcodec/avcodec.h>
#include <libavformat/avformat.h>
#include <libavutil/channel_layout.h>
#include <libavutil/imgutils.h>
#include <libavutil/opt.h>
#include <libswresample/swresample.h>
#include <libswscale/swscale.h>
}

#include <filesystem>
#include <memory>
#include <string>

namespace avr::media::detail {

std::string av_error(int code);
/// Throws RuntimeFailure("<what>: <libav message>") when code < 0.
int check(int code, const std::string& what);

struct InputCloser {
  void operator()(AVFormatContext* ctx) const { avformat_close_input(&ctx); }
};
struct OutputCloser {
  void operator()(AVFormatContext* ctx) const;
};
struct CodecCloser {
  void operator()(AVCodecContext* ctx) const { avcodec_free_context(&ctx); }
};
struct FrameCloser {
  void operator()(AVFrame* f) const { av_frame_free(&f); }
};
struct PacketCloser {
  void operator()(AVPacket* p) const { av_packet_free(&p); }
};
struct SwsCloser {
  void operator()(SwsContext* s) const { sws_freeContext(s); }
};
struct SwrCloser {
  void operator()(SwrContext* s) const { swr_free(&s); }
};

using InputPtr = std::unique_ptr<AVFormatContext, InputCloser>;
using OutputPtr = std::unique_ptr<AVFormatContext, OutputCloser>;
using CodecPtr = std::unique_ptr<AVCodecContext, CodecCloser>;
using FramePtr = std::unique_ptr<AVFrame, FrameCloser>;
using PacketPtr = std::unique_ptr<AVPacket, PacketCloser>;
using SwsPtr = std::unique_ptr<SwsContext, SwsCloser>;
using SwrPtr = std::unique_ptr<SwrContext, SwrCloser>;

FramePtr make_frame();
PacketPtr make_packet();

InputPtr open_input(const std::filesystem::path& path);
/// Opens a decoder for stream `index` of `fmt`.
CodecPtr open_decoder(AVFormatContext* fmt, int index);
/// Output context for `path` with bit-exact muxing; the file is opened on
/// the first write_header call.
OutputPtr open_output(const std::filesystem::path& path, const char* format_name);

/// Channel count for a decoder context (libav 58 API).
int channel_count(const AVCodecContext* ctx);
std::int64_t channel_layout_of(const AVCodecContext* ctx);

}  // namespace avr::media::detail
