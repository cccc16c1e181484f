#include "av_util.hpp"

#include "avr/core/errors.hpp"

namespace avr::media::detail {

std::string av_error(int code) {
  char buf[AV_ERROR_MAX_STRING_SIZE] = {};
  av_strerror(code, buf, sizeof buf);
  return buf;
}

int check(int code, const std::string& what) {
  if (code < 0) throw RuntimeFailure(what + ": " + av_error(code));
  return code;
}

void OutputCloser::operator()(AVFormatContext* ctx) const {
  if (!ctx) return;
  if (ctx->pb && !(ctx->oformat->flags & AVFMT_NOFILE)) avio_closep(&ctx->pb);
  avformat_free_context(ctx);
}

FramePtr make_frame() {
  FramePtr f(av_frame_alloc());
  if (!f) throw RuntimeFailure("av_frame_alloc failed");
  return f;
}

PacketPtr make_packet() {
  PacketPtr p(av_packet_alloc());
  if (!p) throw RuntimeFailure("av_packet_alloc failed");
  return p;
}

InputPtr open_input(const std::filesystem::path& path) {
  av_log_set_level(AV_LOG_ERROR);
  AVFormatContext* raw = nullptr;
  check(avformat_open_input(&raw, path.c_str(), nullptr, nullptr), "open " + path.string());
  InputPtr ctx(raw);
  check(avformat_find_stream_info(ctx.get(), nullptr), "stream info for " + path.string());
  return ctx;
}

CodecPtr open_decoder(AVFormatContext* fmt, int index) {
  const auto* par = fmt->streams[index]->codecpar;
  const AVCodec* codec = avcodec_find_decoder(par->codec_id);
  // libvpx decodes VP8 alpha side data the built-in decoder ignores; either is fine.
  if (!codec) throw RuntimeFailure(std::string("no decoder for ") + avcodec_get_name(par->codec_id));
  CodecPtr ctx(avcodec_alloc_context3(codec));
  if (!ctx) throw RuntimeFailure("avcodec_alloc_context3 failed");
  check(avcodec_parameters_to_context(ctx.get(), par), "decoder parameters");
  ctx->thread_count = 1;
  check(avcodec_open2(ctx.get(), codec, nullptr), std::string("open decoder ") + codec->name);
  return ctx;
}

OutputPtr open_output(const std::filesystem::path& path, const char* format_name) {
  av_log_set_level(AV_LOG_ERROR);
  AVFormatContext* raw = nullptr;
  check(avformat_alloc_output_context2(&raw, nullptr, format_name, path.c_str()), "output " + path.string());
  OutputPtr ctx(raw);
  ctx->flags |= AVFMT_FLAG_BITEXACT;
  return ctx;
}

int channel_count(const AVCodecContext* ctx) {
  if (ctx->channels > 0) return ctx->channels;
  return ctx->channel_layout ? av_get_channel_layout_nb_channels(ctx->channel_layout) : 1;
}

std::int64_t channel_layout_of(const AVCodecContext* ctx) {
  if (ctx->channel_layout) return static_cast<std::int64_t>(ctx->channel_layout);
  return av_get_default_channel_layout(channel_count(ctx));
}

}  // namespace avr::media::detail
