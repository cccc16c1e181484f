#include "encoder.hpp"

#include <algorithm>

#include "avr/core/errors.hpp"

namespace avr::media::detail {
namespace {

void write_packets(AVFormatContext* out, AVCodecContext* ctx, AVStream* st, AVPacket* pkt) {
  for (;;) {
    const int r = avcodec_receive_packet(ctx, pkt);
    if (r == AVERROR(EAGAIN) || r == AVERROR_EOF) return;
    check(r, "receive packet");
    av_packet_rescale_ts(pkt, ctx->time_base, st->time_base);
    pkt->stream_index = st->index;
    check(av_interleaved_write_frame(out, pkt), "write packet");
  }
}

}  // namespace

VideoEncoder::VideoEncoder(AVFormatContext* out, int width, int height, int fps)
    : out_(out), frame_(make_frame()), pkt_(make_packet()) {
  const AVCodec* codec = avcodec_find_encoder_by_name("libvpx");
  if (!codec) throw RuntimeFailure("VP8 encoder (libvpx) unavailable");
  stream_ = avformat_new_stream(out, nullptr);
  if (!stream_) throw RuntimeFailure("cannot add video stream");
  ctx_.reset(avcodec_alloc_context3(codec));
  ctx_->width = width;
  ctx_->height = height;
  ctx_->time_base = AVRational{1, fps};
  ctx_->framerate = AVRational{fps, 1};
  ctx_->pix_fmt = AV_PIX_FMT_YUV420P;
  ctx_->bit_rate = 800'000;
  ctx_->gop_size = fps * 2;
  ctx_->thread_count = 1;
  ctx_->flags |= AV_CODEC_FLAG_BITEXACT;
  if (out->oformat->flags & AVFMT_GLOBALHEADER) ctx_->flags |= AV_CODEC_FLAG_GLOBAL_HEADER;
  av_opt_set(ctx_->priv_data, "deadline", "realtime", 0);
  av_opt_set(ctx_->priv_data, "cpu-used", "8", 0);
  check(avcodec_open2(ctx_.get(), codec, nullptr), "open VP8 encoder");
  check(avcodec_parameters_from_context(stream_->codecpar, ctx_.get()), "video stream parameters");
  stream_->time_base = ctx_->time_base;

  frame_->format = AV_PIX_FMT_YUV420P;
  frame_->width = width;
  frame_->height = height;
  check(av_frame_get_buffer(frame_.get(), 0), "video frame buffer");
}

AVFrame* VideoEncoder::next_frame() {
  check(av_frame_make_writable(frame_.get()), "video frame writable");
  return frame_.get();
}

void VideoEncoder::submit(std::int64_t pts) {
  frame_->pts = pts;
  drain(frame_.get());
}

void VideoEncoder::flush() { drain(nullptr); }

void VideoEncoder::drain(AVFrame* frame) {
  check(avcodec_send_frame(ctx_.get(), frame), "encode video");
  write_packets(out_, ctx_.get(), stream_, pkt_.get());
}

AudioEncoder::AudioEncoder(AVFormatContext* out, int sample_rate)
    : out_(out), frame_(make_frame()), pkt_(make_packet()) {
  const AVCodec* codec = avcodec_find_encoder_by_name("libopus");
  if (!codec) throw RuntimeFailure("Opus encoder (libopus) unavailable");
  stream_ = avformat_new_stream(out, nullptr);
  if (!stream_) throw RuntimeFailure("cannot add audio stream");
  ctx_.reset(avcodec_alloc_context3(codec));
  ctx_->sample_rate = sample_rate;
  ctx_->channel_layout = AV_CH_LAYOUT_MONO;
  ctx_->channels = 1;
  ctx_->sample_fmt = AV_SAMPLE_FMT_FLT;
  if (codec->sample_fmts) {
    bool has_flt = false;
    for (auto* f = codec->sample_fmts; *f != AV_SAMPLE_FMT_NONE; ++f) has_flt |= *f == AV_SAMPLE_FMT_FLT;
    if (!has_flt) throw RuntimeFailure("Opus encoder lacks float input");
  }
  ctx_->bit_rate = 64'000;
  ctx_->time_base = AVRational{1, sample_rate};
  ctx_->thread_count = 1;
  ctx_->flags |= AV_CODEC_FLAG_BITEXACT;
  if (out->oformat->flags & AVFMT_GLOBALHEADER) ctx_->flags |= AV_CODEC_FLAG_GLOBAL_HEADER;
  check(avcodec_open2(ctx_.get(), codec, nullptr), "open Opus encoder");
  check(avcodec_parameters_from_context(stream_->codecpar, ctx_.get()), "audio stream parameters");
  stream_->time_base = ctx_->time_base;

  frame_->format = AV_SAMPLE_FMT_FLT;
  frame_->channel_layout = AV_CH_LAYOUT_MONO;
  frame_->channels = 1;
  frame_->sample_rate = sample_rate;
  frame_->nb_samples = frame_size();
  check(av_frame_get_buffer(frame_.get(), 0), "audio frame buffer");
}

void AudioEncoder::submit(std::span<const float> samples, std::int64_t pts) {
  check(av_frame_make_writable(frame_.get()), "audio frame writable");
  auto* dst = reinterpret_cast<float*>(frame_->data[0]);
  const auto n = static_cast<std::size_t>(frame_size());
  std::fill_n(dst, n, 0.0f);
  std::copy_n(samples.begin(), std::min(n, samples.size()), dst);
  frame_->nb_samples = frame_size();
  frame_->pts = pts;
  drain(frame_.get());
}

void AudioEncoder::flush() { drain(nullptr); }

void AudioEncoder::drain(AVFrame* frame) {
  check(avcodec_send_frame(ctx_.get(), frame), "encode audio");
  write_packets(out_, ctx_.get(), stream_, pkt_.get());
}

void open_file_and_header(AVFormatContext* out, const std::filesystem::path& path) {
  if (!(out->oformat->flags & AVFMT_NOFILE))
    check(avio_open(&out->pb, path.c_str(), AVIO_FLAG_WRITE), "create " + path.string());
  check(avformat_write_header(out, nullptr), "write header");
}

}  // namespace avr::media::detail
