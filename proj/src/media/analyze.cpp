#include <cmath>
#include <limits>
#include <vector>

#include "av_util.hpp"
#include "avr/core/errors.hpp"
#include "avr/media/media.hpp"

namespace avr::media {

using namespace detail;

void FrameVarianceAccumulator::add(std::span<const std::uint8_t> gray) {
  if (frames_ == 0) {
    mean_.assign(gray.size(), 0.0);
    m2_.assign(gray.size(), 0.0);
  } else if (gray.size() != mean_.size()) {
    throw RuntimeFailure("frame size changed during analysis");
  }
  ++frames_;
  const double n = static_cast<double>(frames_);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const double x = gray[i];
    const double delta = x - mean_[i];
    mean_[i] += delta / n;
    m2_[i] += delta * (x - mean_[i]);
  }
}

double FrameVarianceAccumulator::mean_variance() const {
  if (frames_ < 2 || m2_.empty()) return 0.0;
  double total = 0.0;
  for (double v : m2_) total += v;
  return total / static_cast<double>(m2_.size()) / static_cast<double>(frames_);
}

double rms(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

namespace {

double seconds(std::int64_t ts, AVRational tb) {
  return ts == AV_NOPTS_VALUE ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(ts) * av_q2d(tb);
}

class Analyzer {
 public:
  Analyzer(const std::filesystem::path& path, const AnalyzeOptions& opts) : opts_(opts), fmt_(open_input(path)) {
    video_index_ = av_find_best_stream(fmt_.get(), AVMEDIA_TYPE_VIDEO, -1, -1, nullptr, 0);
    audio_index_ = av_find_best_stream(fmt_.get(), AVMEDIA_TYPE_AUDIO, -1, -1, nullptr, 0);
    if (video_index_ < 0 && audio_index_ < 0)
      throw RuntimeFailure(path.string() + ": no audio or video stream");
    if (video_index_ >= 0) {
      vdec_ = open_decoder(fmt_.get(), video_index_);
      const auto* st = fmt_->streams[video_index_];
      stats_.has_video = true;
      stats_.width = vdec_->width;
      stats_.height = vdec_->height;
      auto rate = st->avg_frame_rate.num ? st->avg_frame_rate : st->r_frame_rate;
      stats_.fps = rate.num ? av_q2d(rate) : 0.0;
    }
    if (audio_index_ >= 0) {
      adec_ = open_decoder(fmt_.get(), audio_index_);
      stats_.has_audio = true;
    }
  }

  MediaStats run() {
    auto pkt = make_packet();
    auto frame = make_frame();
    while (av_read_frame(fmt_.get(), pkt.get()) >= 0) {
      if (pkt->stream_index == video_index_)
        decode(vdec_.get(), pkt.get(), frame.get(), true);
      else if (pkt->stream_index == audio_index_)
        decode(adec_.get(), pkt.get(), frame.get(), false);
      av_packet_unref(pkt.get());
    }
    if (vdec_) decode(vdec_.get(), nullptr, frame.get(), true);
    if (adec_) decode(adec_.get(), nullptr, frame.get(), false);

    stats_.frame_variance = variance_.mean_variance();
    stats_.frames_sampled = variance_.frames();
    stats_.audio_samples = audio_count_;
    stats_.audio_rms = audio_count_ ? std::sqrt(audio_sq_ / static_cast<double>(audio_count_)) : 0.0;
    if (std::isfinite(first_ts_) && last_end_ > first_ts_)
      stats_.duration_s = last_end_ - first_ts_;
    else if (fmt_->duration != AV_NOPTS_VALUE)
      stats_.duration_s = static_cast<double>(fmt_->duration) / AV_TIME_BASE;
    return stats_;
  }

 private:
  void decode(AVCodecContext* dec, AVPacket* pkt, AVFrame* frame, bool video) {
    if (avcodec_send_packet(dec, pkt) < 0) return;  // corrupt packet: skip it
    while (avcodec_receive_frame(dec, frame) >= 0) {
      if (video)
        on_video(frame);
      else
        on_audio(frame);
      av_frame_unref(frame);
    }
  }

  void track_time(double start, double end) {
    if (!std::isfinite(start)) return;
    first_ts_ = std::min(first_ts_, start);
    last_end_ = std::max(last_end_, end);
  }

  void on_video(AVFrame* frame) {
    const auto tb = fmt_->streams[video_index_]->time_base;
    const double t = seconds(frame->best_effort_timestamp, tb);
    double dur = frame->pkt_duration > 0 ? seconds(frame->pkt_duration, tb) : 0.0;
    if (dur <= 0.0 && stats_.fps > 0.0) dur = 1.0 / stats_.fps;
    track_time(t, t + dur);

    const double sample_t = std::isfinite(t) ? t : static_cast<double>(video_frames_) / std::max(stats_.fps, 1.0);
    ++video_frames_;
    if (sample_t + 1e-9 < next_sample_t_) return;
    next_sample_t_ = sample_t + 1.0 / opts_.sample_fps;

    if (!sws_) {
      aw_ = std::min(opts_.analysis_width, frame->width);
      ah_ = std::max(1, static_cast<int>(std::lround(static_cast<double>(frame->height) * aw_ / frame->width)));
      sws_.reset(sws_getContext(frame->width, frame->height, static_cast<AVPixelFormat>(frame->format), aw_, ah_,
                                AV_PIX_FMT_GRAY8, SWS_AREA, nullptr, nullptr, nullptr));
      if (!sws_) throw RuntimeFailure("cannot create scaler for analysis");
      gray_.resize(static_cast<std::size_t>(aw_) * ah_);
      src_w_ = frame->width;
      src_h_ = frame->height;
    }
    if (frame->width != src_w_ || frame->height != src_h_) return;
    std::uint8_t* dst[4] = {gray_.data(), nullptr, nullptr, nullptr};
    int dst_stride[4] = {aw_, 0, 0, 0};
    sws_scale(sws_.get(), frame->data, frame->linesize, 0, frame->height, dst, dst_stride);
    variance_.add(gray_);
  }

  void on_audio(AVFrame* frame) {
    const auto tb = fmt_->streams[audio_index_]->time_base;
    const double t = seconds(frame->best_effort_timestamp, tb);
    const int rate = frame->sample_rate > 0 ? frame->sample_rate : adec_->sample_rate;
    track_time(t, t + static_cast<double>(frame->nb_samples) / std::max(rate, 1));

    if (!swr_) {
      const auto layout = frame->channel_layout ? static_cast<std::int64_t>(frame->channel_layout)
                                                : channel_layout_of(adec_.get());
      swr_.reset(swr_alloc_set_opts(nullptr, layout, AV_SAMPLE_FMT_FLT, rate, layout,
                                    static_cast<AVSampleFormat>(frame->format), rate, 0, nullptr));
      if (!swr_) throw RuntimeFailure("cannot create resampler for analysis");
      check(swr_init(swr_.get()), "swr_init");
      channels_ = av_get_channel_layout_nb_channels(static_cast<std::uint64_t>(layout));
    }
    const int max_out = swr_get_out_samples(swr_.get(), frame->nb_samples);
    samples_.resize(static_cast<std::size_t>(std::max(max_out, 0)) * channels_);
    auto* out = reinterpret_cast<std::uint8_t*>(samples_.data());
    const int got = swr_convert(swr_.get(), &out, max_out, const_cast<const std::uint8_t**>(frame->extended_data),
                                frame->nb_samples);
    if (got <= 0) return;
    const auto n = static_cast<std::size_t>(got) * channels_;
    for (std::size_t i = 0; i < n; ++i) audio_sq_ += static_cast<double>(samples_[i]) * samples_[i];
    audio_count_ += n;
  }

  AnalyzeOptions opts_;
  InputPtr fmt_;
  int video_index_ = -1;
  int audio_index_ = -1;
  CodecPtr vdec_;
  CodecPtr adec_;
  MediaStats stats_;

  SwsPtr sws_;
  int aw_ = 0, ah_ = 0, src_w_ = 0, src_h_ = 0;
  std::vector<std::uint8_t> gray_;
  FrameVarianceAccumulator variance_;
  std::size_t video_frames_ = 0;
  double next_sample_t_ = -std::numeric_limits<double>::infinity();

  SwrPtr swr_;
  int channels_ = 1;
  std::vector<float> samples_;
  double audio_sq_ = 0.0;
  std::size_t audio_count_ = 0;

  double first_ts_ = std::numeric_limits<double>::infinity();
  double last_end_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

MediaStats analyze(const std::filesystem::path& path, const AnalyzeOptions& opts) {
  if (opts.sample_fps <= 0.0 || opts.analysis_width < 1) throw ValidationError("bad analysis options");
  return Analyzer(path, opts).run();
}

double container_duration(const std::filesystem::path& path) {
  auto fmt = open_input(path);
  if (fmt->duration != AV_NOPTS_VALUE && fmt->duration > 0)
    return static_cast<double>(fmt->duration) / AV_TIME_BASE;
  for (unsigned i = 0; i < fmt->nb_streams; ++i) {
    const auto* st = fmt->streams[i];
    if (st->duration != AV_NOPTS_VALUE && st->duration > 0) return seconds(st->duration, st->time_base);
  }
  throw RuntimeFailure(path.string() + ": container header carries no duration");
}

}  // namespace avr::media
