#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "av_util.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/media/media.hpp"
#include "encoder.hpp"

namespace avr::media {

using namespace detail;

namespace {

template <typename OnFrame>
void decode_stream(AVFormatContext* fmt, int index, AVCodecContext* dec, OnFrame&& on_frame) {
  auto pkt = make_packet();
  auto frame = make_frame();
  auto pump = [&](AVPacket* p) {
    if (avcodec_send_packet(dec, p) < 0) return;
    while (avcodec_receive_frame(dec, frame.get()) >= 0) {
      on_frame(frame.get());
      av_frame_unref(frame.get());
    }
  };
  while (av_read_frame(fmt, pkt.get()) >= 0) {
    if (pkt->stream_index == index) pump(pkt.get());
    av_packet_unref(pkt.get());
  }
  pump(nullptr);
}

void put_le(std::string& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

bool downsample_video(const std::filesystem::path& in, const std::filesystem::path& out_path, double max_fps) {
  if (max_fps <= 0) throw ValidationError("max_fps must be positive");
  auto fmt = open_input(in);
  const int vi = av_find_best_stream(fmt.get(), AVMEDIA_TYPE_VIDEO, -1, -1, nullptr, 0);
  if (vi < 0) return false;
  auto dec = open_decoder(fmt.get(), vi);
  const int width = dec->width & ~1;
  const int height = dec->height & ~1;
  if (width < 2 || height < 2) throw RuntimeFailure(in.string() + ": video too small to re-encode");

  const int out_fps = std::max(1, static_cast<int>(std::floor(max_fps)));
  auto out = open_output(out_path, "webm");
  VideoEncoder enc(out.get(), width, height, out_fps);
  open_file_and_header(out.get(), out_path);

  SwsPtr sws;
  const auto tb = fmt->streams[vi]->time_base;
  double next_t = -std::numeric_limits<double>::infinity();
  std::int64_t pts = 0;
  std::int64_t seen = 0;
  decode_stream(fmt.get(), vi, dec.get(), [&](AVFrame* f) {
    double t = f->best_effort_timestamp == AV_NOPTS_VALUE ? static_cast<double>(seen) / 30.0
                                                          : static_cast<double>(f->best_effort_timestamp) * av_q2d(tb);
    ++seen;
    if (t + 1e-9 < next_t) return;
    next_t = t + 1.0 / out_fps;
    if (!sws) {
      sws.reset(sws_getContext(f->width, f->height, static_cast<AVPixelFormat>(f->format), width, height,
                               AV_PIX_FMT_YUV420P, SWS_BILINEAR, nullptr, nullptr, nullptr));
      if (!sws) throw RuntimeFailure("cannot create scaler for downsampling");
    }
    AVFrame* dst = enc.next_frame();
    sws_scale(sws.get(), f->data, f->linesize, 0, f->height, dst->data, dst->linesize);
    enc.submit(pts++);
  });
  enc.flush();
  check(av_write_trailer(out.get()), "write trailer");
  return true;
}

bool extract_audio_wav(const std::filesystem::path& in, const std::filesystem::path& out_path, int sample_rate_hz) {
  if (sample_rate_hz < 1) throw ValidationError("sample rate must be positive");
  auto fmt = open_input(in);
  const int ai = av_find_best_stream(fmt.get(), AVMEDIA_TYPE_AUDIO, -1, -1, nullptr, 0);
  if (ai < 0) return false;
  auto dec = open_decoder(fmt.get(), ai);

  SwrPtr swr;
  std::vector<std::int16_t> pcm;
  std::vector<std::int16_t> buf;
  auto convert = [&](const std::uint8_t** data, int count) {
    const int cap = swr_get_out_samples(swr.get(), count);
    if (cap <= 0) return;
    buf.resize(static_cast<std::size_t>(cap));
    auto* out = reinterpret_cast<std::uint8_t*>(buf.data());
    const int got = swr_convert(swr.get(), &out, cap, data, count);
    if (got > 0) pcm.insert(pcm.end(), buf.begin(), buf.begin() + got);
  };
  decode_stream(fmt.get(), ai, dec.get(), [&](AVFrame* f) {
    if (!swr) {
      const auto layout = f->channel_layout ? static_cast<std::int64_t>(f->channel_layout)
                                            : channel_layout_of(dec.get());
      const int in_rate = f->sample_rate > 0 ? f->sample_rate : dec->sample_rate;
      swr.reset(swr_alloc_set_opts(nullptr, AV_CH_LAYOUT_MONO, AV_SAMPLE_FMT_S16, sample_rate_hz, layout,
                                   static_cast<AVSampleFormat>(f->format), in_rate, 0, nullptr));
      if (!swr) throw RuntimeFailure("cannot create resampler");
      check(swr_init(swr.get()), "swr_init");
    }
    convert(const_cast<const std::uint8_t**>(f->extended_data), f->nb_samples);
  });
  if (swr) convert(nullptr, 0);

  const auto data_bytes = static_cast<std::uint32_t>(pcm.size() * sizeof(std::int16_t));
  std::string wav;
  wav.reserve(44 + data_bytes);
  wav += "RIFF";
  put_le(wav, 36 + data_bytes, 4);
  wav += "WAVEfmt ";
  put_le(wav, 16, 4);
  put_le(wav, 1, 2);  // PCM
  put_le(wav, 1, 2);  // mono
  put_le(wav, static_cast<std::uint32_t>(sample_rate_hz), 4);
  put_le(wav, static_cast<std::uint32_t>(sample_rate_hz) * 2, 4);
  put_le(wav, 2, 2);
  put_le(wav, 16, 2);
  wav += "data";
  put_le(wav, data_bytes, 4);
  for (auto s : pcm) put_le(wav, static_cast<std::uint16_t>(s), 2);
  io::write_file_atomic(out_path, wav);
  return true;
}

}  // namespace avr::media
