// Copyright 2026 The nrse Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "nrse/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace nrse {

SampledSignal::SampledSignal(RealVector samples, int sample_rate)
    : samples_(std::move(samples)), rate_(sample_rate)
{
  require(rate_ > 0, "SampledSignal: sample rate must be positive");
  require(samples_.allFinite(), "SampledSignal: samples must be finite");
}

SampledSignal SampledSignal::head(Index n) const
{
  n = std::min(n, size());
  return {samples_.head(n), rate_};
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t rd_u32(const unsigned char *p)
{
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

std::uint16_t rd_u16(const unsigned char *p) { return std::uint16_t(p[0] | p[1] << 8); }

void put_u32(std::vector<unsigned char> &b, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) { b.push_back(static_cast<unsigned char>(v >> (8 * i))); }
}

void put_u16(std::vector<unsigned char> &b, std::uint16_t v)
{
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

void put_tag(std::vector<unsigned char> &b, const char *tag) { b.insert(b.end(), tag, tag + 4); }

double decode_sample(const unsigned char *p, std::uint16_t format, std::uint16_t bits)
{
  if (format == kFormatFloat) {
    if (bits == 32) {
      std::uint32_t u = rd_u32(p);
      float f;
      std::memcpy(&f, &u, 4);
      return f;
    }
    std::uint64_t u = std::uint64_t(rd_u32(p)) | std::uint64_t(rd_u32(p + 4)) << 32;
    double d;
    std::memcpy(&d, &u, 8);
    return d;
  }
  switch (bits) {
  case 8: return (double(p[0]) - 128.0) / 128.0;
  case 16: return double(std::int16_t(rd_u16(p))) / 32768.0;
  case 24: {
    std::int32_t v = std::int32_t(std::uint32_t(p[0]) << 8 | std::uint32_t(p[1]) << 16 |
                                  std::uint32_t(p[2]) << 24) >> 8;
    return double(v) / 8388608.0;
  }
  default: return double(std::int32_t(rd_u32(p))) / 2147483648.0;
  }
}

} // namespace

SampledSignal load_wav(const std::filesystem::path &path, const WavReadOptions &opts)
{
  std::ifstream in(path, std::ios::binary);
  require(bool(in), "load_wav: cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(buf.size() >= 12 && std::memcmp(buf.data(), "RIFF", 4) == 0 &&
              std::memcmp(buf.data() + 8, "WAVE", 4) == 0,
          "load_wav: not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char *data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char *chunk = buf.data() + pos;
    std::size_t len = rd_u32(chunk + 4);
    std::size_t avail = std::min(len, buf.size() - pos - 8);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      require(avail >= 16, "load_wav: truncated fmt chunk");
      format = rd_u16(chunk + 8);
      channels = rd_u16(chunk + 10);
      rate = rd_u32(chunk + 12);
      bits = rd_u16(chunk + 22);
      if (format == kFormatExtensible) {
        require(avail >= 26, "load_wav: truncated extensible fmt chunk");
        format = rd_u16(chunk + 32);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = avail;
    }
    pos += 8 + len + (len & 1);
  }
  require(format != 0 && data != nullptr, "load_wav: missing fmt or data chunk");
  const bool pcm_ok = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
  require(pcm_ok || float_ok, "load_wav: unsupported encoding (format " + std::to_string(format) +
                                  ", " + std::to_string(bits) + " bits)");
  require(channels > 0 && rate > 0, "load_wav: invalid channel count or rate");

  const std::size_t frame_bytes = std::size_t(channels) * bits / 8;
  const Index frames = Index(data_len / frame_bytes);
  require(frames > 0, "load_wav: zero-length audio in " + path.string());

  RealVector x(frames);
  for (Index i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      acc += decode_sample(data + std::size_t(i) * frame_bytes + c * (bits / 8), format, bits);
    }
    x[i] = acc / channels;
  }
  SampledSignal sig(std::move(x), int(rate));
  if (opts.resample_to > 0 && opts.resample_to != sig.sample_rate()) {
    return resample(sig, opts.resample_to);
  }
  return sig;
}

void write_wav(const std::filesystem::path &path, const SampledSignal &x, WavEncoding enc)
{
  require(!x.empty(), "write_wav: empty signal");
  const std::uint16_t bits = enc == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint32_t data_bytes = std::uint32_t(x.size()) * (bits / 8);

  std::vector<unsigned char> b;
  b.reserve(44 + data_bytes);
  put_tag(b, "RIFF");
  put_u32(b, 36 + data_bytes);
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, enc == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(b, 1);
  put_u32(b, std::uint32_t(x.sample_rate()));
  put_u32(b, std::uint32_t(x.sample_rate()) * (bits / 8));
  put_u16(b, bits / 8);
  put_u16(b, bits);
  put_tag(b, "data");
  put_u32(b, data_bytes);
  for (double v : x.samples()) {
    if (enc == WavEncoding::Pcm16) {
      const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      const float f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(b, u);
    }
  }
  if (path.has_parent_path()) { std::filesystem::create_directories(path.parent_path()); }
  std::ofstream out(path, std::ios::binary);
  require(bool(out), "write_wav: cannot open " + path.string());
  out.write(reinterpret_cast<const char *>(b.data()), std::streamsize(b.size()));
  require(bool(out), "write_wav: write failed for " + path.string());
}

} // namespace nrse
