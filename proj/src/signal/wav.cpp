#include "texm/signal/wav.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "texm/error.h"

namespace texm {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV codec assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class Reader {
 public:
  Reader(const std::vector<char>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void skip(std::size_t n) { pos_ += n; }
  const char* here() const { return bytes_.data() + pos_; }

  template <typename T>
  T read() {
    require(has(sizeof(T)), ErrorCode::kTruncatedFile, name_ + ": truncated WAV header");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string tag() {
    require(has(4), ErrorCode::kTruncatedFile, name_ + ": truncated WAV header");
    std::string t(bytes_.data() + pos_, 4);
    pos_ += 4;
    return t;
  }

 private:
  const std::vector<char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  const std::string name = path.string();
  Reader r(bytes, name);

  require(r.has(12), ErrorCode::kTruncatedFile, name + ": truncated WAV header");
  require(r.tag() == "RIFF", ErrorCode::kUnsupportedFormat, name + ": not a RIFF file");
  r.read<std::uint32_t>();
  require(r.tag() == "WAVE", ErrorCode::kUnsupportedFormat, name + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  while (true) {
    require(r.has(8), ErrorCode::kTruncatedFile, name + ": missing data chunk");
    const std::string id = r.tag();
    const auto size = r.read<std::uint32_t>();
    if (id == "fmt ") {
      require(size >= 16 && r.has(size), ErrorCode::kTruncatedFile,
              name + ": truncated fmt chunk");
      const std::size_t start = r.position();
      format = r.read<std::uint16_t>();
      channels = r.read<std::uint16_t>();
      sample_rate = r.read<std::uint32_t>();
      r.read<std::uint32_t>();  // byte rate
      r.read<std::uint16_t>();  // block align
      bits = r.read<std::uint16_t>();
      if (format == kFormatExtensible) {
        require(size >= 40, ErrorCode::kUnsupportedFormat,
                name + ": malformed extensible fmt chunk");
        r.skip(8);  // cbSize, valid bits, channel mask
        format = r.read<std::uint16_t>();
      }
      r.skip(size - (r.position() - start) + (size % 2));
      have_fmt = true;
      continue;
    }
    if (id == "data") {
      require(have_fmt, ErrorCode::kUnsupportedFormat, name + ": data before fmt chunk");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool f32 = format == kFormatFloat && bits == 32;
      require(pcm16 || f32, ErrorCode::kUnsupportedFormat,
              name + ": only PCM-16 and float-32 WAV are supported (format " +
                  std::to_string(format) + ", " + std::to_string(bits) + " bits)");
      require(channels == 1 || channels == 2, ErrorCode::kUnsupportedFormat,
              name + ": only mono or stereo WAV is supported");
      require(sample_rate > 0, ErrorCode::kUnsupportedFormat, name + ": zero sample rate");
      require(r.remaining() >= size, ErrorCode::kTruncatedFile,
              name + ": data chunk extends past end of file");
      const std::size_t bytes_per_sample = bits / 8;
      const std::size_t frames = size / (bytes_per_sample * channels);
      std::vector<double> samples(frames);
      const char* p = r.here();
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0;
        for (std::size_t c = 0; c < channels; ++c) {
          const char* s = p + (i * channels + c) * bytes_per_sample;
          if (pcm16) {
            std::int16_t v;
            std::memcpy(&v, s, 2);
            acc += v / 32768.0;
          } else {
            float v;
            std::memcpy(&v, s, 4);
            acc += v;
          }
        }
        samples[i] = channels == 1 ? acc : acc / 2.0;
      }
      return AudioClip(std::move(samples), static_cast<int>(sample_rate));
    }
    require(r.has(size), ErrorCode::kTruncatedFile, name + ": truncated chunk " + id);
    r.skip(size + (size % 2));
  }
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path,
              WavEncoding encoding) {
  const bool pcm16 = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(clip.size() * block);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put<std::uint32_t>(out, 36 + data_size);
  out += "WAVEfmt ";
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, pcm16 ? kFormatPcm : kFormatFloat);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate()) * block);
  put<std::uint16_t>(out, block);
  put<std::uint16_t>(out, bits);
  out += "data";
  put<std::uint32_t>(out, data_size);

  std::size_t clipped = 0;
  for (double s : clip.samples()) {
    if (pcm16) {
      if (s > 1.0 || s < -1.0) ++clipped;
      const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
      put<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
    } else {
      put<float>(out, static_cast<float>(s));
    }
  }
  if (clipped > 0) {
    spdlog::warn("{}: hard-clipped {} samples outside [-1, 1]", path.string(), clipped);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), ErrorCode::kIo, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  require(f.good(), ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace texm
