#include "resvoc/wav_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "resvoc/errors.hpp"

namespace resvoc {

namespace {

uint32_t read_u32(const std::vector<unsigned char>& b, size_t off) {
  return static_cast<uint32_t>(b[off]) | static_cast<uint32_t>(b[off + 1]) << 8 |
         static_cast<uint32_t>(b[off + 2]) << 16 | static_cast<uint32_t>(b[off + 3]) << 24;
}

uint16_t read_u16(const std::vector<unsigned char>& b, size_t off) {
  return static_cast<uint16_t>(b[off] | b[off + 1] << 8);
}

void put_u32(std::vector<unsigned char>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u16(std::vector<unsigned char>& b, uint16_t v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

Waveform read_wav(const std::string& path, int target_rate, std::string* warning) {
  if (target_rate <= 0) throw std::invalid_argument("read_wav: target rate must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  if (bytes.size() < 12) throw truncated_error("read_wav: file shorter than a RIFF header", bytes.size());
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0)
    throw bad_magic_error("read_wav: not a RIFF file", 0);
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw bad_magic_error("read_wav: RIFF file is not WAVE", 8);

  bool have_fmt = false;
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t rate = 0;
  uint16_t bits = 0;
  size_t data_off = 0;
  size_t data_len = 0;
  bool have_data = false;

  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + off);
    const uint32_t size = read_u32(bytes, off + 4);
    const size_t body = off + 8;
    if (body + size > bytes.size())
      throw truncated_error("read_wav: chunk runs past end of file", off);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw parse_error("read_wav: fmt chunk too small", off);
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = size;
      have_data = true;
    }
    off = body + size + (size & 1);  // chunks are word-aligned
  }
  if (!have_fmt) throw parse_error("read_wav: missing fmt chunk", bytes.size());
  if (!have_data) throw parse_error("read_wav: missing data chunk", bytes.size());
  if (channels != 1)
    throw parse_error("read_wav: only mono input is supported, file has " +
                          std::to_string(channels) + " channels",
                      data_off);
  if (rate == 0) throw parse_error("read_wav: zero sample rate", data_off);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    const size_t count = data_len / 2;
    w.samples.resize(count);
    for (size_t i = 0; i < count; ++i) {
      const int16_t v = static_cast<int16_t>(read_u16(bytes, data_off + 2 * i));
      w.samples[i] = v / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const size_t count = data_len / 4;
    w.samples.resize(count);
    for (size_t i = 0; i < count; ++i) {
      const uint32_t u = read_u32(bytes, data_off + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      w.samples[i] = static_cast<double>(f);
    }
  } else {
    throw parse_error("read_wav: unsupported format (code " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bit)",
                      data_off);
  }

  if (w.sample_rate != target_rate && !w.samples.empty()) {
    const int64_t n = static_cast<int64_t>(w.samples.size());
    const int64_t m =
        std::max<int64_t>(2, std::llround(static_cast<double>(n) * target_rate / w.sample_rate));
    if (warning)
      *warning = "resampled " + path + " from " + std::to_string(w.sample_rate) + " Hz to " +
                 std::to_string(target_rate) + " Hz";
    Frame f;
    f.samples = std::move(w.samples);
    w.samples = resample_frame(f, static_cast<int>(m)).samples;
    w.sample_rate = target_rate;
  }
  return w;
}

WavWriteResult write_wav(const std::string& path, const Waveform& w) {
  if (w.sample_rate <= 0) throw std::invalid_argument("write_wav: sample rate must be positive");
  WavWriteResult result;
  std::vector<unsigned char> bytes;
  bytes.reserve(44 + 2 * w.samples.size());
  const uint32_t data_len = static_cast<uint32_t>(2 * w.samples.size());

  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  put_u32(bytes, 36 + data_len);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E'});
  bytes.insert(bytes.end(), {'f', 'm', 't', ' '});
  put_u32(bytes, 16);
  put_u16(bytes, 1);  // PCM
  put_u16(bytes, 1);  // mono
  put_u32(bytes, static_cast<uint32_t>(w.sample_rate));
  put_u32(bytes, static_cast<uint32_t>(w.sample_rate) * 2);
  put_u16(bytes, 2);
  put_u16(bytes, 16);
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  put_u32(bytes, data_len);

  for (double v : w.samples) {
    long q = std::lround(v * 32768.0);
    if (q > 32767) {
      q = 32767;
      ++result.clipped;
    } else if (q < -32768) {
      q = -32768;
      ++result.clipped;
    }
    put_u16(bytes, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("write_wav: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("write_wav: write failed for " + path);
  return result;
}

}  // namespace resvoc
