#include "resvoc/codebook_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "resvoc/errors.hpp"

namespace resvoc {

namespace {

constexpr uint16_t kVersion = 1;
constexpr char kMagic[4] = {'R', 'S', 'C', 'B'};

uint64_t fnv1a(const unsigned char* p, size_t n) {
  uint64_t h = 14695981039346656037ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

class Writer {
 public:
  void u8(uint8_t v) { bytes_.push_back(v); }
  void u16(uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

  size_t offset() const { return off_; }
  size_t size() const { return bytes_.size(); }
  const unsigned char* data() const { return bytes_.data(); }

  void need(size_t n, const char* what) const {
    if (off_ + n > bytes_.size())
      throw truncated_error(std::string("load_codebook: file ends inside ") + what, off_);
  }
  uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[off_++];
  }
  uint16_t u16(const char* what) {
    need(2, what);
    uint16_t v = static_cast<uint16_t>(bytes_[off_] | bytes_[off_ + 1] << 8);
    off_ += 2;
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[off_ + i]) << (8 * i);
    off_ += 4;
    return v;
  }
  uint64_t u64(const char* what) {
    need(8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[off_ + i]) << (8 * i);
    off_ += 8;
    return v;
  }
  double f64(const char* what) {
    const uint64_t bits = u64(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  float f32(const char* what) {
    const uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

 private:
  std::vector<unsigned char> bytes_;
  size_t off_ = 0;
};

}  // namespace

void save_codebook(const std::string& path, const Codebook& cb, const PcaModel* pca) {
  if (cb.entries.empty()) throw std::invalid_argument("save_codebook: empty codebook");
  Writer w;
  w.bytes().insert(w.bytes().end(), kMagic, kMagic + 4);
  w.u16(kVersion);
  w.u8(static_cast<uint8_t>(cb.kind));
  w.u8(pca ? 1 : 0);
  w.u32(static_cast<uint32_t>(cb.meta.sample_rate));
  w.u32(static_cast<uint32_t>(cb.meta.k));
  w.u32(static_cast<uint32_t>(cb.meta.n_closest));
  w.u32(static_cast<uint32_t>(cb.entries.size()));
  w.u64(cb.meta.corpus_digest);
  for (const CodebookEntry& e : cb.entries) {
    if (e.payload.period < 2 || e.payload.period > 0xffff ||
        e.payload.samples.size() != static_cast<size_t>(2 * e.payload.period))
      throw std::invalid_argument("save_codebook: malformed entry payload");
    w.u16(static_cast<uint16_t>(e.payload.period));
    w.f64(e.payload.energy);
    for (double v : e.key.coeffs) w.f64(v);
    w.u32(static_cast<uint32_t>(e.payload.samples.size()));
    for (double v : e.payload.samples) w.f32(static_cast<float>(v));
  }
  if (pca) {
    for (double v : pca->mean) w.f64(v);
    for (const auto& row : pca->basis)
      for (double v : row) w.f64(v);
    for (double v : pca->eigenvalues) w.f64(v);
  }
  w.u64(fnv1a(w.bytes().data(), w.bytes().size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("save_codebook: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw io_error("save_codebook: write failed for " + path);
}

LoadedCodebook load_codebook(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("load_codebook: cannot open " + path);
  Reader r(std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                      std::istreambuf_iterator<char>()));

  if (r.size() < 12) throw truncated_error("load_codebook: file too short for a header", r.size());
  if (std::memcmp(r.data(), kMagic, 4) != 0)
    throw bad_magic_error("load_codebook: bad magic, not a codebook file", 0);
  // Checksum first: it covers everything up to the trailing 8 bytes.
  const size_t body = r.size() - 8;
  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<uint64_t>(r.data()[body + i]) << (8 * i);
  if (fnv1a(r.data(), body) != stored)
    throw checksum_error("load_codebook: checksum mismatch, file is corrupt", body);

  LoadedCodebook out;
  r.u32("magic");
  const uint16_t version = r.u16("version");
  if (version != kVersion)
    throw version_error("load_codebook: unsupported version " + std::to_string(version), 4);
  const uint8_t kind = r.u8("kind");
  if (kind > 1) throw parse_error("load_codebook: unknown codebook kind", r.offset() - 1);
  const uint8_t has_pca = r.u8("pca flag");
  if (has_pca > 1) throw parse_error("load_codebook: bad pca flag", r.offset() - 1);
  out.cb.kind = static_cast<CodebookKind>(kind);
  out.cb.meta.sample_rate = static_cast<int>(r.u32("sample rate"));
  out.cb.meta.k = static_cast<int>(r.u32("k"));
  out.cb.meta.n_closest = static_cast<int>(r.u32("n_closest"));
  const uint32_t count = r.u32("entry count");
  if (count == 0) throw parse_error("load_codebook: empty codebook", r.offset() - 4);
  out.cb.meta.corpus_digest = r.u64("digest");

  out.cb.entries.resize(count);
  for (uint32_t i = 0; i < count; ++i) {
    CodebookEntry& e = out.cb.entries[i];
    e.payload.period = r.u16("entry period");
    if (e.payload.period < 2)
      throw parse_error("load_codebook: entry period below 2", r.offset() - 2);
    e.payload.energy = r.f64("entry energy");
    for (double& v : e.key.coeffs) v = r.f64("entry key");
    const uint32_t len = r.u32("payload length");
    if (len != static_cast<uint32_t>(2 * e.payload.period))
      throw parse_error("load_codebook: payload length disagrees with period", r.offset() - 4);
    e.payload.samples.resize(len);
    for (double& v : e.payload.samples) v = r.f32("payload sample");
    e.payload.source = {0, static_cast<int32_t>(i)};
  }
  if (has_pca) {
    PcaModel pca;
    for (double& v : pca.mean) v = r.f64("pca mean");
    for (auto& row : pca.basis)
      for (double& v : row) v = r.f64("pca basis");
    for (double& v : pca.eigenvalues) v = r.f64("pca eigenvalue");
    out.pca = pca;
  }
  if (r.offset() != body)
    throw parse_error("load_codebook: trailing bytes after payload", r.offset());
  return out;
}

}  // namespace resvoc
