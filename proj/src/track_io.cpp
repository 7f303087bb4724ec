#include "resvoc/track_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "resvoc/errors.hpp"

namespace resvoc {

namespace {

void append_f64_text(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_f64_bits(std::vector<unsigned char>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

// Line-oriented cursor over the text part of the file.
struct TextCursor {
  const char* data;
  size_t size;
  size_t pos = 0;

  // Next line (without newline); false at end of buffer.
  bool line(std::string& out) {
    if (pos >= size) return false;
    size_t end = pos;
    while (end < size && data[end] != '\n') ++end;
    out.assign(data + pos, end - pos);
    pos = end < size ? end + 1 : end;
    return true;
  }
};

int64_t parse_int(const std::string& tok, size_t offset, const char* what) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw parse_error(std::string("load_track: bad integer in ") + what, offset);
  return v;
}

double parse_double(const std::string& tok, size_t offset, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw parse_error(std::string("load_track: bad number in ") + what, offset);
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> toks;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) toks.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace

void save_track(const std::string& path, const TargetTrack& track, const EnvelopeTrack& env) {
  if (track.sample_rate <= 0) throw std::invalid_argument("save_track: bad sample rate");
  if (env.positions.empty()) throw std::invalid_argument("save_track: empty envelope");

  std::string text;
  text += "RSTK 1\n";
  text += "sample_rate " + std::to_string(track.sample_rate) + "\n";
  text += "total_length " + std::to_string(track.total_length) + "\n";
  text += "events " + std::to_string(track.events.size()) + "\n";
  for (const TargetEvent& e : track.events) {
    if (e.voiced) {
      text += "v " + std::to_string(e.position) + " " + std::to_string(e.period) + " ";
      append_f64_text(text, e.energy);
      for (double c : e.target_rn.coeffs) {
        text += " ";
        append_f64_text(text, c);
      }
    } else {
      text += "u " + std::to_string(e.position) + " ";
      append_f64_text(text, e.energy);
    }
    text += "\n";
  }
  text += "envelope " + std::to_string(env.order) + " " + std::to_string(env.positions.size()) + "\n";

  std::vector<unsigned char> bin;
  bin.reserve(env.positions.size() * (8 + 8 + static_cast<size_t>(env.order) * 8));
  for (size_t i = 0; i < env.positions.size(); ++i) {
    uint64_t bits = static_cast<uint64_t>(env.positions[i]);
    for (int b = 0; b < 8; ++b) bin.push_back(static_cast<unsigned char>(bits >> (8 * b)));
    append_f64_bits(bin, env.gains[i]);
    if (static_cast<int>(env.coeffs[i].size()) != env.order)
      throw std::invalid_argument("save_track: envelope coefficient count mismatch");
    for (double a : env.coeffs[i]) append_f64_bits(bin, a);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("save_track: cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(bin.data()), static_cast<std::streamsize>(bin.size()));
  if (!out) throw io_error("save_track: write failed for " + path);
}

LoadedTrack load_track(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("load_track: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  TextCursor cur{bytes.data(), bytes.size()};
  std::string line;
  if (!cur.line(line)) throw truncated_error("load_track: empty file", 0);
  {
    const auto toks = split(line);
    if (toks.size() != 2 || toks[0] != "RSTK")
      throw bad_magic_error("load_track: not a track file", 0);
    if (toks[1] != "1")
      throw version_error("load_track: unsupported version " + toks[1], 5);
  }

  LoadedTrack out;
  size_t event_count = 0;
  {
    size_t at = cur.pos;
    if (!cur.line(line)) throw truncated_error("load_track: missing sample_rate", cur.pos);
    auto toks = split(line);
    if (toks.size() != 2 || toks[0] != "sample_rate")
      throw parse_error("load_track: expected sample_rate line", at);
    out.track.sample_rate = static_cast<int>(parse_int(toks[1], at, "sample_rate"));

    at = cur.pos;
    if (!cur.line(line)) throw truncated_error("load_track: missing total_length", cur.pos);
    toks = split(line);
    if (toks.size() != 2 || toks[0] != "total_length")
      throw parse_error("load_track: expected total_length line", at);
    out.track.total_length = parse_int(toks[1], at, "total_length");

    at = cur.pos;
    if (!cur.line(line)) throw truncated_error("load_track: missing events line", cur.pos);
    toks = split(line);
    if (toks.size() != 2 || toks[0] != "events")
      throw parse_error("load_track: expected events line", at);
    event_count = static_cast<size_t>(parse_int(toks[1], at, "events"));
  }

  out.track.events.reserve(event_count);
  for (size_t i = 0; i < event_count; ++i) {
    const size_t at = cur.pos;
    if (!cur.line(line)) throw truncated_error("load_track: file ends inside event list", cur.pos);
    const auto toks = split(line);
    TargetEvent e;
    if (!toks.empty() && toks[0] == "v") {
      if (toks.size() != static_cast<size_t>(4 + kRnDim))
        throw parse_error("load_track: voiced event needs 4 + 20 fields", at);
      e.voiced = true;
      e.position = parse_int(toks[1], at, "event position");
      e.period = static_cast<int>(parse_int(toks[2], at, "event period"));
      e.energy = parse_double(toks[3], at, "event energy");
      for (int c = 0; c < kRnDim; ++c)
        e.target_rn.coeffs[static_cast<size_t>(c)] =
            parse_double(toks[static_cast<size_t>(4 + c)], at, "event rn");
    } else if (!toks.empty() && toks[0] == "u") {
      if (toks.size() != 3) throw parse_error("load_track: unvoiced event needs 3 fields", at);
      e.voiced = false;
      e.position = parse_int(toks[1], at, "event position");
      e.energy = parse_double(toks[2], at, "event energy");
    } else {
      throw parse_error("load_track: event line must start with v or u", at);
    }
    out.track.events.push_back(e);
  }

  const size_t env_at = cur.pos;
  if (!cur.line(line)) throw truncated_error("load_track: missing envelope line", cur.pos);
  const auto toks = split(line);
  if (toks.size() != 3 || toks[0] != "envelope")
    throw parse_error("load_track: expected envelope line", env_at);
  out.envelope.order = static_cast<int>(parse_int(toks[1], env_at, "envelope order"));
  const size_t positions = static_cast<size_t>(parse_int(toks[2], env_at, "envelope count"));
  if (out.envelope.order < 1 || positions < 1)
    throw parse_error("load_track: envelope must have positive order and count", env_at);

  const size_t record = 8 + 8 + static_cast<size_t>(out.envelope.order) * 8;
  if (cur.pos + record * positions > bytes.size())
    throw truncated_error("load_track: file ends inside envelope block", bytes.size());
  if (cur.pos + record * positions != bytes.size())
    throw parse_error("load_track: trailing bytes after envelope block", cur.pos + record * positions);

  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + cur.pos;
  auto take_u64 = [&p]() {
    uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<uint64_t>(p[b]) << (8 * b);
    p += 8;
    return v;
  };
  out.envelope.positions.resize(positions);
  out.envelope.gains.resize(positions);
  out.envelope.coeffs.assign(positions, std::vector<double>(static_cast<size_t>(out.envelope.order)));
  for (size_t i = 0; i < positions; ++i) {
    out.envelope.positions[i] = static_cast<int64_t>(take_u64());
    uint64_t bits = take_u64();
    std::memcpy(&out.envelope.gains[i], &bits, 8);
    for (int c = 0; c < out.envelope.order; ++c) {
      bits = take_u64();
      std::memcpy(&out.envelope.coeffs[i][static_cast<size_t>(c)], &bits, 8);
    }
  }
  return out;
}

}  // namespace resvoc
