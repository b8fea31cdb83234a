#include "tj/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tj {

namespace {

class Writer {
 public:
  void bytes(const char* s, std::size_t n) { buf_.insert(buf_.end(), s, s + n); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<unsigned char>(v >> (8 * k)));
  }
  void f64(double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<unsigned char>(v >> (8 * k)));
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  std::vector<unsigned char>& buffer() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  Reader(const std::vector<unsigned char>& b, std::string what) : b_(b), what_(std::move(what)) {}
  void need(std::size_t n, const char* field) const {
    if (pos_ + n > b_.size())
      throw IoError(what_ + ": truncated at offset " + std::to_string(pos_) + " reading " + field);
  }
  void magic(const char* m) {
    need(4, "magic");
    if (std::memcmp(b_.data() + pos_, m, 4) != 0)
      throw IoError(what_ + ": bad magic at offset " + std::to_string(pos_) + " (expected " + m + ")");
    pos_ += 4;
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return v;
  }
  double f64(const char* field) {
    need(8, field);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b_[pos_ + k]) << (8 * k);
    pos_ += 8;
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::uint8_t u8(const char* field) {
    need(1, field);
    return b_[pos_++];
  }
  std::size_t offset() const { return pos_; }
  void finish() const {
    if (pos_ != b_.size())
      throw IoError(what_ + ": " + std::to_string(b_.size() - pos_) + " trailing bytes at offset " +
                    std::to_string(pos_));
  }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw IoError(what_ + ": " + msg + " at offset " + std::to_string(at));
  }

 private:
  const std::vector<unsigned char>& b_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& b) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace

void write_profile(const std::string& path, const Profile1D& prof) {
  Writer w;
  w.bytes("ACP1", 4);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(prof.size()));
  w.u32(static_cast<std::uint32_t>(prof.left_well));
  w.u32(static_cast<std::uint32_t>(prof.right_well));
  w.f64(prof.halfwidth);
  w.f64(prof.sigma);
  for (const Vec2& v : prof.samples) {
    w.f64(v.x);
    w.f64(v.y);
  }
  write_bytes(path, w.buffer());
}

Profile1D read_profile(const std::string& path) {
  const auto bytes = read_bytes(path);
  Reader r(bytes, path);
  r.magic("ACP1");
  const std::size_t vat = r.offset();
  if (r.u32("version") != 1) r.fail("unsupported version", vat);
  const std::size_t nat = r.offset();
  const std::uint32_t n = r.u32("n");
  if (n < 2) r.fail("sample count below 2", nat);
  Profile1D prof;
  const std::size_t wat = r.offset();
  prof.left_well = static_cast<int>(r.u32("left"));
  prof.right_well = static_cast<int>(r.u32("right"));
  if (prof.left_well > 2 || prof.right_well > 2) r.fail("well index out of range", wat);
  prof.halfwidth = r.f64("L");
  prof.sigma = r.f64("sigma");
  r.need(static_cast<std::size_t>(n) * 16, "samples");
  prof.samples.resize(n);
  for (auto& v : prof.samples) {
    v.x = r.f64("u1");
    v.y = r.f64("u2");
  }
  r.finish();
  return prof;
}

std::vector<unsigned char> encode_checkpoint(const Field2D& f) {
  Writer w;
  w.bytes("ACF2", 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(f.n()));
  w.f64(f.grid().halfwidth);
  for (double d : f.data()) w.f64(d);
  for (std::uint8_t m : f.mask()) w.u8(m);
  return std::move(w.buffer());
}

Field2D decode_checkpoint(const std::vector<unsigned char>& bytes) {
  Reader r(bytes, "checkpoint");
  r.magic("ACF2");
  const std::size_t vat = r.offset();
  if (r.u32("version") != kCheckpointVersion) r.fail("unsupported version", vat);
  const std::size_t nat = r.offset();
  const std::uint32_t n = r.u32("n");
  if (n < 3 || n > 100000) r.fail("implausible grid size " + std::to_string(n), nat);
  const std::size_t lat = r.offset();
  const double Lx = r.f64("Lx");
  if (!(Lx > 0.0) || !std::isfinite(Lx)) r.fail("invalid Lx", lat);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  r.need(nn * 17, "values and mask");
  Field2D f(GridSpec{Lx, static_cast<int>(n)}, Vec2{});
  for (double& d : f.data()) d = r.f64("value");
  for (auto& m : f.mask()) {
    const std::size_t at = r.offset();
    m = r.u8("mask");
    if (m > 1) r.fail("mask byte not 0 or 1", at);
  }
  r.finish();
  return f;
}

void write_checkpoint(const std::string& path, const Field2D& f) { write_bytes(path, encode_checkpoint(f)); }

Field2D read_checkpoint(const std::string& path) {
  try {
    return decode_checkpoint(read_bytes(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

std::string render_csv(const CsvTable& t) {
  std::string out;
  for (const auto& [k, v] : t.meta) out += "# " + k + " = " + v + "\n";
  for (std::size_t c = 0; c < t.header.size(); ++c) out += (c ? "," : "") + t.header[c];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
    out += "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable profile_csv(const Profile1D& prof) {
  CsvTable t;
  t.meta = {{"sigma", fmt(prof.sigma)}, {"left_well", fmt(prof.left_well + 1)}, {"right_well", fmt(prof.right_well + 1)}};
  t.header = {"y", "u1", "u2"};
  for (std::size_t k = 0; k < prof.size(); ++k) t.add(prof.y(k), prof.samples[k].x, prof.samples[k].y);
  return t;
}

CsvTable slice_csv(const Slice& s) {
  CsvTable t;
  t.meta = {{"x", fmt(s.x)}};
  t.header = {"y", "u1", "u2"};
  for (std::size_t k = 0; k < s.size(); ++k) t.add(s.y(k), s.values[k].x, s.values[k].y);
  return t;
}

}  // namespace tj
