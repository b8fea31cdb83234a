#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tj/field2d.hpp"
#include "tj/hetero1d.hpp"

namespace tj {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Profile record "ACP1": magic (4 bytes), version u32, n u32, left u32,
// right u32, L f64, sigma f64, then n (u1, u2) pairs as f64. Little-endian.
void write_profile(const std::string& path, const Profile1D& prof);
Profile1D read_profile(const std::string& path);

// Field checkpoint "ACF2": magic (4 bytes), version u32, n u32, Lx f64, then
// n*n*2 f64 row-major, then n*n frozen-mask bytes. Little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::vector<unsigned char> encode_checkpoint(const Field2D& f);
Field2D decode_checkpoint(const std::vector<unsigned char>& bytes);
void write_checkpoint(const std::string& path, const Field2D& f);
Field2D read_checkpoint(const std::string& path);

/// Round-trip decimal for doubles; "nan", "inf", "-inf" otherwise.
std::string fmt(double v);
std::string fmt(long v);
std::string fmt(int v);
std::string fmt(std::size_t v);
std::string fmt(bool v);

/// CSV file: `# key = value` lines, one header line, then rows.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  template <class... T>
  void add(const T&... cells) {
    rows.push_back({fmt(cells)...});
  }
};

std::string render_csv(const CsvTable& t);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// y,u1,u2 for a profile or a slice.
CsvTable profile_csv(const Profile1D& prof);
CsvTable slice_csv(const Slice& s);

}  // namespace tj
