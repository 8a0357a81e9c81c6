#pragma once

// Embedding bank files.
//
// CSV: one vector per line, comma-separated decimals. When the first field of
// the first data line is not a number, the first column of every line is an id.
//
// kitebin (all integers and floats little-endian):
//   offset 0  : "KITE" (4B 49 54 45)
//   offset 4  : u32 rows
//   offset 8  : u32 cols
//   offset 12 : rows * cols IEEE-754 binary64, row-major

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "kite/errors.hpp"
#include "kite/types.hpp"

namespace kite {

enum class BankFormat { csv, kitebin };

inline constexpr char kKitebinMagic[4] = {'K', 'I', 'T', 'E'};

namespace detail {

static_assert(std::numeric_limits<double>::is_iec559, "kitebin requires IEEE-754 doubles");

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument(path + ": cannot open file");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void write_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline double read_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

inline void write_f64_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

}  // namespace detail

inline EmbeddingBank parse_kitebin(std::string_view bytes, const std::string& origin = "<memory>") {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12) {
    throw ParseError(origin + ": truncated kitebin header (" + std::to_string(bytes.size()) + " bytes, need 12)");
  }
  if (std::memcmp(bytes.data(), kKitebinMagic, 4) != 0) throw ParseError(origin + ": bad magic at offset 0");
  const std::uint64_t rows = detail::read_u32_le(p + 4);
  const std::uint64_t cols = detail::read_u32_le(p + 8);
  if (rows == 0 || cols == 0) throw ParseError(origin + ": empty kitebin matrix (offset 4)");
  const std::uint64_t need = 12 + rows * cols * 8;
  if (bytes.size() < need) {
    throw ParseError(origin + ": truncated kitebin payload at offset " + std::to_string(bytes.size()) +
                     " (expected " + std::to_string(need) + " bytes)");
  }
  if (bytes.size() > need) {
    throw ParseError(origin + ": trailing bytes after kitebin payload at offset " + std::to_string(need));
  }
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i) {
    for (std::uint64_t j = 0; j < cols; ++j) {
      const std::uint64_t off = 12 + (i * cols + j) * 8;
      const double v = detail::read_f64_le(p + off);
      if (!std::isfinite(v)) throw ParseError(origin + ": non-finite value at offset " + std::to_string(off));
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return EmbeddingBank(std::move(m), {}, origin);
}

inline std::string encode_kitebin(const RowMatrix& m) {
  detail::require(m.rows() <= std::numeric_limits<std::uint32_t>::max() &&
                      m.cols() <= std::numeric_limits<std::uint32_t>::max(),
                  "encode_kitebin: matrix too large for u32 header");
  std::string out(kKitebinMagic, 4);
  out.reserve(12 + static_cast<std::size_t>(m.size()) * 8);
  detail::write_u32_le(out, static_cast<std::uint32_t>(m.rows()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) detail::write_f64_le(out, m(i, j));
  }
  return out;
}

inline EmbeddingBank parse_csv(std::string_view text, const std::string& origin = "<memory>") {
  std::vector<double> values;
  std::vector<std::string> ids;
  std::size_t cols = 0;
  std::size_t rows = 0;
  int has_id = -1;  // decided by the first data line
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = detail::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;

    auto fields = detail::split_commas(line);
    if (has_id < 0) {
      double probe = 0.0;
      has_id = detail::parse_double(fields.front(), probe) ? 0 : 1;
    }
    std::size_t first = 0;
    if (has_id == 1) {
      ids.emplace_back(detail::trim(fields.front()));
      first = 1;
    }
    const std::size_t width = fields.size() - first;
    if (width == 0) throw ParseError(origin + ": line " + std::to_string(line_no) + ": no numeric fields");
    if (rows == 0) {
      cols = width;
    } else if (width != cols) {
      throw ParseError(origin + ": line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                       " values, found " + std::to_string(width));
    }
    for (std::size_t f = first; f < fields.size(); ++f) {
      double v = 0.0;
      if (!detail::parse_double(fields[f], v)) {
        throw ParseError(origin + ": line " + std::to_string(line_no) + ": cannot parse '" +
                         std::string(detail::trim(fields[f])) + "' as a number");
      }
      if (!std::isfinite(v)) {
        throw ParseError(origin + ": line " + std::to_string(line_no) + ": non-finite value");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(origin + ": no data rows");
  RowMatrix m = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(cols));
  return EmbeddingBank(std::move(m), std::move(ids), origin);
}

inline std::string encode_csv(const EmbeddingBank& bank, bool with_ids = false) {
  // Shortest representation that parses back to the same double.
  std::string out;
  char buf[32];
  const auto& m = bank.vectors();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (with_ids) out += bank.ids()[static_cast<std::size_t>(i)] + ',';
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, m(i, j));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

/// Format by content: kitebin if the file starts with the magic bytes, CSV otherwise.
inline BankFormat sniff_format(std::string_view bytes) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kKitebinMagic, 4) == 0 ? BankFormat::kitebin
                                                                                : BankFormat::csv;
}

inline EmbeddingBank load_bank(const std::string& path, BankFormat format) {
  const std::string bytes = detail::read_file(path);
  return format == BankFormat::kitebin ? parse_kitebin(bytes, path) : parse_csv(bytes, path);
}

inline EmbeddingBank load_bank(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  return sniff_format(bytes) == BankFormat::kitebin ? parse_kitebin(bytes, path) : parse_csv(bytes, path);
}

inline void save_bank(const EmbeddingBank& bank, const std::string& path, BankFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument(path + ": cannot open for writing");
  const std::string bytes = format == BankFormat::kitebin ? encode_kitebin(bank.vectors()) : encode_csv(bank);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument(path + ": write failed");
}

}  // namespace kite
