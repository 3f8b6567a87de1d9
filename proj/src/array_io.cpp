#include "zspeedl/array_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace zspeedl {

namespace {

constexpr std::array<char, 4> kMagic{'Z', 'S', 'P', 'L'};

template <typename T>
void put_le(unsigned char* dst, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<unsigned char>(u >> (8 * i));
}

template <typename T>
T get_le(const unsigned char* src) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(src[i]) << (8 * i);
  return static_cast<T>(u);
}

std::array<unsigned char, kArrayHeaderBytes> encode_header(DType dtype, std::uint64_t rows,
                                                           std::uint64_t cols) {
  std::array<unsigned char, kArrayHeaderBytes> h{};
  std::memcpy(h.data(), kMagic.data(), 4);
  put_le<std::uint32_t>(h.data() + 4, kArrayFormatVersion);
  h[8] = static_cast<unsigned char>(dtype);
  put_le<std::uint64_t>(h.data() + 16, rows);
  put_le<std::uint64_t>(h.data() + 24, cols);
  return h;
}

ArrayHeader decode_header(std::istream& in, const std::string& where) {
  std::array<unsigned char, kArrayHeaderBytes> h{};
  in.read(reinterpret_cast<char*>(h.data()), h.size());
  if (in.gcount() != static_cast<std::streamsize>(h.size())) {
    if (in.gcount() >= 4 && std::memcmp(h.data(), kMagic.data(), 4) != 0)
      throw ArrayError(ArrayErrc::bad_magic, where);
    throw ArrayError(ArrayErrc::truncated, where);
  }
  if (std::memcmp(h.data(), kMagic.data(), 4) != 0) throw ArrayError(ArrayErrc::bad_magic, where);
  if (get_le<std::uint32_t>(h.data() + 4) != kArrayFormatVersion)
    throw ArrayError(ArrayErrc::bad_version, where);
  ArrayHeader out;
  switch (h[8]) {
    case 1: out.dtype = DType::real32; break;
    case 2: out.dtype = DType::int32; break;
    default: throw ArrayError(ArrayErrc::bad_dtype, where);
  }
  for (std::size_t i = 9; i < 16; ++i)
    if (h[i] != 0) throw ArrayError(ArrayErrc::bad_header, where);
  for (std::size_t i = 32; i < kArrayHeaderBytes; ++i)
    if (h[i] != 0) throw ArrayError(ArrayErrc::bad_header, where);
  out.rows = get_le<std::uint64_t>(h.data() + 16);
  out.cols = get_le<std::uint64_t>(h.data() + 24);
  if (out.cols != 0 && out.rows > std::numeric_limits<std::uint64_t>::max() / 4 / out.cols)
    throw ArrayError(ArrayErrc::bad_header, where);
  return out;
}

std::vector<unsigned char> read_payload(std::istream& in, const ArrayHeader& h,
                                        const std::string& where) {
  const std::size_t bytes = static_cast<std::size_t>(h.rows * h.cols * 4);
  std::vector<unsigned char> buf(bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (in.gcount() != static_cast<std::streamsize>(bytes)) throw ArrayError(ArrayErrc::truncated, where);
  return buf;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArrayError(ArrayErrc::io_failure, path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArrayError(ArrayErrc::io_failure, path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw ArrayError(ArrayErrc::io_failure, path.string());
}

}  // namespace

const char* to_string(ArrayErrc code) noexcept {
  switch (code) {
    case ArrayErrc::io_failure: return "I/O failure";
    case ArrayErrc::bad_magic: return "bad magic";
    case ArrayErrc::bad_version: return "unsupported format version";
    case ArrayErrc::bad_dtype: return "unsupported dtype";
    case ArrayErrc::bad_header: return "malformed header";
    case ArrayErrc::truncated: return "truncated payload";
    case ArrayErrc::non_finite: return "non-finite value";
  }
  return "unknown array error";
}

ArrayError::ArrayError(ArrayErrc code, const std::string& where)
    : DataError(std::string(to_string(code)) + ": " + where), code_(code) {}

void write_array(const Matrix& m, std::ostream& out) {
  const auto header = encode_header(DType::real32, m.rows(), m.cols());
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  std::vector<unsigned char> payload(m.size() * 4);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const float f = static_cast<float>(m.data()[i]);
    if (!std::isfinite(f)) throw ArrayError(ArrayErrc::non_finite, "write_array");
    put_le<std::uint32_t>(payload.data() + 4 * i, std::bit_cast<std::uint32_t>(f));
  }
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
}

Matrix read_array(std::istream& in, const std::string& where) {
  const ArrayHeader h = decode_header(in, where);
  const auto buf = read_payload(in, h, where);
  Matrix m(h.rows, h.cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto bits = get_le<std::uint32_t>(buf.data() + 4 * i);
    double v = 0.0;
    if (h.dtype == DType::real32) {
      v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) throw ArrayError(ArrayErrc::non_finite, where);
    } else {
      v = static_cast<std::int32_t>(bits);
    }
    m.data()[i] = v;
  }
  return m;
}

void write_array(const Matrix& m, const std::filesystem::path& path) {
  auto out = open_out(path);
  try {
    write_array(m, out);
  } catch (const ArrayError& e) {
    throw ArrayError(e.code(), path.string());
  }
  finish(out, path);
}

Matrix read_array(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_array(in, path.string());
}

void write_int_array(const IntArray& a, const std::filesystem::path& path) {
  if (a.values.size() != a.rows * a.cols) throw DataError("write_int_array: value count does not match shape");
  auto out = open_out(path);
  const auto header = encode_header(DType::int32, a.rows, a.cols);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  std::vector<unsigned char> payload(a.values.size() * 4);
  for (std::size_t i = 0; i < a.values.size(); ++i) put_le<std::int32_t>(payload.data() + 4 * i, a.values[i]);
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  finish(out, path);
}

IntArray read_int_array(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string where = path.string();
  const ArrayHeader h = decode_header(in, where);
  if (h.dtype != DType::int32) throw ArrayError(ArrayErrc::bad_dtype, where);
  const auto buf = read_payload(in, h, where);
  IntArray a{h.rows, h.cols, std::vector<std::int32_t>(h.rows * h.cols)};
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] = get_le<std::int32_t>(buf.data() + 4 * i);
  return a;
}

ArrayHeader read_array_header(const std::filesystem::path& path) {
  auto in = open_in(path);
  return decode_header(in, path.string());
}

}  // namespace zspeedl
