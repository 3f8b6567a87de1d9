#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "zspeedl/errors.hpp"
#include "zspeedl/matrix.hpp"

namespace zspeedl {

// Native binary array format:
//   0..3   magic "ZSPL"
//   4..7   format version, u32 little-endian (= 1)
//   8      dtype tag (1 = real32, 2 = int32)
//   9..15  reserved, zero
//   16..23 rows, u64 little-endian
//   24..31 cols, u64 little-endian
//   32..63 reserved, zero
//   64..   payload, row-major little-endian
inline constexpr std::size_t kArrayHeaderBytes = 64;
inline constexpr std::uint32_t kArrayFormatVersion = 1;

enum class DType : std::uint8_t { real32 = 1, int32 = 2 };

enum class ArrayErrc {
  io_failure,
  bad_magic,
  bad_version,
  bad_dtype,
  bad_header,
  truncated,
  non_finite,
};

const char* to_string(ArrayErrc code) noexcept;

class ArrayError : public DataError {
 public:
  ArrayError(ArrayErrc code, const std::string& where);
  ArrayErrc code() const noexcept { return code_; }

 private:
  ArrayErrc code_;
};

struct IntArray {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> values;
};

void write_array(const Matrix& m, const std::filesystem::path& path);
Matrix read_array(const std::filesystem::path& path);

void write_int_array(const IntArray& a, const std::filesystem::path& path);
IntArray read_int_array(const std::filesystem::path& path);

// Stream forms, used to embed arrays inside model files. `where` names the
// source in error messages.
void write_array(const Matrix& m, std::ostream& out);
Matrix read_array(std::istream& in, const std::string& where);

struct ArrayHeader {
  DType dtype = DType::real32;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
};

// Reads and validates only the header. Used to check manifest shapes cheaply.
ArrayHeader read_array_header(const std::filesystem::path& path);

}  // namespace zspeedl
