#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <vector>

namespace cotloop {

struct TraceRecord {
  std::uint64_t step_index = 0;
  std::vector<double> embedding;
  std::optional<std::string> text;  // natural-language content of the step, JSONL only

  bool operator==(const TraceRecord&) const = default;
};

struct Trace {
  std::size_t dim = 0;
  std::vector<TraceRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  bool operator==(const Trace&) const = default;
};

enum class TraceFormat { jsonl, binary };

TraceFormat parse_trace_format(std::string_view text);
std::string_view to_string(TraceFormat format) noexcept;

/// Sniffs the first bytes of `path`: the binary magic selects binary,
/// anything else is taken as JSONL.
TraceFormat detect_trace_format(const std::filesystem::path& path);

// Binary layout, all little-endian:
//   header  "CORE" | version u16 | dtype u16 | dim u32 | count u32   (16 bytes)
//   record  step u32 | dim values of the header dtype
// dtype 0 stores 32-bit floats, dtype 1 stores 64-bit floats.
// count 0 in a stream header means "unbounded".
inline constexpr std::array<char, 4> kTraceMagic{'C', 'O', 'R', 'E'};
inline constexpr std::uint16_t kTraceVersion = 1;
inline constexpr std::size_t kBinaryHeaderSize = 16;

enum class BinaryDtype : std::uint16_t { f32 = 0, f64 = 1 };

struct BinaryHeader {
  std::uint16_t version = kTraceVersion;
  BinaryDtype dtype = BinaryDtype::f32;
  std::uint32_t dim = 0;
  std::uint32_t count = 0;

  std::size_t record_size() const noexcept {
    return 4 + std::size_t{dim} * (dtype == BinaryDtype::f32 ? 4 : 8);
  }
};

std::array<unsigned char, kBinaryHeaderSize> encode_header(const BinaryHeader& header);

/// Throws MalformedHeader on a bad magic, version or dtype.
BinaryHeader decode_header(std::span<const unsigned char, kBinaryHeaderSize> bytes);

/// Incremental reader for binary traces and binary streams.
class BinaryTraceReader {
 public:
  /// Reads and validates the header. Throws TruncatedFile / MalformedHeader.
  explicit BinaryTraceReader(std::istream& in);

  const BinaryHeader& header() const noexcept { return header_; }

  /// Next record, or std::nullopt on a clean end of input between records.
  /// Throws TruncatedFile (naming the byte offset) when input ends
  /// mid-record, MalformedRecord on out-of-order steps and NonFiniteValue on
  /// NaN/Inf values.
  std::optional<TraceRecord> next();

  std::uint64_t offset() const noexcept { return offset_; }
  std::uint64_t records_read() const noexcept { return records_read_; }

 private:
  std::istream& in_;
  BinaryHeader header_;
  std::uint64_t offset_ = 0;
  std::uint64_t records_read_ = 0;
  std::vector<unsigned char> buf_;
};

/// Serializes one record body (step + values) in the header's dtype.
void write_binary_record(std::ostream& out, const BinaryHeader& header, const TraceRecord& record);

void write_trace_binary(std::ostream& out, const Trace& trace, BinaryDtype dtype = BinaryDtype::f32);
Trace read_trace_binary(std::istream& in);

void write_trace_jsonl(std::ostream& out, const Trace& trace);
Trace read_trace_jsonl(std::istream& in);

/// Parses one JSONL trace line. `record_index` is used in error messages.
TraceRecord parse_jsonl_record(std::string_view line, std::size_t record_index);

void write_trace(const std::filesystem::path& path, const Trace& trace, TraceFormat format,
                 BinaryDtype dtype = BinaryDtype::f32);
Trace read_trace(const std::filesystem::path& path, TraceFormat format);
Trace read_trace(const std::filesystem::path& path);

/// Checks dimension, step ordering and finiteness; throws the matching error.
void validate_trace(const Trace& trace);

}  // namespace cotloop
