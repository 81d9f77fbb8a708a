#include "cotloop/trace_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "cotloop/error.hpp"

namespace cotloop {

namespace {

void put_u16(unsigned char* p, std::uint16_t v) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
}

void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

// Reads up to n bytes; returns the number actually read.
std::size_t read_some(std::istream& in, unsigned char* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount());
}

}  // namespace

TraceFormat parse_trace_format(std::string_view text) {
  if (text == "jsonl") return TraceFormat::jsonl;
  if (text == "binary" || text == "bin") return TraceFormat::binary;
  throw Error(ErrorCode::BadConfig, "unknown trace format '" + std::string(text) + "'");
}

std::string_view to_string(TraceFormat format) noexcept {
  return format == TraceFormat::jsonl ? "jsonl" : "binary";
}

TraceFormat detect_trace_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (in.gcount() == 4 && magic == kTraceMagic) return TraceFormat::binary;
  return TraceFormat::jsonl;
}

std::array<unsigned char, kBinaryHeaderSize> encode_header(const BinaryHeader& header) {
  std::array<unsigned char, kBinaryHeaderSize> out{};
  std::memcpy(out.data(), kTraceMagic.data(), 4);
  put_u16(out.data() + 4, header.version);
  put_u16(out.data() + 6, static_cast<std::uint16_t>(header.dtype));
  put_u32(out.data() + 8, header.dim);
  put_u32(out.data() + 12, header.count);
  return out;
}

BinaryHeader decode_header(std::span<const unsigned char, kBinaryHeaderSize> bytes) {
  if (std::memcmp(bytes.data(), kTraceMagic.data(), 4) != 0) {
    throw Error(ErrorCode::MalformedHeader, "bad magic, expected \"CORE\"");
  }
  BinaryHeader h;
  h.version = get_u16(bytes.data() + 4);
  if (h.version != kTraceVersion) {
    throw Error(ErrorCode::MalformedHeader, "unsupported format version " + std::to_string(h.version));
  }
  const std::uint16_t dtype = get_u16(bytes.data() + 6);
  if (dtype > 1) {
    throw Error(ErrorCode::MalformedHeader, "unsupported dtype code " + std::to_string(dtype));
  }
  h.dtype = static_cast<BinaryDtype>(dtype);
  h.dim = get_u32(bytes.data() + 8);
  h.count = get_u32(bytes.data() + 12);
  if (h.dim == 0 && h.count != 0) {
    throw Error(ErrorCode::MalformedHeader, "dimension 0 with a non-empty record count");
  }
  return h;
}

BinaryTraceReader::BinaryTraceReader(std::istream& in) : in_(in) {
  std::array<unsigned char, kBinaryHeaderSize> raw{};
  const std::size_t got = read_some(in_, raw.data(), raw.size());
  if (got != raw.size()) {
    throw Error(ErrorCode::TruncatedFile, "header ends at byte offset " + std::to_string(got) +
                                              ", expected " + std::to_string(kBinaryHeaderSize) +
                                              " bytes");
  }
  header_ = decode_header(raw);
  offset_ = kBinaryHeaderSize;
  buf_.resize(header_.record_size());
}

std::optional<TraceRecord> BinaryTraceReader::next() {
  const std::size_t got = read_some(in_, buf_.data(), buf_.size());
  if (got == 0) return std::nullopt;
  if (got != buf_.size()) {
    throw Error(ErrorCode::TruncatedFile,
                "record " + std::to_string(records_read_) + " truncated at byte offset " +
                    std::to_string(offset_ + got) + " (record starts at " +
                    std::to_string(offset_) + ", needs " + std::to_string(buf_.size()) + " bytes)");
  }

  TraceRecord rec;
  rec.step_index = get_u32(buf_.data());
  if (records_read_ == 0 ? rec.step_index != 0 : rec.step_index != records_read_) {
    throw Error(ErrorCode::MalformedRecord,
                "record " + std::to_string(records_read_) + " at byte offset " +
                    std::to_string(offset_) + " has step " + std::to_string(rec.step_index) +
                    ", expected " + std::to_string(records_read_));
  }

  rec.embedding.resize(header_.dim);
  const unsigned char* p = buf_.data() + 4;
  for (std::uint32_t i = 0; i < header_.dim; ++i) {
    double v;
    if (header_.dtype == BinaryDtype::f32) {
      v = std::bit_cast<float>(get_u32(p));
      p += 4;
    } else {
      v = std::bit_cast<double>(get_u64(p));
      p += 8;
    }
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteValue, "record " + std::to_string(records_read_) +
                                                 " value " + std::to_string(i) + " is not finite");
    }
    rec.embedding[i] = v;
  }
  offset_ += buf_.size();
  ++records_read_;
  return rec;
}

void write_binary_record(std::ostream& out, const BinaryHeader& header, const TraceRecord& record) {
  if (record.embedding.size() != header.dim) {
    throw Error(ErrorCode::DimensionMismatch, "record " + std::to_string(record.step_index) +
                                                  " has dimension " +
                                                  std::to_string(record.embedding.size()) +
                                                  ", expected " + std::to_string(header.dim));
  }
  std::vector<unsigned char> buf(header.record_size());
  put_u32(buf.data(), static_cast<std::uint32_t>(record.step_index));
  unsigned char* p = buf.data() + 4;
  for (double v : record.embedding) {
    if (header.dtype == BinaryDtype::f32) {
      const auto f = static_cast<float>(v);
      if (!std::isfinite(f)) {
        throw Error(ErrorCode::NonFiniteValue, "record " + std::to_string(record.step_index) +
                                                   " has a value outside the 32-bit float range");
      }
      put_u32(p, std::bit_cast<std::uint32_t>(f));
      p += 4;
    } else {
      put_u64(p, std::bit_cast<std::uint64_t>(v));
      p += 8;
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void validate_trace(const Trace& trace) {
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& rec = trace.records[k];
    if (rec.embedding.size() != trace.dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "record " + std::to_string(k) + " has dimension " +
                      std::to_string(rec.embedding.size()) + ", expected " + std::to_string(trace.dim));
    }
    if (rec.step_index != k) {
      throw Error(ErrorCode::MalformedRecord, "record " + std::to_string(k) + " has step " +
                                                  std::to_string(rec.step_index) + ", expected " +
                                                  std::to_string(k));
    }
    for (double v : rec.embedding) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteValue, "record " + std::to_string(k) + " has a non-finite value");
      }
    }
  }
}

void write_trace_binary(std::ostream& out, const Trace& trace, BinaryDtype dtype) {
  validate_trace(trace);
  BinaryHeader header;
  header.dtype = dtype;
  header.dim = static_cast<std::uint32_t>(trace.dim);
  header.count = static_cast<std::uint32_t>(trace.records.size());
  const auto raw = encode_header(header);
  out.write(reinterpret_cast<const char*>(raw.data()), raw.size());
  for (const auto& rec : trace.records) write_binary_record(out, header, rec);
  if (!out) throw Error(ErrorCode::IoError, "write failed");
}

Trace read_trace_binary(std::istream& in) {
  BinaryTraceReader reader(in);
  Trace trace;
  trace.dim = reader.header().dim;
  trace.records.reserve(reader.header().count);
  while (trace.records.size() < reader.header().count) {
    auto rec = reader.next();
    if (!rec) {
      throw Error(ErrorCode::TruncatedFile,
                  "header promises " + std::to_string(reader.header().count) +
                      " records, file ends after " + std::to_string(trace.records.size()) +
                      " at byte offset " + std::to_string(reader.offset()));
    }
    trace.records.push_back(std::move(*rec));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::MalformedRecord,
                "unexpected data after the last record at byte offset " + std::to_string(reader.offset()));
  }
  return trace;
}

TraceRecord parse_jsonl_record(std::string_view line, std::size_t record_index) {
  const auto where = "record " + std::to_string(record_index);
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, where + ": " + e.what());
  }
  if (!obj.is_object() || !obj.contains("step") || !obj.contains("embedding")) {
    throw Error(ErrorCode::MalformedRecord, where + ": expected an object with step and embedding");
  }
  const auto& step = obj["step"];
  const auto& emb = obj["embedding"];
  if (!step.is_number_unsigned() || !emb.is_array()) {
    throw Error(ErrorCode::MalformedRecord, where + ": step must be a non-negative integer and "
                                                    "embedding an array");
  }

  TraceRecord rec;
  rec.step_index = step.get<std::uint64_t>();
  rec.embedding.reserve(emb.size());
  for (const auto& v : emb) {
    if (!v.is_number()) {
      throw Error(ErrorCode::MalformedRecord, where + ": embedding values must be numbers");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::NonFiniteValue, where + ": non-finite value");
    rec.embedding.push_back(d);
  }
  if (auto it = obj.find("text"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::MalformedRecord, where + ": text must be a string");
    rec.text = it->get<std::string>();
  }
  return rec;
}

void write_trace_jsonl(std::ostream& out, const Trace& trace) {
  validate_trace(trace);
  for (const auto& rec : trace.records) {
    nlohmann::json obj;
    obj["step"] = rec.step_index;
    obj["embedding"] = rec.embedding;
    if (rec.text) obj["text"] = *rec.text;
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed");
}

Trace read_trace_jsonl(std::istream& in) {
  Trace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::size_t k = trace.records.size();
    TraceRecord rec = parse_jsonl_record(line, k);
    if (k == 0) {
      trace.dim = rec.embedding.size();
    } else if (rec.embedding.size() != trace.dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "record " + std::to_string(k) + " has dimension " +
                      std::to_string(rec.embedding.size()) + ", expected " + std::to_string(trace.dim));
    }
    if (rec.step_index != k) {
      throw Error(ErrorCode::MalformedRecord, "record " + std::to_string(k) + " has step " +
                                                  std::to_string(rec.step_index) + ", expected " +
                                                  std::to_string(k));
    }
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

void write_trace(const std::filesystem::path& path, const Trace& trace, TraceFormat format,
                 BinaryDtype dtype) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  if (format == TraceFormat::binary) {
    write_trace_binary(out, trace, dtype);
  } else {
    write_trace_jsonl(out, trace);
  }
}

Trace read_trace(const std::filesystem::path& path, TraceFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return format == TraceFormat::binary ? read_trace_binary(in) : read_trace_jsonl(in);
}

Trace read_trace(const std::filesystem::path& path) {
  return read_trace(path, detect_trace_format(path));
}

}  // namespace cotloop
