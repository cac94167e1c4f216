#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adq/allocator.hpp"
#include "adq/dataset.hpp"
#include "adq/quantizer.hpp"

namespace adq {

// QDS v1 layout, little-endian throughout.
//
// Header (34 bytes):
//   "QDS1" | u16 version=1 | u64 sample_count | u32 height | u32 width |
//   u32 channels | u32 num_classes | u32 flags (bit 0: labels present)
//
// Record, one per sample in dataset order:
//   u8 bit_width (0 or 2..16) | u32 label (if flag bit 0) |
//   f32 scale + ceil(n * b / 8) payload bytes (only when bit_width >= 2)
//
// Payload layout is the PackedCodes layout: offset codes, MSB-first,
// zero padded to a byte boundary.

inline constexpr char kQdsMagic[4] = {'Q', 'D', 'S', '1'};
inline constexpr std::uint16_t kQdsVersion = 1;
inline constexpr std::size_t kQdsHeaderBytes = 4 + 2 + 8 + 4 + 4 + 4 + 4 + 4;
inline constexpr std::uint32_t kQdsFlagLabels = 1u;

struct QdsHeader {
  std::uint64_t sample_count = 0;
  SampleShape shape;
  std::uint32_t num_classes = 1;
  std::uint32_t flags = kQdsFlagLabels;

  bool has_labels() const { return (flags & kQdsFlagLabels) != 0; }
  bool operator==(const QdsHeader&) const = default;
};

/// Tombstone for a 0-bit sample; keeps index alignment with plan files.
struct DroppedSample {
  std::uint32_t label = 0;
  bool operator==(const DroppedSample&) const = default;
};

using QdsEntry = std::variant<QuantizedSample, DroppedSample>;

/// Byte size of one record for the given element count.
std::size_t qds_record_bytes(std::size_t element_count, BitWidth b, bool labels = true);

struct StorageReport {
  std::uint64_t sample_count = 0;
  std::uint64_t dropped_count = 0;
  std::uint64_t payload_bits = 0;   // sum over surviving samples of n * b
  std::uint64_t scale_bits = 0;     // 32 per surviving sample
  std::uint64_t metadata_bits = 0;  // bit-width byte, label, payload padding
  std::uint64_t header_bits = 8 * kQdsHeaderBytes;
  std::uint64_t total_bytes = 0;    // exact file size
  double b_avg = 0.0;
  double nominal_ratio = 0.0;   // 1 - b_avg / 32, payload only
  double realized_ratio = 0.0;  // 1 - 8 * total_bytes / (N * n * 32); 0 when N * n = 0

  bool operator==(const StorageReport&) const = default;
};

/// Human-readable table.
std::string format_report_table(const StorageReport& report);
/// `key=value` lines.
std::string format_report_porcelain(const StorageReport& report);

/// Accounting for a set of per-sample bit-widths, without touching data.
StorageReport storage_report(const SampleShape& shape, std::span<const BitWidth> bit_widths);

struct EncodedQds {
  std::vector<std::byte> bytes;
  StorageReport report;
};

/// Quantizes every surviving sample at its planned bit-width and encodes
/// header then records. Output bytes depend only on (dataset, plan).
EncodedQds encode_qds(const Dataset& dataset, const AllocationPlan& plan);

/// encode_qds written through a temporary file and renamed into place.
StorageReport write_qds(const Dataset& dataset, const AllocationPlan& plan,
                        const std::filesystem::path& path);

/// Record-at-a-time reader; holds one record in memory at a time.
class QdsReader {
 public:
  explicit QdsReader(const std::filesystem::path& path);
  explicit QdsReader(std::unique_ptr<std::istream> stream);

  const QdsHeader& header() const { return header_; }

  /// Index of the next record to be returned.
  std::uint64_t position() const { return next_index_; }

  /// Next record, or nullopt after the last one. Throws FormatError on a
  /// truncated or malformed record, naming its index, and on trailing bytes.
  std::optional<QdsEntry> next();

 private:
  void read_header();
  void read_exact(std::byte* dst, std::size_t count, const char* what);

  std::unique_ptr<std::istream> stream_;
  QdsHeader header_;
  std::uint64_t next_index_ = 0;
  std::vector<std::byte> buffer_;
  std::vector<std::uint8_t> payload_;
};

struct QdsContents {
  QdsHeader header;
  std::vector<QdsEntry> entries;
};

QdsContents read_qds(const std::filesystem::path& path);
QdsContents decode_qds(std::span<const std::byte> bytes);

/// Accounting recomputed from a file's records.
StorageReport storage_report(const QdsContents& contents);

/// Dequantizes surviving entries in order, skipping tombstones.
Dataset materialize(const QdsContents& contents);
Dataset materialize_training_set(const std::filesystem::path& path);

}  // namespace adq
