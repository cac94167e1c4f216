#include "adq/qds_format.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "adq/byte_io.hpp"
#include "adq/error.hpp"

namespace adq {

namespace {

void encode_header(ByteWriter& out, const QdsHeader& h) {
  for (char c : kQdsMagic) out.put_u8(static_cast<std::uint8_t>(c));
  out.put_u16(kQdsVersion);
  out.put_u64(h.sample_count);
  out.put_u32(h.shape.height);
  out.put_u32(h.shape.width);
  out.put_u32(h.shape.channels);
  out.put_u32(h.num_classes);
  out.put_u32(h.flags);
}

void encode_record(ByteWriter& out, const Sample& sample, BitWidth b,
                   std::vector<std::int32_t>& codes) {
  out.put_u8(static_cast<std::uint8_t>(b.bits()));
  out.put_u32(sample.label);
  if (b.dropped()) return;
  codes.resize(sample.values.size());
  const float scale = quantize_values(sample.values, b, codes);
  out.put_f32(scale);
  out.put_bytes(std::span<const std::uint8_t>(pack_codes(codes, b).payload));
}

void check_plan(const Dataset& dataset, const AllocationPlan& plan) {
  if (plan.size() != dataset.size()) {
    throw_validation("plan covers " + std::to_string(plan.size()) + " samples but the dataset has " +
                     std::to_string(dataset.size()));
  }
}

}  // namespace

std::size_t qds_record_bytes(std::size_t element_count, BitWidth b, bool labels) {
  const std::size_t fixed = 1 + (labels ? 4 : 0);
  return b.dropped() ? fixed : fixed + 4 + packed_size_bytes(element_count, b);
}

StorageReport storage_report(const SampleShape& shape, std::span<const BitWidth> bit_widths) {
  const std::uint64_t n = shape.element_count();
  StorageReport r;
  r.sample_count = bit_widths.size();
  std::uint64_t bit_sum = 0;
  for (BitWidth b : bit_widths) {
    const std::uint64_t bits = static_cast<std::uint64_t>(b.bits());
    bit_sum += bits;
    r.metadata_bits += 8 + 32;
    if (b.dropped()) {
      ++r.dropped_count;
      continue;
    }
    r.payload_bits += n * bits;
    r.scale_bits += 32;
    r.metadata_bits += 8 * packed_size_bytes(n, b) - n * bits;
  }
  const std::uint64_t total_bits = r.header_bits + r.payload_bits + r.scale_bits + r.metadata_bits;
  r.total_bytes = (total_bits + 7) / 8;
  r.b_avg = r.sample_count == 0 ? 0.0 : static_cast<double>(bit_sum) / static_cast<double>(r.sample_count);
  r.nominal_ratio = compression_ratio(r.b_avg);
  const double reference_bits = static_cast<double>(r.sample_count) * static_cast<double>(n) * 32.0;
  r.realized_ratio = reference_bits > 0.0 ? 1.0 - 8.0 * static_cast<double>(r.total_bytes) / reference_bits : 0.0;
  return r;
}

std::string format_report_table(const StorageReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "samples          %llu\n"
                "dropped          %llu\n"
                "average bits     %.6g\n"
                "payload bits     %llu\n"
                "scale bits       %llu\n"
                "metadata bits    %llu\n"
                "header bits      %llu\n"
                "total bytes      %llu\n"
                "nominal ratio    %.4f%%\n"
                "realized ratio   %.4f%%\n",
                static_cast<unsigned long long>(r.sample_count),
                static_cast<unsigned long long>(r.dropped_count), r.b_avg,
                static_cast<unsigned long long>(r.payload_bits),
                static_cast<unsigned long long>(r.scale_bits),
                static_cast<unsigned long long>(r.metadata_bits),
                static_cast<unsigned long long>(r.header_bits),
                static_cast<unsigned long long>(r.total_bytes), 100.0 * r.nominal_ratio,
                100.0 * r.realized_ratio);
  return buf;
}

std::string format_report_porcelain(const StorageReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "samples=%llu\ndropped=%llu\nb_avg=%.10g\npayload_bits=%llu\nscale_bits=%llu\n"
                "metadata_bits=%llu\nheader_bits=%llu\ntotal_bytes=%llu\nnominal_ratio=%.10g\n"
                "realized_ratio=%.10g\n",
                static_cast<unsigned long long>(r.sample_count),
                static_cast<unsigned long long>(r.dropped_count), r.b_avg,
                static_cast<unsigned long long>(r.payload_bits),
                static_cast<unsigned long long>(r.scale_bits),
                static_cast<unsigned long long>(r.metadata_bits),
                static_cast<unsigned long long>(r.header_bits),
                static_cast<unsigned long long>(r.total_bytes), r.nominal_ratio, r.realized_ratio);
  return buf;
}

EncodedQds encode_qds(const Dataset& dataset, const AllocationPlan& plan) {
  check_plan(dataset, plan);
  QdsHeader header{dataset.size(), dataset.shape(), dataset.num_classes(), kQdsFlagLabels};
  ByteWriter out;
  encode_header(out, header);
  std::vector<std::int32_t> codes;
  for (std::size_t i = 0; i < dataset.size(); ++i) encode_record(out, dataset[i], plan.assignments[i], codes);
  EncodedQds encoded{out.take(), storage_report(dataset.shape(), plan.assignments)};
  return encoded;
}

StorageReport write_qds(const Dataset& dataset, const AllocationPlan& plan,
                        const std::filesystem::path& path) {
  check_plan(dataset, plan);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw_io("cannot open '" + tmp.string() + "' for writing");
    ByteWriter out;
    encode_header(out, {dataset.size(), dataset.shape(), dataset.num_classes(), kQdsFlagLabels});
    std::vector<std::int32_t> codes;
    for (std::size_t i = 0; i <= dataset.size(); ++i) {
      const auto& bytes = out.bytes();
      file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      out.clear();
      if (i < dataset.size()) encode_record(out, dataset[i], plan.assignments[i], codes);
    }
    file.flush();
    if (!file) {
      file.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw_io("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw_io("cannot rename into '" + path.string() + "'");
  }
  return storage_report(dataset.shape(), plan.assignments);
}

QdsReader::QdsReader(const std::filesystem::path& path) {
  auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*file) throw_io("cannot open '" + path.string() + "' for reading");
  stream_ = std::move(file);
  read_header();
}

QdsReader::QdsReader(std::unique_ptr<std::istream> stream) : stream_(std::move(stream)) {
  read_header();
}

void QdsReader::read_exact(std::byte* dst, std::size_t count, const char* what) {
  stream_->read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(stream_->gcount()) != count) {
    throw_format("truncated " + std::string(what) + " in record " + std::to_string(next_index_));
  }
}

void QdsReader::read_header() {
  std::byte raw[kQdsHeaderBytes];
  stream_->read(reinterpret_cast<char*>(raw), kQdsHeaderBytes);
  const auto got = static_cast<std::size_t>(stream_->gcount());
  if (got >= 4 && std::memcmp(raw, kQdsMagic, 4) != 0) throw_format("bad magic: not a QDS1 file");
  if (got != kQdsHeaderBytes) throw_format("truncated QDS header");
  if (load_u16(raw + 4) != kQdsVersion) {
    throw_format("unsupported QDS version " + std::to_string(load_u16(raw + 4)));
  }
  header_.sample_count = load_u64(raw + 6);
  header_.shape = SampleShape{load_u32(raw + 14), load_u32(raw + 18), load_u32(raw + 22)};
  header_.num_classes = load_u32(raw + 26);
  header_.flags = load_u32(raw + 30);
  if (header_.shape.height == 0 || header_.shape.width == 0 || header_.shape.channels == 0) {
    throw_format("QDS header has a zero dimension");
  }
  if (header_.num_classes == 0) throw_format("QDS header has zero classes");
  if ((header_.flags & ~kQdsFlagLabels) != 0) throw_format("QDS header has unknown flag bits");
}

std::optional<QdsEntry> QdsReader::next() {
  if (next_index_ == header_.sample_count) {
    if (stream_->peek() != std::char_traits<char>::eof()) {
      throw_format("trailing bytes after record " + std::to_string(next_index_ - 1));
    }
    return std::nullopt;
  }
  std::byte fixed[5];
  const std::size_t fixed_len = header_.has_labels() ? 5 : 1;
  read_exact(fixed, fixed_len, "record header");
  const int bits = std::to_integer<int>(fixed[0]);
  if (!BitWidth::valid(bits)) {
    throw_format("invalid bit-width " + std::to_string(bits) + " in record " + std::to_string(next_index_));
  }
  const BitWidth b = BitWidth::of(bits);
  const std::uint32_t label = header_.has_labels() ? load_u32(fixed + 1) : 0;
  if (label >= header_.num_classes) {
    throw_format("label out of range in record " + std::to_string(next_index_));
  }
  if (b.dropped()) {
    ++next_index_;
    return DroppedSample{label};
  }

  const std::size_t n = header_.shape.element_count();
  std::byte scale_raw[4];
  read_exact(scale_raw, 4, "scale");
  const float scale = load_f32(scale_raw);
  if (!(scale > 0.0f) || !std::isfinite(scale)) {
    throw_format("non-positive scale in record " + std::to_string(next_index_));
  }
  payload_.resize(packed_size_bytes(n, b));
  read_exact(reinterpret_cast<std::byte*>(payload_.data()), payload_.size(), "payload");

  QuantizedSample q;
  q.codes.resize(n);
  try {
    unpack_codes(payload_, n, b, q.codes);
  } catch (const FormatError& e) {
    throw_format("record " + std::to_string(next_index_) + ": " + e.what());
  }
  q.scale = scale;
  q.bit_width = b;
  q.label = label;
  ++next_index_;
  return q;
}

namespace {

QdsContents drain(QdsReader& reader) {
  QdsContents contents{reader.header(), {}};
  while (auto entry = reader.next()) contents.entries.push_back(std::move(*entry));
  return contents;
}

}  // namespace

QdsContents read_qds(const std::filesystem::path& path) {
  QdsReader reader(path);
  return drain(reader);
}

QdsContents decode_qds(std::span<const std::byte> bytes) {
  auto stream = std::make_unique<std::istringstream>(
      std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()), std::ios::binary);
  QdsReader reader(std::move(stream));
  return drain(reader);
}

StorageReport storage_report(const QdsContents& contents) {
  std::vector<BitWidth> widths;
  widths.reserve(contents.entries.size());
  for (const auto& e : contents.entries) {
    widths.push_back(std::holds_alternative<QuantizedSample>(e) ? std::get<QuantizedSample>(e).bit_width
                                                                : BitWidth{});
  }
  auto report = storage_report(contents.header.shape, widths);
  if (!contents.header.has_labels()) {
    // Reports assume labelled records; remove the label bytes that are absent.
    report.metadata_bits -= 32 * report.sample_count;
    report.total_bytes = (report.header_bits + report.payload_bits + report.scale_bits +
                          report.metadata_bits + 7) / 8;
    const double reference = static_cast<double>(report.sample_count) *
                             static_cast<double>(contents.header.shape.element_count()) * 32.0;
    report.realized_ratio = reference > 0.0 ? 1.0 - 8.0 * static_cast<double>(report.total_bytes) / reference : 0.0;
  }
  return report;
}

Dataset materialize(const QdsContents& contents) {
  std::vector<Sample> samples;
  for (const auto& e : contents.entries) {
    if (const auto* q = std::get_if<QuantizedSample>(&e)) samples.push_back(dequantize_sample(*q));
  }
  return Dataset(contents.header.shape, contents.header.num_classes, std::move(samples));
}

Dataset materialize_training_set(const std::filesystem::path& path) { return materialize(read_qds(path)); }

}  // namespace adq
