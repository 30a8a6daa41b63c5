#include "fedsynth/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "fedsynth/error.hpp"

namespace fedsynth::io {

namespace {

std::uint32_t load_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (static_cast<std::uint32_t>(b[off]) << 24) |
         (static_cast<std::uint32_t>(b[off + 1]) << 16) |
         (static_cast<std::uint32_t>(b[off + 2]) << 8) | b[off + 3];
}

std::uint32_t load_le32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) |
         (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

double load_le_f64(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[off + static_cast<std::size_t>(i)];
  return std::bit_cast<double>(bits);
}

void store_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void store_le_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

[[noreturn]] void idx_error(const std::string& what, std::size_t offset) {
  throw FormatError("IDX: " + what + " at byte offset " + std::to_string(offset));
}

struct IdxHeader {
  std::vector<std::uint32_t> dims;
  std::size_t payload_offset = 0;
};

IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes, std::uint32_t magic) {
  if (bytes.size() < 4) idx_error("file too short for magic", bytes.size());
  const std::uint32_t got = load_be32(bytes, 0);
  if (got != magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "bad magic 0x%08X (expected 0x%08X)", got, magic);
    idx_error(buf, 0);
  }
  const std::size_t ndims = bytes[3];
  if (ndims == 0) idx_error("zero dimensions", 3);
  IdxHeader h;
  const std::size_t header_end = 4 + 4 * ndims;
  if (bytes.size() < header_end) idx_error("truncated dimension header", bytes.size());
  for (std::size_t i = 0; i < ndims; ++i) h.dims.push_back(load_be32(bytes, 4 + 4 * i));
  h.payload_offset = header_end;
  return h;
}

}  // namespace

Matrix parse_idx_images(std::span<const std::uint8_t> bytes) {
  const IdxHeader h = parse_idx_header(bytes, kIdxImageMagic);
  const std::size_t rows = h.dims[0];
  std::size_t cols = 1;
  for (std::size_t i = 1; i < h.dims.size(); ++i) {
    if (h.dims[i] != 0 && cols > std::numeric_limits<std::size_t>::max() / h.dims[i]) {
      idx_error("dimension overflow", 4 + 4 * i);
    }
    cols *= h.dims[i];
  }
  if (cols != 0 && rows > (std::numeric_limits<std::size_t>::max() - h.payload_offset) / cols) {
    idx_error("dimension overflow", 4);
  }
  const std::size_t need = h.payload_offset + rows * cols;
  if (bytes.size() < need) idx_error("truncated payload", bytes.size());
  if (bytes.size() > need) idx_error("trailing bytes after payload", need);
  std::vector<double> values(rows * cols);
  const auto* src = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = src[i];
  return Matrix(rows, cols, std::move(values));
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const IdxHeader h = parse_idx_header(bytes, kIdxLabelMagic);
  if (h.dims.size() != 1) idx_error("label file must be one-dimensional", 3);
  const std::size_t count = h.dims[0];
  const std::size_t need = h.payload_offset + count;
  if (bytes.size() != need) {
    idx_error("label count " + std::to_string(count) + " does not match payload of " +
                  std::to_string(bytes.size() - h.payload_offset) + " bytes",
              h.payload_offset);
  }
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = bytes[h.payload_offset + i];
  return labels;
}

Matrix read_idx_images(const std::filesystem::path& path) {
  return parse_idx_images(read_file_bytes(path));
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
  return parse_idx_labels(read_file_bytes(path));
}

Dataset read_idx_dataset(const std::filesystem::path& images,
                         const std::filesystem::path& labels,
                         std::optional<int> num_classes) {
  Dataset ds;
  ds.features = read_idx_images(images);
  ds.labels = read_idx_labels(labels);
  if (ds.features.rows() != ds.labels.size()) {
    throw FormatError("IDX: " + std::to_string(ds.features.rows()) + " images but " +
                      std::to_string(ds.labels.size()) + " labels");
  }
  const int max_label = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end());
  ds.num_classes = num_classes.value_or(max_label + 1);
  if (max_label >= ds.num_classes) {
    throw FormatError("IDX: label " + std::to_string(max_label) + " >= K=" +
                      std::to_string(ds.num_classes));
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------- CSV

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double_cell(std::string_view cell, std::size_t row, std::size_t col) {
  cell = trim(cell);
  double v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("CSV row " + std::to_string(row) + ", column " + std::to_string(col) +
                     ": non-numeric cell '" + std::string(cell) + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError("CSV row " + std::to_string(row) + ", column " + std::to_string(col) +
                     ": non-finite value '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace

Dataset parse_csv_dataset(const std::string& text, std::optional<std::size_t> label_column,
                          std::optional<int> num_classes) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("CSV: missing header row");
  const std::size_t ncols = split_commas(trim(line)).size();
  if (ncols < 2) throw ParseError("CSV: need at least one feature column and a label column");
  const std::size_t label_col = label_column.value_or(ncols - 1);
  if (label_col >= ncols) {
    throw ParseError("CSV: label column " + std::to_string(label_col) + " out of range");
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 1;  // header is row 1; data rows are numbered from 2
  while (std::getline(in, line)) {
    ++row;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto cells = split_commas(t);
    if (cells.size() != ncols) {
      throw ParseError("CSV row " + std::to_string(row) + ": expected " + std::to_string(ncols) +
                       " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      const double v = parse_double_cell(cells[c], row, c);
      if (c == label_col) {
        if (v != std::floor(v) || v < 0 || v > std::numeric_limits<int>::max()) {
          throw ParseError("CSV row " + std::to_string(row) + ": label '" +
                           std::string(trim(cells[c])) + "' is not a non-negative integer");
        }
        const int y = static_cast<int>(v);
        if (num_classes && y >= *num_classes) {
          throw ParseError("CSV row " + std::to_string(row) + ": label " + std::to_string(y) +
                           " >= K=" + std::to_string(*num_classes));
        }
        labels.push_back(y);
      } else {
        values.push_back(v);
      }
    }
  }
  Dataset ds;
  const std::size_t n = labels.size();
  ds.features = Matrix(n, ncols - 1, std::move(values));
  ds.labels = std::move(labels);
  const int max_label = n ? *std::max_element(ds.labels.begin(), ds.labels.end()) : 0;
  ds.num_classes = num_classes.value_or(max_label + 1);
  ds.validate();
  return ds;
}

Dataset read_csv_dataset(const std::filesystem::path& path,
                         std::optional<std::size_t> label_column,
                         std::optional<int> num_classes) {
  const auto bytes = read_file_bytes(path);
  return parse_csv_dataset(std::string(bytes.begin(), bytes.end()), label_column, num_classes);
}

std::string format_csv_dataset(const Dataset& ds) {
  ds.validate();
  std::string out;
  for (std::size_t j = 0; j < ds.dim(); ++j) out += "x" + std::to_string(j) + ",";
  out += "label\n";
  char buf[40];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) {
      const int n = std::snprintf(buf, sizeof buf, "%.17g,", v);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out += std::to_string(ds.labels[i]);
    out += '\n';
  }
  return out;
}

void write_csv_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, format_csv_dataset(ds));
}

// ---------------------------------------------------------------- binary

std::vector<std::uint8_t> encode_binary_synthetic(const SyntheticDataset& ds) {
  ds.validate();
  if (!ds.decoded_labels) throw ContractError("binary synthetic write needs decoded labels");
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (ds.size() > kMax || ds.dim > kMax) throw ContractError("dataset too large for format");
  std::vector<std::uint8_t> out;
  out.reserve(20 + ds.size() * ((ds.dim + static_cast<std::size_t>(ds.num_classes)) * 8 + 4));
  out.insert(out.end(), std::begin(kSyntheticMagic), std::end(kSyntheticMagic));
  store_le32(out, kSyntheticVersion);
  store_le32(out, static_cast<std::uint32_t>(ds.size()));
  store_le32(out, static_cast<std::uint32_t>(ds.dim));
  store_le32(out, static_cast<std::uint32_t>(ds.num_classes));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.records[i].features) store_le_f64(out, v);
    for (double v : ds.records[i].soft_label) store_le_f64(out, v);
    store_le32(out, static_cast<std::uint32_t>((*ds.decoded_labels)[i]));
  }
  return out;
}

SyntheticDataset decode_binary_synthetic(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 20) throw FormatError("synthetic: truncated header (" + std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), kSyntheticMagic, 4) != 0) throw FormatError("synthetic: bad magic");
  const std::uint32_t version = load_le32(bytes, 4);
  if (version != kSyntheticVersion) {
    throw FormatError("synthetic: unsupported version " + std::to_string(version));
  }
  const std::uint64_t rows = load_le32(bytes, 8);
  const std::uint64_t dim = load_le32(bytes, 12);
  const std::uint64_t k = load_le32(bytes, 16);
  if (k == 0 || k > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw FormatError("synthetic: invalid class count " + std::to_string(k));
  }
  const std::uint64_t record_bytes = (dim + k) * 8 + 4;
  if (rows * record_bytes != bytes.size() - 20) {
    throw FormatError("synthetic: payload is " + std::to_string(bytes.size() - 20) +
                      " bytes, header implies " + std::to_string(rows * record_bytes));
  }
  SyntheticDataset ds;
  ds.dim = dim;
  ds.num_classes = static_cast<int>(k);
  ds.records.resize(rows);
  std::vector<int> decoded(rows);
  std::size_t off = 20;
  for (std::size_t i = 0; i < rows; ++i) {
    auto& r = ds.records[i];
    r.features.resize(dim);
    r.soft_label.resize(k);
    for (auto& v : r.features) { v = load_le_f64(bytes, off); off += 8; }
    for (auto& v : r.soft_label) { v = load_le_f64(bytes, off); off += 8; }
    const std::uint32_t y = load_le32(bytes, off);
    off += 4;
    if (y >= k) throw FormatError("synthetic: decoded label out of range in record " + std::to_string(i));
    decoded[i] = static_cast<int>(y);
  }
  ds.decoded_labels = std::move(decoded);
  return ds;
}

void write_binary_synthetic(const SyntheticDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, encode_binary_synthetic(ds));
}

SyntheticDataset read_binary_synthetic(const std::filesystem::path& path) {
  return decode_binary_synthetic(read_file_bytes(path));
}

// ---------------------------------------------------------------- files

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path.string() + "'");
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace fedsynth::io
