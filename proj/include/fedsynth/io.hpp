#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedsynth/dataset.hpp"
#include "fedsynth/matrix.hpp"

namespace fedsynth::io {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// IDX (big-endian). Multi-dimensional payloads are flattened row-major, so a
// 60000x28x28 file yields a 60000x784 matrix. Pixel values stay in [0,255].
Matrix parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);
Matrix read_idx_images(const std::filesystem::path& path);
std::vector<int> read_idx_labels(const std::filesystem::path& path);

/// Images + labels as a Dataset; K defaults to max label + 1.
Dataset read_idx_dataset(const std::filesystem::path& images,
                         const std::filesystem::path& labels,
                         std::optional<int> num_classes = std::nullopt);

// CSV: ',' delimiter, '.' decimal point, header row required. The label
// column defaults to the last column. Values are written with 17 significant
// digits so a write/read cycle is exact.
Dataset parse_csv_dataset(const std::string& text,
                          std::optional<std::size_t> label_column = std::nullopt,
                          std::optional<int> num_classes = std::nullopt);
Dataset read_csv_dataset(const std::filesystem::path& path,
                         std::optional<std::size_t> label_column = std::nullopt,
                         std::optional<int> num_classes = std::nullopt);
std::string format_csv_dataset(const Dataset& ds);
void write_csv_dataset(const Dataset& ds, const std::filesystem::path& path);

// Binary synthetic format, all little-endian:
//   "FDPC" | u32 version=1 | u32 rows | u32 d_x | u32 K |
//   rows x ( d_x f64 features | K f64 soft label | u32 decoded label )
inline constexpr char kSyntheticMagic[4] = {'F', 'D', 'P', 'C'};
inline constexpr std::uint32_t kSyntheticVersion = 1;

std::vector<std::uint8_t> encode_binary_synthetic(const SyntheticDataset& ds);
SyntheticDataset decode_binary_synthetic(std::span<const std::uint8_t> bytes);
void write_binary_synthetic(const SyntheticDataset& ds, const std::filesystem::path& path);
SyntheticDataset read_binary_synthetic(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
/// Writes to a sibling temp file and renames it over `path`, so readers never
/// observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace fedsynth::io
