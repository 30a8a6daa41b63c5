#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedsynth/dataset.hpp"
#include "fedsynth/error.hpp"
#include "fedsynth/io.hpp"

using namespace fedsynth;

namespace {

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols) {
  std::vector<std::uint8_t> b;
  push_be32(b, io::kIdxImageMagic);
  push_be32(b, n);
  push_be32(b, rows);
  push_be32(b, cols);
  for (std::uint32_t i = 0; i < n * rows * cols; ++i) b.push_back(static_cast<std::uint8_t>(i % 251));
  return b;
}

std::vector<std::uint8_t> idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> b;
  push_be32(b, io::kIdxLabelMagic);
  push_be32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

template <class Fn>
std::string error_text(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("fedsynth_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

SyntheticDataset small_synthetic() {
  SyntheticDataset s;
  s.dim = 3;
  s.num_classes = 2;
  s.records = {{{0.1, -2.5, 1e-300}, {0.25, 0.75}}, {{-0.0, 3.0, 7.0 / 3.0}, {1.0, 0.0}}};
  s.decoded_labels = std::vector<int>{1, 0};
  return s;
}

}  // namespace

TEST(Idx, ImagesAreFlattenedRowMajor) {
  const Matrix m = io::parse_idx_images(idx_images(3, 2, 4));
  ASSERT_EQ(m.rows(), 3u);
  ASSERT_EQ(m.cols(), 8u);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(1, 0), 8.0);
  EXPECT_EQ(m(2, 7), 23.0);
}

TEST(Idx, PixelRangeIsPreserved) {
  std::vector<std::uint8_t> b;
  push_be32(b, io::kIdxImageMagic);
  push_be32(b, 1);
  push_be32(b, 1);
  push_be32(b, 2);
  b.push_back(0);
  b.push_back(255);
  const Matrix m = io::parse_idx_images(b);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 1), 255.0);
}

TEST(Idx, Labels) {
  EXPECT_EQ(io::parse_idx_labels(idx_labels({3, 0, 9})), (std::vector<int>{3, 0, 9}));
}

TEST(Idx, BadMagicNamesOffsetZero) {
  auto b = idx_images(1, 1, 1);
  b[2] = 0x09;
  EXPECT_THROW(io::parse_idx_images(b), FormatError);
  const std::string msg = error_text([&] { io::parse_idx_images(b); });
  EXPECT_NE(msg.find("bad magic"), std::string::npos) << msg;
  EXPECT_NE(msg.find("byte offset 0"), std::string::npos) << msg;
}

TEST(Idx, LabelMagicIsRejectedForImages) {
  EXPECT_THROW(io::parse_idx_images(idx_labels({1})), FormatError);
  EXPECT_THROW(io::parse_idx_labels(idx_images(1, 1, 1)), FormatError);
}

TEST(Idx, TruncatedPayloadNamesFileLength) {
  auto b = idx_images(2, 2, 2);
  b.pop_back();
  const std::string msg = error_text([&] { io::parse_idx_images(b); });
  EXPECT_NE(msg.find("truncated payload"), std::string::npos) << msg;
  EXPECT_NE(msg.find("byte offset " + std::to_string(b.size())), std::string::npos) << msg;
}

TEST(Idx, TrailingBytesNameEndOfPayload) {
  auto b = idx_images(2, 2, 2);
  const std::size_t need = b.size();
  b.push_back(0);
  const std::string msg = error_text([&] { io::parse_idx_images(b); });
  EXPECT_NE(msg.find("trailing bytes"), std::string::npos) << msg;
  EXPECT_NE(msg.find("byte offset " + std::to_string(need)), std::string::npos) << msg;
}

TEST(Idx, TruncatedHeader) {
  std::vector<std::uint8_t> b{0, 0, 8};
  EXPECT_THROW(io::parse_idx_images(b), FormatError);
  b = {0, 0, 8, 3, 0, 0};
  EXPECT_THROW(io::parse_idx_images(b), FormatError);
}

TEST(Idx, LabelCountMismatch) {
  auto b = idx_labels({1, 2, 3});
  b.pop_back();
  const std::string msg = error_text([&] { io::parse_idx_labels(b); });
  EXPECT_NE(msg.find("label count 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("byte offset 8"), std::string::npos) << msg;
}

TEST_F(TempDir, IdxDatasetChecksCountsAndClasses) {
  io::write_file_atomic(dir_ / "img", idx_images(3, 1, 2));
  io::write_file_atomic(dir_ / "lab", idx_labels({0, 2, 1}));
  io::write_file_atomic(dir_ / "lab2", idx_labels({0, 1}));
  const Dataset ds = io::read_idx_dataset(dir_ / "img", dir_ / "lab");
  EXPECT_EQ(ds.num_classes, 3);
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.dim(), 2u);
  EXPECT_EQ(io::read_idx_dataset(dir_ / "img", dir_ / "lab", 10).num_classes, 10);
  EXPECT_THROW(io::read_idx_dataset(dir_ / "img", dir_ / "lab", 2), FormatError);
  EXPECT_THROW(io::read_idx_dataset(dir_ / "img", dir_ / "lab2"), FormatError);
}

TEST(Csv, ParsesWithDefaultLabelColumn) {
  const Dataset ds = io::parse_csv_dataset("a,b,label\n1.5,-2,1\n0,3e2,0\n");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.dim(), 2u);
  EXPECT_EQ(ds.num_classes, 2);
  EXPECT_EQ(ds.features(0, 0), 1.5);
  EXPECT_EQ(ds.features(1, 1), 300.0);
  EXPECT_EQ(ds.labels, (std::vector<int>{1, 0}));
}

TEST(Csv, ExplicitLabelColumnAndClassCount) {
  const Dataset ds = io::parse_csv_dataset("y,a\n2,0.5\n", 0, 5);
  EXPECT_EQ(ds.labels, (std::vector<int>{2}));
  EXPECT_EQ(ds.features(0, 0), 0.5);
  EXPECT_EQ(ds.num_classes, 5);
}

TEST(Csv, RoundTripIsExact) {
  Dataset ds;
  ds.num_classes = 3;
  ds.features = Matrix(3, 2, std::vector<double>{0.1, 1.0 / 3.0, -1e-17, 6.02214076e23, 5e-324, -2.0});
  ds.labels = {0, 2, 1};
  const Dataset back = io::parse_csv_dataset(io::format_csv_dataset(ds), std::nullopt, 3);
  EXPECT_EQ(back, ds);
}

TEST(Csv, RaggedRowNamesRowNumber) {
  const std::string msg = error_text([] { io::parse_csv_dataset("a,b,y\n1,2,0\n1,0\n"); });
  EXPECT_NE(msg.find("CSV row 3"), std::string::npos) << msg;
  EXPECT_THROW(io::parse_csv_dataset("a,b,y\n1,2,0\n1,0\n"), ParseError);
}

TEST(Csv, NonNumericCell) {
  const std::string msg = error_text([] { io::parse_csv_dataset("a,y\nx,0\n"); });
  EXPECT_NE(msg.find("CSV row 2"), std::string::npos) << msg;
  EXPECT_THROW(io::parse_csv_dataset("a,y\nx,0\n"), ParseError);
  EXPECT_THROW(io::parse_csv_dataset("a,y\nnan,0\n"), ParseError);
  EXPECT_THROW(io::parse_csv_dataset("a,y\ninf,0\n"), ParseError);
}

TEST(Csv, BadLabels) {
  EXPECT_THROW(io::parse_csv_dataset("a,y\n1,0.5\n"), ParseError);
  EXPECT_THROW(io::parse_csv_dataset("a,y\n1,-1\n"), ParseError);
  const std::string msg = error_text([] { io::parse_csv_dataset("a,y\n1,0\n1,4\n", std::nullopt, 4); });
  EXPECT_NE(msg.find("CSV row 3"), std::string::npos) << msg;
}

TEST(Csv, StructuralErrors) {
  EXPECT_THROW(io::parse_csv_dataset(""), ParseError);
  EXPECT_THROW(io::parse_csv_dataset("y\n1\n"), ParseError);
  EXPECT_THROW(io::parse_csv_dataset("a,y\n1,0\n", 5), ParseError);
}

TEST_F(TempDir, CsvFileRoundTrip) {
  Dataset ds;
  ds.num_classes = 2;
  ds.features = Matrix(2, 1, std::vector<double>{0.125, -7.0});
  ds.labels = {1, 0};
  io::write_csv_dataset(ds, dir_ / "d.csv");
  EXPECT_EQ(io::read_csv_dataset(dir_ / "d.csv"), ds);
}

TEST(Binary, RoundTripIsExact) {
  const SyntheticDataset s = small_synthetic();
  const auto bytes = io::encode_binary_synthetic(s);
  EXPECT_EQ(bytes.size(), 20u + 2u * (3 * 8 + 2 * 8 + 4));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FDPC");
  EXPECT_EQ(io::decode_binary_synthetic(bytes), s);
}

TEST(Binary, RejectsCorruptInput) {
  const auto good = io::encode_binary_synthetic(small_synthetic());
  auto b = good;
  b[0] = 'X';
  EXPECT_THROW(io::decode_binary_synthetic(b), FormatError);
  b = good;
  b[4] = 2;
  EXPECT_THROW(io::decode_binary_synthetic(b), FormatError);
  b = good;
  b.pop_back();
  EXPECT_THROW(io::decode_binary_synthetic(b), FormatError);
  b = std::vector<std::uint8_t>(good.begin(), good.begin() + 10);
  EXPECT_THROW(io::decode_binary_synthetic(b), FormatError);
  b = good;
  b[good.size() - 4] = 7;  // decoded label of the last record
  EXPECT_THROW(io::decode_binary_synthetic(b), FormatError);
}

TEST(Binary, NeedsDecodedLabels) {
  SyntheticDataset s = small_synthetic();
  s.decoded_labels.reset();
  EXPECT_THROW(io::encode_binary_synthetic(s), ContractError);
}

TEST_F(TempDir, AtomicWriteReplacesAndLeavesNoTemp) {
  const auto p = dir_ / "out.bin";
  io::write_file_atomic(p, std::string("first"));
  io::write_file_atomic(p, std::string("second"));
  const auto bytes = io::read_file_bytes(p);
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()), "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir_)) ++files;
  EXPECT_EQ(files, 1u);
}

TEST_F(TempDir, BinaryFileRoundTrip) {
  const SyntheticDataset s = small_synthetic();
  io::write_binary_synthetic(s, dir_ / "s.bin");
  EXPECT_EQ(io::read_binary_synthetic(dir_ / "s.bin"), s);
}

TEST_F(TempDir, MissingFileIsIoError) {
  EXPECT_THROW(io::read_file_bytes(dir_ / "absent"), IoError);
  EXPECT_THROW(io::read_csv_dataset(dir_ / "absent.csv"), IoError);
  EXPECT_THROW(io::write_file_atomic(dir_ / "no" / "such" / "dir", std::string("x")), IoError);
}

TEST(DatasetTest, ValidateAndSelect) {
  Dataset ds;
  ds.num_classes = 2;
  ds.features = Matrix(3, 1, std::vector<double>{1, 2, 3});
  ds.labels = {0, 1, 1};
  EXPECT_NO_THROW(ds.validate());
  EXPECT_EQ(ds.class_counts(), (std::vector<std::size_t>{1, 2}));
  const std::vector<std::size_t> idx{2, 0};
  const Dataset sub = ds.select(idx);
  EXPECT_EQ(sub.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(sub.features(0, 0), 3.0);
  ds.labels[1] = 2;
  EXPECT_THROW(ds.validate(), ContractError);
  ds.labels.pop_back();
  EXPECT_THROW(ds.validate(), ContractError);
}
