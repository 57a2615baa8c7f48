#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gatehub/errors.hpp"
#include "gatehub/init.hpp"
#include "gatehub/serialize.hpp"
#include "gatehub/tensor.hpp"

namespace gatehub {
namespace {

TEST(Shape, ExtentsAndCounts) {
  const Shape s{2, 3, 4};
  EXPECT_EQ(s.rank(), 3u);
  EXPECT_EQ(s.numel(), 24u);
  EXPECT_EQ(s.cols(), 4u);
  EXPECT_EQ(s.rows(), 6u);
  EXPECT_EQ(s.str(), "[2x3x4]");
  EXPECT_EQ(Shape{}.numel(), 1u);
}

TEST(Shape, RejectsZeroExtentAndHighRank) {
  EXPECT_THROW((Shape{2, 0}), ShapeError);
  EXPECT_THROW((Shape{1, 1, 1, 1}), ShapeError);
}

TEST(Tensor, ConstructionChecksValueCount) {
  EXPECT_THROW(Tensor(Shape{2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  EXPECT_THROW(Tensor::matrix({{1, 2}, {3}}), ShapeError);
}

TEST(Tensor, HandlesShareStorageAndCloneDoesNot) {
  Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  Tensor alias = a;
  Tensor copy = a.clone();
  a.mutable_data()[0] = 9.0;
  EXPECT_EQ(alias.at(0, 0), 9.0);
  EXPECT_EQ(copy.at(0, 0), 1.0);
  EXPECT_TRUE(alias.same_storage(a));
  EXPECT_FALSE(copy.same_storage(a));
}

TEST(Tensor, GradientAccumulatorLifecycle) {
  Tensor w = Tensor::vector({1, 2, 3}, true);
  EXPECT_FALSE(w.has_grad());
  EXPECT_TRUE(w.grad().empty());
  w.mutable_grad()[1] = 5.0;
  EXPECT_TRUE(w.has_grad());
  EXPECT_EQ(w.grad()[1], 5.0);
  w.zero_grad();
  EXPECT_FALSE(w.has_grad());
}

TEST(Tensor, ItemRequiresSingleElement) {
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor::vector({1, 2}).item(), ShapeError);
}

TEST(Tensor, ReshapeKeepsValues) {
  const Tensor a = Tensor::vector({1, 2, 3, 4, 5, 6});
  const Tensor b = a.reshaped(Shape{2, 3});
  EXPECT_EQ(b.at(1, 0), 4.0);
  EXPECT_THROW(a.reshaped(Shape{4, 2}), ShapeError);
}

TEST(Serialize, RoundTripAt64BitIsExact) {
  Rng rng(3);
  const Tensor t = random_normal(Shape{3, 5, 2}, rng);
  std::stringstream buf;
  write_tensor(buf, t);
  const Tensor back = read_tensor(buf);
  ASSERT_EQ(back.shape(), t.shape());
  for (std::size_t i = 0; i < t.numel(); ++i) EXPECT_EQ(back.data()[i], t.data()[i]);
}

TEST(Serialize, Float32RoundTripIsFloatRounded) {
  const Tensor t = Tensor::vector({0.1, -2.5, 1e-3});
  std::stringstream buf;
  write_tensor(buf, t, DType::kFloat32);
  const Tensor back = read_tensor(buf);
  for (std::size_t i = 0; i < t.numel(); ++i) {
    EXPECT_EQ(back.data()[i], static_cast<double>(static_cast<float>(t.data()[i])));
  }
}

TEST(Serialize, LayoutIsLittleEndianWithHeader) {
  std::stringstream buf;
  write_tensor(buf, Tensor::vector({1.0}));
  const std::string bytes = buf.str();
  // magic(4) version(2) rank(1) extent(4) dtype(1) value(8)
  ASSERT_EQ(bytes.size(), 20u);
  EXPECT_EQ(bytes.substr(0, 4), "GHTB");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[11]), 2u);
  // 1.0 = 0x3FF0000000000000
  EXPECT_EQ(static_cast<unsigned char>(bytes[19]), 0x3Fu);
  EXPECT_EQ(static_cast<unsigned char>(bytes[18]), 0xF0u);
}

TEST(Serialize, MalformedInputIsRejected) {
  std::stringstream bad_magic("XXXX");
  EXPECT_THROW(read_tensor(bad_magic), FormatError);

  std::stringstream good;
  write_tensor(good, Tensor::vector({1.0, 2.0}));
  const std::string full = good.str();
  std::stringstream truncated(full.substr(0, full.size() - 3));
  EXPECT_THROW(read_tensor(truncated), FormatError);

  std::string wrong_dtype = full;
  wrong_dtype[11] = 7;
  std::stringstream dtype_stream(wrong_dtype);
  EXPECT_THROW(read_tensor(dtype_stream), FormatError);
}

TEST(Init, TruncatedNormalStaysWithinTwoSigma) {
  Rng rng(11);
  const Tensor t = truncated_normal(Shape{64, 64}, rng);
  double sq = 0.0;
  for (double v : t.data()) {
    EXPECT_LE(std::abs(v), 2.0 * kInitStd);
    sq += v * v;
  }
  EXPECT_TRUE(t.requires_grad());
  EXPECT_NEAR(std::sqrt(sq / static_cast<double>(t.numel())), 0.88 * kInitStd, 0.1 * kInitStd);
}

}  // namespace
}  // namespace gatehub
