#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "nbtv/error.hpp"
#include "nbtv/image.hpp"
#include "nbtv/image_io.hpp"
#include "test_support.hpp"

namespace nbtv {
namespace {

using testing::random_image;
using testing::TempDir;

TEST(Rmse, IdenticalImagesGiveZero) {
  const Image t = Image::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  EXPECT_EQ(rmse(t, t), 0.0);
}

TEST(Rmse, ZeroEstimateGivesOne) {
  EXPECT_DOUBLE_EQ(rmse(Image::from_rows({{0.0, 0.0}}), Image::from_rows({{3.0, 4.0}})), 1.0);
}

TEST(Rmse, HandEvaluatedCase) {
  // ||(0, -4)|| / ||(3, 4)||
  EXPECT_NEAR(rmse(Image::from_rows({{3.0, 0.0}}), Image::from_rows({{3.0, 4.0}})), 0.8, 1e-15);
}

TEST(Rmse, ScaledTruthGivesScaleOffset) {
  std::mt19937_64 rng(3);
  const Image t = random_image(5, 7, rng, 0.1, 2.0);
  for (double c : {0.0, 0.5, 1.0, 1.7, 3.0}) {
    Image e = t;
    for (auto& v : e.values()) v *= c;
    EXPECT_NEAR(rmse(e, t), std::abs(c - 1.0), 1e-14) << "c = " << c;
  }
}

TEST(Rmse, RejectsZeroTruthAndShapeMismatch) {
  EXPECT_THROW(rmse(Image(2, 2, 1.0), Image(2, 2, 0.0)), DegenerateInputError);
  EXPECT_THROW(rmse(Image(2, 2, 1.0), Image(2, 3, 1.0)), ShapeError);
}

TEST(ImageConstruction, RejectsNonFiniteValues) {
  EXPECT_THROW(Image(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()}), DomainError);
  EXPECT_THROW(Image(1, 1, {std::numeric_limits<double>::infinity()}), DomainError);
  EXPECT_THROW(Image(2, 2, {1.0, 2.0, 3.0}), ShapeError);
}

TEST(ImageConstruction, CountsMustBeNonnegative) {
  EXPECT_THROW(ObservedCounts(1, 2, {1, -1}), DomainError);
  const ObservedCounts y(1, 3, {0, 2, 5});
  EXPECT_EQ(y.total(), 7);
  EXPECT_EQ(y.as_image(), Image::from_rows({{0.0, 2.0, 5.0}}));
}

TEST(ImageConstruction, SignalRoleRequiresNonnegative) {
  EXPECT_THROW(require_nonnegative(Image::from_rows({{1.0, -1e-12}}), "f"), DomainError);
  EXPECT_NO_THROW(require_nonnegative(Image::from_rows({{0.0, 1.0}}), "f"));
}

TEST(CsvIo, SmallGridRoundTrips) {
  TempDir dir("csv");
  const Image img = Image::from_rows({{0.0, 1.0}, {2.0, 3.0}});
  write_csv(dir / "a.csv", img);
  EXPECT_EQ(read_csv(dir / "a.csv"), img);
}

TEST(CsvIo, RandomValuesRoundTripExactly) {
  std::mt19937_64 rng(11);
  const Image img = random_image(9, 4, rng, -1e3, 1e3);
  EXPECT_EQ(parse_csv(format_csv(img)), img);
}

TEST(CsvIo, WrongColumnCountReportsLine) {
  try {
    parse_csv("2,2\n1,2\n3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_csv("2,2\n1,2\n"), ShapeError);
  EXPECT_THROW(parse_csv("1,2\n1,abc\n"), ParseError);
  EXPECT_THROW(parse_csv(""), ParseError);
}

TEST(CsvIo, CountsRejectFractionalValues) {
  TempDir dir("counts");
  {
    std::ofstream out(dir / "y.csv");
    out << "1,2\n1,2.5\n";
  }
  EXPECT_THROW(read_counts_csv(dir / "y.csv"), Error);
  const ObservedCounts y(2, 2, {0, 1, 7, 123456});
  write_counts_csv(dir / "z.csv", y);
  EXPECT_EQ(read_counts_csv(dir / "z.csv"), y);
}

TEST(PgmIo, UnitValueMapsToMaxval) {
  TempDir dir("pgm");
  const Image img = Image::from_rows({{0.0, 1.0}, {0.5, 0.25}});
  write_pgm(dir / "a.pgm", img, 1.0);
  std::ifstream in(dir / "a.pgm", std::ios::binary);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  unsigned char px[4];
  in.read(reinterpret_cast<char*>(px), 4);
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(maxval, 65535u);
  EXPECT_EQ(px[2] * 256 + px[3], 65535);

  const Image back = read_pgm(dir / "a.pgm");
  EXPECT_EQ(back(0, 1), 1.0);
  EXPECT_EQ(back(0, 0), 0.0);
  EXPECT_NEAR(back(1, 0), 0.5, 1.0 / 65535);
}

TEST(PgmIo, QuantizationErrorBoundedByHalfLevel) {
  TempDir dir("pgmq");
  std::mt19937_64 rng(5);
  const Image img = random_image(6, 5, rng, 0.0, 40.0);
  write_pgm(dir / "b.pgm", img);
  const Image back = read_image(dir / "b.pgm");
  const double level = img.max() / 65535;
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_LE(std::abs(back[i] - img[i]), 0.5 * level + 1e-12);
}

TEST(PgmIo, RejectsWrongMagic) {
  TempDir dir("pgmbad");
  {
    std::ofstream out(dir / "c.pgm", std::ios::binary);
    out << "P2\n1 1\n65535\n0\n";
  }
  EXPECT_THROW(read_pgm(dir / "c.pgm"), ParseError);
}

}  // namespace
}  // namespace nbtv
