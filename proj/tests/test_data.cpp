#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "roboss/data.hpp"

using namespace roboss;

namespace {

Dataset from_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "inline");
}

Dataset from_sparse(const std::string& text) {
  std::istringstream in(text);
  return parse_sparse(in, "inline");
}

bool bit_equal(const Dataset& a, const Dataset& b) {
  if (a.X.rows() != b.X.rows() || a.X.cols() != b.X.cols() || a.y.size() != b.y.size()) return false;
  return std::equal(a.X.data(), a.X.data() + a.X.size(), b.X.data(),
                    [](double x, double y) { return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y); }) &&
         a.y == b.y;
}

}  // namespace

TEST(ParseCsv, Basic) {
  const auto ds = from_csv("1,2,1\n3,4,-1\n");
  ASSERT_EQ(ds.size(), 2u);
  ASSERT_EQ(ds.dim(), 2u);
  EXPECT_EQ(ds.X(1, 0), 3.0);
  EXPECT_EQ(ds.y[0], 1.0);
  EXPECT_EQ(ds.y[1], -1.0);
  EXPECT_FALSE(ds.normalized);
}

TEST(ParseCsv, BinaryLabelsRemapped) {
  const auto ds = from_csv("0.5,1\n0.25,0\n1.5,1\n");
  EXPECT_EQ(ds.y[0], 1.0);
  EXPECT_EQ(ds.y[1], -1.0);
}

TEST(ParseCsv, HeaderDetectedAndCrlfTolerated) {
  const auto ds = from_csv("f1,f2,label\r\n1,2,1\r\n3,4,-1\r\n");
  EXPECT_EQ(ds.size(), 2u);
}

TEST(ParseCsv, ErrorsCarryLineNumbers) {
  try {
    from_csv("1,2,1\n3,x,-1\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  try {
    from_csv("1,2,1\n3,-1\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(from_csv(""), DataError);
  EXPECT_THROW(from_csv("a,b,c\n"), DataError);
}

TEST(ParseCsv, MixedLabelAlphabetRejected) {
  EXPECT_THROW(from_csv("1,1\n2,0\n3,-1\n"), DataError);
  EXPECT_THROW(from_csv("1,2\n2,1\n"), DataError);
}

TEST(ParseSparse, Basic) {
  const auto ds = from_sparse("+1 2:0.5\n-1 1:3 3:-2 # comment\n\n");
  ASSERT_EQ(ds.size(), 2u);
  ASSERT_EQ(ds.dim(), 3u);
  EXPECT_EQ(ds.X(0, 0), 0.0);
  EXPECT_EQ(ds.X(0, 1), 0.5);
  EXPECT_EQ(ds.X(1, 2), -2.0);
  EXPECT_EQ(ds.y[0], 1.0);
  EXPECT_EQ(ds.y[1], -1.0);
}

TEST(ParseSparse, Errors) {
  EXPECT_THROW(from_sparse("+1 0:1\n"), DataError);
  EXPECT_THROW(from_sparse("+1 2\n"), DataError);
  EXPECT_THROW(from_sparse("x 1:1\n"), DataError);
  EXPECT_THROW(from_sparse("# only a comment\n"), DataError);
}

TEST(LoadDataset, MissingFileNamesPath) {
  try {
    load_dataset("/nonexistent/data.csv", DataFormat::CSV);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/data.csv"), std::string::npos);
  }
}

TEST(LoadDataset, WriteThenReadRoundTrips) {
  const auto ds = make_two_clusters({30, 3, 4.0, 1.0, 5});
  const auto path = std::filesystem::temp_directory_path() / "roboss_roundtrip.csv";
  {
    std::ofstream out(path);
    write_csv(out, ds);
  }
  const auto back = load_dataset(path, DataFormat::CSV);
  EXPECT_TRUE(bit_equal(ds, back));
  EXPECT_EQ(back.name, "roboss_roundtrip");
  std::filesystem::remove(path);
}

TEST(Normalize, Examples) {
  const auto ds = normalize(from_csv("0,7,-2,1\n5,7,2,-1\n10,7,2,1\n"));
  EXPECT_EQ(ds.X(0, 0), -1.0);
  EXPECT_EQ(ds.X(1, 0), 0.0);
  EXPECT_EQ(ds.X(2, 0), 1.0);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(ds.X(i, 1), 0.0);
  EXPECT_EQ(ds.X(0, 2), -1.0);
  EXPECT_EQ(ds.X(1, 2), 1.0);
  EXPECT_TRUE(ds.normalized);
  ASSERT_TRUE(ds.scaler.has_value());
  EXPECT_THROW(normalize(ds), DataError);
}

TEST(Normalize, EveryNonConstantColumnSpansExactly) {
  const auto ds = normalize(make_two_clusters({57, 6, 3.0, 2.0, 9}));
  for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
    EXPECT_EQ(ds.X.col(j).minCoeff(), -1.0);
    EXPECT_EQ(ds.X.col(j).maxCoeff(), 1.0);
  }
}

TEST(ApplyScaler, Examples) {
  const Scaler s{{0.0}, {10.0}};
  const auto ds = apply_scaler(from_csv("20,1\n5,-1\n0,1\n"), s);
  EXPECT_EQ(ds.X(0, 0), 3.0);
  EXPECT_EQ(ds.X(1, 0), 0.0);
  EXPECT_EQ(ds.X(2, 0), -1.0);
  EXPECT_THROW(apply_scaler(from_csv("1,2,1\n"), s), ShapeError);
}

TEST(Folds, SizesAndPartition) {
  const auto p10 = make_folds(10, 5, 1);
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(p10.test_indices(f).size(), 2u);
  const auto p11 = make_folds(11, 5, 1);
  std::multiset<std::size_t> sizes;
  for (std::size_t f = 0; f < 5; ++f) sizes.insert(p11.test_indices(f).size());
  EXPECT_EQ(sizes, (std::multiset<std::size_t>{2, 2, 2, 2, 3}));

  const auto p = make_folds(97, 5, 42);
  std::vector<int> hits(97, 0);
  for (std::size_t f = 0; f < 5; ++f) {
    const auto test = p.test_indices(f);
    const auto train = p.train_indices(f);
    EXPECT_EQ(test.size() + train.size(), 97u);
    for (auto i : test) ++hits[i];
  }
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST(Folds, SeededAndValidated) {
  EXPECT_EQ(make_folds(50, 5, 3).assignments, make_folds(50, 5, 3).assignments);
  EXPECT_NE(make_folds(50, 5, 3).assignments, make_folds(50, 5, 4).assignments);
  EXPECT_THROW(make_folds(3, 5, 0), ParameterError);
  EXPECT_THROW(make_folds(10, 1, 0), ParameterError);
}

TEST(Outliers, CountsAndRecord) {
  const auto ds = make_two_clusters({100, 4, 4.0, 1.0, 2});
  const auto [bad, rec] = inject_outliers(ds, 0.05, 10.0, 17);
  EXPECT_EQ(rec.touched_indices.size(), 5u);
  EXPECT_TRUE(std::is_sorted(rec.touched_indices.begin(), rec.touched_indices.end()));
  EXPECT_EQ(std::set<std::size_t>(rec.touched_indices.begin(), rec.touched_indices.end()).size(), 5u);
  for (std::size_t r = 0; r < 5; ++r) {
    const auto i = static_cast<Eigen::Index>(rec.touched_indices[r]);
    const auto j = static_cast<Eigen::Index>(rec.touched_features[r]);
    EXPECT_EQ(bad.X(i, j), ds.X(i, j) * 10.0);
  }
  Eigen::MatrixXd diff = (bad.X - ds.X).cwiseAbs();
  EXPECT_EQ((diff.array() > 0).count(), 5);
  EXPECT_EQ(bad.y, ds.y);
  EXPECT_EQ(inject_outliers(ds, 0.05, 10.0, 17).second, rec);
}

TEST(Outliers, ZeroFeatureStaysZero) {
  Dataset ds = from_csv("0,0,1\n0,0,-1\n0,0,1\n");
  const auto [bad, rec] = inject_outliers(ds, 0.5, 10.0, 1);
  EXPECT_EQ(rec.touched_indices.size(), 2u);
  EXPECT_EQ(bad.X, ds.X);
}

TEST(Outliers, RateValidated) {
  const auto ds = make_two_clusters({20, 2, 4.0, 1.0, 2});
  EXPECT_THROW(inject_outliers(ds, 0.0), ParameterError);
  EXPECT_THROW(inject_outliers(ds, 1.5), ParameterError);
  EXPECT_THROW(inject_label_noise(ds, -0.1), ParameterError);
}

TEST(LabelNoise, CountsAndRounding) {
  const auto ds = make_two_clusters({100, 2, 4.0, 1.0, 2});
  const auto [bad, rec] = inject_label_noise(ds, 0.30, 8);
  EXPECT_EQ(rec.touched_indices.size(), 30u);
  EXPECT_EQ(((bad.y - ds.y).array() != 0).count(), 30);
  EXPECT_EQ(corruption_count(0.10, 7), 1u);
  EXPECT_EQ(corruption_count(0.5, 5), 3u);  // 2.5 rounds up
  EXPECT_EQ(corruption_count(0.05, 100), 5u);
}

TEST(Corruption, InversionRestoresBitExactly) {
  const auto ds = normalize(make_two_clusters({137, 5, 3.0, 1.3, 21}));
  for (double rate : {0.05, 0.10, 0.20, 0.30}) {
    const auto [bad, rec] = inject_outliers(ds, rate, 10.0, 99);
    EXPECT_FALSE(bit_equal(bad, ds));
    EXPECT_TRUE(bit_equal(revert_corruption(bad, rec), ds));
    const auto [noisy, lrec] = inject_label_noise(ds, rate, 99);
    EXPECT_TRUE(bit_equal(revert_corruption(noisy, lrec), ds));
    // Re-applying a label record is the same flip again.
    EXPECT_TRUE(bit_equal(revert_corruption(revert_corruption(noisy, lrec), lrec), noisy));
  }
}

TEST(Corruption, MismatchedRecordRejected) {
  const auto ds = make_two_clusters({40, 3, 3.0, 1.0, 1});
  const auto [bad, rec] = inject_outliers(ds, 0.1, 10.0, 3);
  EXPECT_THROW(revert_corruption(ds, rec), DataError);
}

TEST(Clusters, LayoutAndDeterminism) {
  const auto ds = make_two_clusters({11, 3, 6.0, 0.5, 4});
  EXPECT_EQ((ds.y.array() > 0).count(), 6);
  EXPECT_EQ(ds.y[0], 1.0);
  EXPECT_EQ(ds.y[10], -1.0);
  EXPECT_TRUE(bit_equal(ds, make_two_clusters({11, 3, 6.0, 0.5, 4})));
  EXPECT_NO_THROW(validate(ds));
}
