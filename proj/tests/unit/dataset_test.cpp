#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "lognnet/dataset.hpp"
#include "lognnet/error.hpp"
#include "support/synthetic.hpp"

using namespace lognnet;

namespace {

std::string header_for(const FeatureRegistry& reg, char delim = ',') {
  std::string h;
  for (const auto& n : reg.names()) h += n + delim;
  return h + "label\n";
}

std::string row_of(std::size_t nf, double v, int label, char delim = ',') {
  std::string r;
  for (std::size_t k = 0; k < nf; ++k) r += std::to_string(v + static_cast<double>(k)) + delim;
  return r + std::to_string(label) + "\n";
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lognnet::Error thrown";
  return ErrorCode::kUsage;
}

}  // namespace

TEST(Registry, BuiltInsHaveFiftyOneFeatures) {
  EXPECT_EQ(rbv1_registry().size(), 51u);
  EXPECT_EQ(rbv2_registry().size(), 51u);
  EXPECT_EQ(rbv1_registry().name(20), "MCHC");
  EXPECT_EQ(rbv1_registry().name(49), "eGFR");
  EXPECT_EQ(rbv2_registry().name(36), "NEU");
  EXPECT_EQ(rbv2_registry().index_of("aPTT"), 51u);
  EXPECT_EQ(rbv1_registry().index_of("nope"), 0u);
  EXPECT_EQ(rbv1_registry().class_names()[1], "COVID-19");
  EXPECT_EQ(rbv2_registry().class_names()[1], "ICU");
}

TEST(Csv, LoadsRegistryOrderedFile) {
  const auto& reg = rbv1_registry();
  std::stringstream in(header_for(reg) + row_of(51, 1.0, 1) + row_of(51, 2.0, 0));
  auto ds = read_csv(in, reg);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.samples[0].label, 1);
  EXPECT_EQ(ds.samples[1].label, 0);
  EXPECT_DOUBLE_EQ(ds.samples[0].values[19], 20.0);
  EXPECT_EQ(ds.class_counts()[0], 1u);
  EXPECT_EQ(ds.class_counts()[1], 1u);
}

TEST(Csv, LabelColumnMayComeFirst) {
  auto reg = synth::numbered_registry(2);
  std::stringstream in("label,f1,f2\n1,0.5,2\n0,1.5,3\n");
  auto ds = read_csv(in, reg);
  EXPECT_DOUBLE_EQ(ds.samples[1].values[0], 1.5);
  EXPECT_EQ(ds.samples[0].label, 1);
}

TEST(Csv, MisnamedColumnIsSchemaError) {
  const auto& reg = rbv1_registry();
  std::string h = header_for(reg);
  h.replace(h.find("MCHC"), 4, "MCHX");
  std::stringstream in(h + row_of(51, 1.0, 1));
  try {
    (void)read_csv(in, reg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(std::string(e.what()).find("column 20"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("MCHC"), std::string::npos);
  }
}

TEST(Csv, WrongColumnCountIsSchemaError) {
  auto reg = synth::numbered_registry(3);
  std::stringstream in("f1,f2,label\n1,2,0\n");
  EXPECT_EQ(code_of([&] { (void)read_csv(in, reg); }), ErrorCode::kSchema);
}

TEST(Csv, BadLabelNamesRow) {
  auto reg = synth::numbered_registry(1);
  std::stringstream in("f1,label\n1,0\n2,1\n3,2\n");
  try {
    (void)read_csv(in, reg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabel);
    EXPECT_NE(std::string(e.what()).find("row 4"), std::string::npos);
  }
}

TEST(Csv, NonNumericCellIsParseError) {
  auto reg = synth::numbered_registry(2);
  std::stringstream in("f1,f2,label\n1,abc,0\n");
  EXPECT_EQ(code_of([&] { (void)read_csv(in, reg); }), ErrorCode::kParse);
}

TEST(Csv, MissingTokens) {
  auto reg = synth::numbered_registry(4);
  std::stringstream in("f1,f2,f3,f4,label\n,NA,NaN,4,1\n");
  auto ds = read_csv(in, reg);
  const auto& s = ds.samples[0];
  EXPECT_TRUE(s.missing[0]);
  EXPECT_TRUE(s.missing[1]);
  EXPECT_TRUE(s.missing[2]);
  EXPECT_FALSE(s.missing[3]);
  EXPECT_TRUE(s.has_missing());
}

TEST(Csv, SemicolonDelimiter) {
  auto reg = synth::numbered_registry(2);
  std::stringstream in("f1;f2;label\n1.25;2;1\n");
  CsvOptions opt;
  opt.delimiter = ';';
  auto ds = read_csv(in, reg, opt);
  EXPECT_DOUBLE_EQ(ds.samples[0].values[0], 1.25);
}

TEST(Csv, RoundTripPreservesValuesAndMissing) {
  auto ds = synth::separable_dataset(20, 2, 3);
  ds.samples[4].missing.assign(3, false);
  ds.samples[4].missing[1] = true;
  std::stringstream buf;
  write_csv(buf, ds);
  auto back = read_csv(buf, ds.registry);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back.samples[i].label, ds.samples[i].label);
    for (std::size_t k = 0; k < 3; ++k) {
      if (i == 4 && k == 1) {
        EXPECT_TRUE(back.samples[i].missing[k]);
      } else {
        EXPECT_EQ(back.samples[i].values[k], ds.samples[i].values[k]);
      }
    }
  }
}

TEST(Csv, FileRoundTripAndHeaderRegistry) {
  auto ds = synth::separable_dataset(10, 1, 5);
  auto path = std::filesystem::temp_directory_path() / "lognnet_dataset_test.csv";
  save_csv(path, ds);
  auto reg = registry_from_csv_header(path);
  EXPECT_EQ(reg.names(), ds.registry.names());
  auto back = load_csv(path, reg);
  EXPECT_EQ(back.size(), 10u);
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([&] { (void)load_csv(path, reg); }), ErrorCode::kIo);
}

TEST(Impute, ReplacesMissingWithColumnMean) {
  auto ds = synth::dataset_from_rows({{1, 10}, {3, 0}, {0, 30}}, {0, 1, 1});
  ds.samples[2].missing = {true, false};
  ds.samples[1].missing = {false, true};
  auto out = impute_means(ds);
  EXPECT_DOUBLE_EQ(out.samples[2].values[0], 2.0);
  EXPECT_DOUBLE_EQ(out.samples[1].values[1], 20.0);
  EXPECT_FALSE(out.samples[2].has_missing());
}

TEST(Impute, FullyMissingColumnFails) {
  auto ds = synth::dataset_from_rows({{1, 0}, {3, 0}}, {0, 1});
  ds.samples[0].missing = {false, true};
  ds.samples[1].missing = {false, true};
  EXPECT_EQ(code_of([&] { (void)impute_means(ds); }), ErrorCode::kImputation);
}

TEST(Divisors, MaxAbsWithZeroGuard) {
  auto ds = synth::dataset_from_rows({{-4, 0, 1}, {2, 0, -7}}, {0, 1});
  auto d = normalization_divisors(ds, FeatureMask(3));
  EXPECT_EQ(d, (std::vector<double>{4, 1, 7}));
  auto m = FeatureMask::from_removed(3, {3});
  EXPECT_EQ(normalization_divisors(ds, m), (std::vector<double>{4, 1, 1}));
}

TEST(Mask, RemovedAndSelectedAreComplements) {
  auto m = FeatureMask::from_removed(5, {2, 4});
  EXPECT_EQ(m.removed(), (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(m.selected(), (std::vector<std::size_t>{1, 3, 5}));
  EXPECT_EQ(m.num_selected(), 3u);
  EXPECT_EQ(FeatureMask::from_selected(5, {1, 3, 5}), m);
  EXPECT_EQ(code_of([] { (void)FeatureMask::from_removed(5, {6}); }),
            ErrorCode::kInvalidParameter);
}

TEST(Mask, ApplyZeroesRemovedFeatures) {
  auto ds = synth::dataset_from_rows({{1, 2, 3}}, {1});
  auto out = apply_mask(ds, FeatureMask::from_removed(3, {2}));
  EXPECT_EQ(out.samples[0].values, (std::vector<double>{1, 0, 3}));
}
