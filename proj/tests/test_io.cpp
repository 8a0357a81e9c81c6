#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <string>

#include "kite/io.hpp"
#include "kite/serialize.hpp"
#include "oracles.hpp"

namespace kite {
namespace {

std::string f64_bytes(double v) {
  std::string s(8, '\0');
  std::memcpy(s.data(), &v, 8);
  return s;
}

std::string smallest_kitebin() {
  std::string b = "KITE";
  b += std::string("\x01\x00\x00\x00", 4);
  b += std::string("\x02\x00\x00\x00", 4);
  return b + f64_bytes(1.0) + f64_bytes(2.0);
}

TEST(Kitebin, SmallestFile) {
  const auto bank = parse_kitebin(smallest_kitebin());
  ASSERT_EQ(bank.size(), 1u);
  ASSERT_EQ(bank.dim(), 2u);
  EXPECT_EQ(bank.vectors()(0, 0), 1.0);
  EXPECT_EQ(bank.vectors()(0, 1), 2.0);
  EXPECT_EQ(bank.ids(), (std::vector<std::string>{"0"}));
  EXPECT_EQ(encode_kitebin(bank.vectors()), smallest_kitebin());
}

TEST(Kitebin, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(1);
  RowMatrix m = oracle::gaussian_rows(rng, 100, 16, 1e3);
  m(3, 4) = -0.0;
  m(5, 6) = 5e-324;
  m(7, 8) = 1.7976931348623157e308;
  const auto back = parse_kitebin(encode_kitebin(m)).vectors();
  ASSERT_EQ(back.rows(), 100);
  EXPECT_EQ(std::memcmp(back.data(), m.data(), sizeof(double) * 1600), 0);
}

TEST(Kitebin, Errors) {
  const std::string good = smallest_kitebin();
  auto expect_parse_error = [](const std::string& bytes, const std::string& needle) {
    try {
      parse_kitebin(bytes, "f.kbin");
      ADD_FAILURE() << "no error for " << needle;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_parse_error("KIT", "truncated");
  std::string bad = good;
  bad[0] = 'X';
  expect_parse_error(bad, "magic at offset 0");
  expect_parse_error(good.substr(0, good.size() - 3), "truncated kitebin payload at offset 25");
  expect_parse_error(good + "x", "trailing");
  bad = good;
  const std::string nan = f64_bytes(std::nan(""));
  bad.replace(20, 8, nan);
  expect_parse_error(bad, "non-finite value at offset 20");
  bad = good;
  bad[4] = 0;
  expect_parse_error(bad, "empty");
}

TEST(Csv, WithIds) {
  const auto bank = parse_csv("a,1.0,2.0\nb,3.0,4.0");
  EXPECT_EQ(bank.ids(), (std::vector<std::string>{"a", "b"}));
  RowMatrix want(2, 2);
  want << 1, 2, 3, 4;
  EXPECT_EQ(bank.vectors(), want);
}

TEST(Csv, WithoutIdsToleratesWhitespaceAndBlankLines) {
  const auto bank = parse_csv(" 1.5 , -2e-3\r\n\n3,4\n");
  EXPECT_EQ(bank.ids(), (std::vector<std::string>{"0", "1"}));
  EXPECT_EQ(bank.vectors()(0, 1), -2e-3);
  EXPECT_EQ(bank.vectors()(1, 0), 3.0);
}

TEST(Csv, RoundTrip) {
  std::mt19937_64 rng(2);
  const EmbeddingBank bank(oracle::gaussian_rows(rng, 100, 16));
  EXPECT_EQ(parse_csv(encode_csv(bank)).vectors(), bank.vectors());
  const auto with_ids = parse_csv(encode_csv(parse_csv("x,1,2\ny,3,4"), true));
  EXPECT_EQ(with_ids.ids(), (std::vector<std::string>{"x", "y"}));
}

TEST(Csv, ErrorsNameTheLine) {
  auto expect_parse_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_csv(text, "b.csv");
      ADD_FAILURE() << "no error for " << text;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_parse_error("1,2\n3,4\n5\n", "line 3");
  expect_parse_error("1,2\n3,abc\n", "line 2");
  expect_parse_error("1,2\n3,inf\n", "line 2: non-finite");
  expect_parse_error("1,nan\n", "line 1");
  expect_parse_error("\n\n", "no data rows");
  expect_parse_error("a\nb\n", "line 1");
}

TEST(Files, SaveLoadAndSniff) {
  const auto dir = std::filesystem::temp_directory_path() / "kite_test_io";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(3);
  const EmbeddingBank bank(oracle::gaussian_rows(rng, 10, 3));
  const auto kb = (dir / "b.kbin").string(), csv = (dir / "b.csv").string();
  save_bank(bank, kb, BankFormat::kitebin);
  save_bank(bank, csv, BankFormat::csv);
  EXPECT_EQ(load_bank(kb).vectors(), bank.vectors());
  EXPECT_EQ(load_bank(csv).vectors(), bank.vectors());
  EXPECT_EQ(load_bank(kb, BankFormat::kitebin).source_path(), kb);
  EXPECT_THROW(load_bank(kb, BankFormat::csv), ParseError);
  EXPECT_THROW(load_bank((dir / "missing.csv").string()), InvalidArgument);
  std::filesystem::remove_all(dir);
}

TEST(Bank, RejectsNonFiniteAndMismatchedIds) {
  RowMatrix m = RowMatrix::Ones(2, 2);
  m(1, 1) = INFINITY;
  EXPECT_THROW(EmbeddingBank{m}, InvalidArgument);
  EXPECT_THROW(EmbeddingBank(RowMatrix::Ones(2, 2), {"only-one"}), InvalidArgument);
}

TEST(RunRecord, SelectionRoundTrip) {
  SelectionResult r;
  r.indices = {3, 1};
  r.steps = {{3, 0.5, 0.25, 0.625}, {1, 0.1, -INFINITY, -INFINITY}};
  r.config.k = 2;
  r.config.kernel = KernelSpec::polynomial(0.5, 2);
  r.config.path = SelectionPath::kernel;
  r.warnings = {"w"};
  r.wall_time = 0.125;
  RunRecord rec;
  rec.command = "select";
  rec.config = json{{"a", 1}};
  rec.seed = 9;
  rec.result = r;
  const json j = rec;
  EXPECT_EQ(j["result"]["steps"][1]["div"], "-inf");
  const auto back = json::parse(j.dump()).get<RunRecord>();
  EXPECT_EQ(json(back), j);
  const auto& br = std::get<SelectionResult>(back.result);
  EXPECT_EQ(br.indices, r.indices);
  EXPECT_EQ(br.config.kernel, r.config.kernel);
  EXPECT_TRUE(std::isinf(br.steps[1].total));
}

TEST(RunRecord, SelectionSchemaKeys) {
  SelectionResult r;
  r.indices = {0};
  r.steps = {{0, 1, 2, 3}};
  const json j = r;
  for (const char* key : {"indices", "steps", "config"}) EXPECT_TRUE(j.contains(key)) << key;
  for (const char* key : {"index", "rel", "div", "total"}) EXPECT_TRUE(j["steps"][0].contains(key)) << key;
  for (const char* key : {"k", "beta", "lambda", "kernel", "tie_break", "normalize_inputs"})
    EXPECT_TRUE(j["config"].contains(key)) << key;
}

TEST(RunRecord, GammaAndSynthRoundTrip) {
  GammaReport g;
  g.seed = 4;
  g.trials = 3;
  GammaCell cell;
  cell.k = 5;
  cell.beta = 1.0;
  cell.gamma_min_exact = 0.75;
  cell.bound_min = 0.5;
  g.cells = {cell};
  RunRecord rec;
  rec.command = "gamma";
  rec.result = g;
  json j = rec;
  EXPECT_EQ(json(json::parse(j.dump()).get<RunRecord>()), j);
  EXPECT_TRUE(j["result"]["cells"][0]["gamma_min_closed"].is_null());

  SynthReport s;
  SynthCell sc;
  sc.n = 10;
  sc.methods = {{"dense", 0.0, 1.5, 0.25, {1.25, 1.75}}};
  s.cells = {sc};
  rec.command = "synth";
  rec.result = s;
  j = rec;
  EXPECT_EQ(json(json::parse(j.dump()).get<RunRecord>()), j);
  rec.command = "bogus";
  EXPECT_THROW(json(rec).get<RunRecord>(), InvalidArgument);
}

}  // namespace
}  // namespace kite
