#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pmfspoof/binary_io.hpp"
#include "pmfspoof/error.hpp"
#include "pmfspoof/table.hpp"

using namespace pmfspoof;

TEST(Doubles, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 5e-324, 1.7976931348623157e308}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_THROW(parse_double("1.5x"), DataError);
  EXPECT_THROW(parse_double(""), DataError);
}

TEST(Columns, Names) {
  EXPECT_EQ(feature_columns(2), (std::vector<std::string>{"f_000", "f_001"}));
  EXPECT_EQ(feature_columns(1001).back(), "f_1000");
  EXPECT_EQ(embedding_columns(3), (std::vector<std::string>{"dm_1", "dm_2", "dm_3"}));
  EXPECT_EQ(split_csv_line("a,,b"), (std::vector<std::string>{"a", "", "b"}));
}

TEST(TableCsv, RoundTrip) {
  LabeledMatrix m;
  m.rows = {{"a", Gender::female, Label::genuine, "None"}, {"b", Gender::male, Label::spoofed, "A03"}};
  m.values.resize(2, 2);
  m.values << 0.1, -1e-17, 3.0, 1.0 / 7.0;
  const auto dir = oracle::scratch_dir("table_rt");
  write_table_csv(dir / "t.csv", m, feature_columns(2));
  const auto back = read_table_csv(dir / "t.csv");
  EXPECT_EQ(back.values, m.values);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.rows[1].attack, "A03");
  EXPECT_EQ(back.rows[1].gender, Gender::male);
  EXPECT_EQ(back.targets(), Eigen::Vector2d(0, 1));
  const auto sel = m.select({1});
  EXPECT_EQ(sel.rows[0].file_id, "b");
  EXPECT_EQ(sel.values(0, 1), 1.0 / 7.0);

  std::ofstream(dir / "bad.csv") << "file_id,gender,label,attack,f_000\na,female,bonafide,None\n";
  EXPECT_THROW(read_table_csv(dir / "bad.csv"), DataError);
  EXPECT_THROW(read_table_csv(dir / "missing.csv"), DataError);
}

TEST(BinaryContainer, RoundTripAndChecks) {
  binio::Writer w("TEST", 0xfeedULL);
  w.u8(7);
  w.u32(70000);
  w.i32(-5);
  w.u64(1ULL << 40);
  w.f64(-0.0);
  w.str("hello");
  w.f64s(std::vector<double>{1.5, 2.5});
  EXPECT_EQ(w.bytes().substr(0, 8), "PMFSTEST");
  binio::Reader r(w.bytes(), "TEST", "mem");
  EXPECT_EQ(r.config_hash(), 0xfeedULL);
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u32(), 70000u);
  EXPECT_EQ(r.i32(), -5);
  EXPECT_EQ(r.u64(), 1ULL << 40);
  EXPECT_TRUE(std::signbit(r.f64()));
  EXPECT_EQ(r.str(), "hello");
  EXPECT_EQ(r.f64s(), (std::vector<double>{1.5, 2.5}));
  EXPECT_NO_THROW(r.finish());

  binio::Reader extra(w.bytes() + "x", "TEST", "mem");
  EXPECT_THROW(extra.finish(), DataError);
  EXPECT_THROW(binio::Reader(w.bytes(), "DMAP", "mem"), DataError);
  EXPECT_THROW(binio::Reader("PMF", "TEST", "mem"), DataError);
  binio::Reader cut(w.bytes().substr(0, 22), "TEST", "mem");
  EXPECT_THROW(cut.u64(), DataError);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(binio::fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(binio::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(binio::fnv1a("foobar"), 0x85944171f73967e8ULL);
}
