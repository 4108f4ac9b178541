#include <gtest/gtest.h>

#include "pqnorm/io.hpp"

using namespace pqnorm;

TEST(ParseCsv, SeparatorsAndComments) {
  const Matrix A = parse_csv_matrix("# header\n1, 2 ,3\n\n4;5 6\r\n");
  ASSERT_EQ(A.rows(), 2);
  ASSERT_EQ(A.cols(), 3);
  EXPECT_EQ(A(0, 1), 2.0);
  EXPECT_EQ(A(1, 2), 6.0);
  EXPECT_EQ(parse_csv_matrix("-1.5e-3").value(), -1.5e-3);
}

TEST(ParseCsv, Errors) {
  EXPECT_THROW(parse_csv_matrix("1,2\n3\n"), ParseError);
  EXPECT_THROW(parse_csv_matrix("1,x\n"), ParseError);
  EXPECT_THROW(parse_csv_matrix("# only a comment\n"), ParseError);
  EXPECT_THROW(parse_csv_matrix("1,nan\n"), DomainError);
}

TEST(ParseJson, FlatAndNested) {
  const Matrix A = parse_json_matrix(R"({"m": 2, "n": 2, "entries": [1, 2, 3, 4]})");
  EXPECT_EQ(A(1, 0), 3.0);
  const Matrix B = parse_json_matrix(R"({"entries": [[1, 2, 3], [4, 5, 6]]})");
  EXPECT_EQ(B.rows(), 2);
  EXPECT_EQ(B(1, 2), 6.0);
  EXPECT_EQ(parse_matrix("  {\"entries\": [[7]]}").value(), 7.0);
  EXPECT_EQ(parse_matrix("7").value(), 7.0);
}

TEST(ParseJson, Errors) {
  EXPECT_THROW(parse_json_matrix("{"), ParseError);
  EXPECT_THROW(parse_json_matrix(R"({"rows": []})"), ParseError);
  EXPECT_THROW(parse_json_matrix(R"({"m": 2, "n": 2, "entries": [1, 2, 3]})"), ParseError);
  EXPECT_THROW(parse_json_matrix(R"({"entries": [1, 2]})"), ParseError);
  EXPECT_THROW(parse_json_matrix(R"({"entries": [[1, 2], [3]]})"), ParseError);
  EXPECT_THROW(parse_json_matrix(R"({"m": 3, "entries": [[1, 2], [3, 4]]})"), ParseError);
  EXPECT_THROW(load_matrix("/nonexistent/matrix.csv"), ParseError);
}

TEST(Json, ExponentEncoding) {
  EXPECT_EQ(exponent_json(kInf), json("inf"));
  EXPECT_EQ(exponent_json(1.5), json(1.5));
}

TEST(Json, InverseReportFields) {
  const json j = to_json(approx_ratio(ExponentPair::from_pq(kInf, 1.0), false));
  for (const char* key : {"a", "b", "c_ab", "hinv_lb", "ratio", "k_checked", "c1c2_ok", "tail_bound"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["p"], "inf");
  EXPECT_EQ(j["k_checked"], 29);
  EXPECT_TRUE(j["hinv_lb"].is_number());
}
