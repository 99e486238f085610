#include <gtest/gtest.h>

#include "robust_fusion/io.hpp"

using namespace robust_fusion;

namespace {

constexpr const char* kMinimal = R"({
  "problem": {"states": ["a", "b"], "actions": ["x", "y"], "utility": [[1, 0], [0, 1]]},
  "experiments": [{"name": "P", "signals": ["s", "t"], "kernel": [["3/4", "1/4"], [0.25, 0.75]]}]
})";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a parse failure";
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST(ParseFraction, AcceptsFractionsAndDecimals) {
  EXPECT_DOUBLE_EQ(parse_fraction("1/3"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(parse_fraction("-2/4"), -0.5);
  EXPECT_DOUBLE_EQ(parse_fraction("7"), 7.0);
  EXPECT_DOUBLE_EQ(parse_fraction("0.125"), 0.125);
}

TEST(ParseFraction, RejectsGarbage) {
  for (const char* bad : {"1/0", "1/-2", "a/b", "1/2/3", "", "0.5x", "1.5/2"}) {
    EXPECT_THROW(parse_fraction(bad), Error) << bad;
  }
}

TEST(ParseInstance, MinimalInstanceWithDefaultPrior) {
  const Instance inst = parse_instance(kMinimal);
  EXPECT_EQ(inst.problem.num_states(), 2);
  EXPECT_EQ(inst.problem.num_actions(), 2);
  EXPECT_DOUBLE_EQ(inst.problem.prior()(0), 0.5);
  ASSERT_EQ(inst.experiments.size(), 1u);
  EXPECT_DOUBLE_EQ(inst.experiments[0].kernel()(0, 0), 0.75);
  EXPECT_EQ(inst.digest.size(), 16u);
}

TEST(ParseInstance, DigestIgnoresWhitespace) {
  std::string compact = kMinimal;
  std::erase(compact, '\n');
  EXPECT_EQ(parse_instance(compact).digest, parse_instance(kMinimal).digest);
}

TEST(ParseInstance, SyntaxErrorReportsLineAndColumn) {
  try {
    parse_instance("{\n  \"problem\": ,\n}");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ParseInstance, ErrorKinds) {
  EXPECT_EQ(kind_of(R"({"problem": {"states": ["a", "b"], "actions": ["x"], "utility": [[1], [0]],
                        "extra": 1}, "experiments": []})"),
            ErrorKind::parse_error);
  EXPECT_EQ(kind_of(R"({"problem": {"states": ["a", "b"], "actions": ["x"], "utility": [[1], [0]]},
                        "experiments": [{"name": "P", "signals": ["s"], "kernel": [[0.5], [1]]}]})"),
            ErrorKind::non_stochastic_row);
  EXPECT_EQ(kind_of(R"({"problem": {"states": ["a", "b"], "actions": ["x"], "utility": [[1], [0]],
                        "prior": [0.2, 0.2]},
                        "experiments": [{"name": "P", "signals": ["s"], "kernel": [[1], [1]]}]})"),
            ErrorKind::bad_prior);
  EXPECT_EQ(kind_of(R"({"problem": {"states": ["a", "b"], "actions": ["x", "y"], "utility": [[1, 0], [0]]},
                        "experiments": [{"name": "P", "signals": ["s"], "kernel": [[1], [1]]}]})"),
            ErrorKind::dimension_mismatch);
  EXPECT_EQ(kind_of(R"({"problem": {"states": ["a", "b"], "actions": ["x"], "utility": [[1], [0]]},
                        "experiments": [{"name": "P", "signals": ["s"], "kernel": [["one"], [1]]}]})"),
            ErrorKind::parse_error);
  EXPECT_EQ(kind_of("[]"), ErrorKind::parse_error);
}

TEST(LoadInstance, MissingFileIsParseError) {
  try {
    load_instance("/nonexistent/instance.json");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse_error);
  }
}
