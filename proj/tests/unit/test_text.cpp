#include "doctest.h"
#include "termweave/text.hpp"

using namespace termweave::text;

TEST_CASE("utf8 round trip") {
  const std::string s = "Zürich Ωμέγα Москва 東京";
  std::string back;
  for (char32_t cp : decode_utf8(s)) append_utf8(back, cp);
  CHECK(back == s);
  CHECK(code_point_count(s) == 22);
}

TEST_CASE("invalid bytes decode to replacement characters") {
  const std::string s = "a\xff" "b\xc3";
  const auto cps = decode_utf8(s);
  REQUIRE(cps.size() == 4);
  CHECK(cps[1] == 0xFFFD);
  CHECK(cps[3] == 0xFFFD);
}

TEST_CASE("letter classification") {
  CHECK(is_letter(U'a'));
  CHECK(is_letter(U'É'));
  CHECK(is_letter(U'ж'));
  CHECK_FALSE(is_letter(U'7'));
  CHECK_FALSE(is_letter(U'-'));
  CHECK_FALSE(is_letter(0xD7));  // multiplication sign
  CHECK(is_digit(U'7'));
}

TEST_CASE("lowercasing") {
  CHECK(to_lower("UKIP") == "ukip");
  CHECK(to_lower("ÉCOLE Ärger") == "école ärger");
  CHECK(to_lower("ΑΘΗΝΑ") == "αθηνα");
  CHECK(to_lower("МОСКВА") == "москва");
  CHECK(to_lower("Łódź") == "łódź");
}

TEST_CASE("word splitting") {
  CHECK(split_words("India widens access to telecoms") ==
        std::vector<std::string>{"India", "widens", "access", "to", "telecoms"});
  CHECK(split_words("Britain's \"new\" deal, (2005)") ==
        std::vector<std::string>{"Britain", "new", "deal", "2005"});
  CHECK(split_words("don't stop") == std::vector<std::string>{"don't", "stop"});
  CHECK(split_words("department_of_homeland_security") ==
        std::vector<std::string>{"department_of_homeland_security"});
  CHECK(split_words("  ").empty());
}
