#ifndef TAGAD_TESTS_PARSE_CASES_HPP
#define TAGAD_TESTS_PARSE_CASES_HPP

#include <string>
#include <vector>

// Malformed or awkward completions with the expected (score, parse_ok).
struct ParseCase {
  std::string completion;
  int score;
  bool ok;
};

inline const std::vector<ParseCase>& malformed_completions() {
  static const std::vector<ParseCase> cases = {
      {"", 5, false},
      {"The node looks normal.", 5, false},
      {"Score: 3", 5, false},
      {"RESULT:", 5, false},
      {"RESULT: ", 5, false},
      {"RESULT:11", 5, false},
      {"RESULT:-1", 5, false},
      {"RESULT:99999999999999999999", 5, false},
      {"RESULT:7 because of topic drift", 5, false},
      {"RESULT:4.5", 5, false},
      {"RESULT:seven", 5, false},
      {"result:6", 5, false},
      {"The answer is RESULT:8", 5, false},
      {"RESULT:  6", 5, false},
      {"RESULT:3\nRESULT:8", 8, true},
      {"RESULT:3\nRESULT:12", 5, false},
      {"RESULT:2\nsome trailing words", 2, true},
      {"Analysis...\n  RESULT:0  \n", 0, true},
      {"RESULT: 10", 10, true},
      {std::string("RESULT:\0" "5", 9), 5, false},
  };
  return cases;
}

#endif  // TAGAD_TESTS_PARSE_CASES_HPP
