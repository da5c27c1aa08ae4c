#pragma once

// Reply corpus for the three output formats. Each case lists every complete
// item a correct parser must recover, in order.

#include <string>
#include <vector>

#include "divcov/sampling/prompts.hpp"

namespace divcov::testing {

struct CorpusCase {
  std::string name;
  sampling::OutputFormat format;
  bool verbalized = false;
  std::string raw;
  std::vector<std::string> expected;
};

inline std::vector<CorpusCase> parser_corpus() {
  using sampling::OutputFormat;
  return {
      {"curly single", OutputFormat::kCurlyList, false, "{Tuesday}", {"Tuesday"}},
      {"curly two", OutputFormat::kCurlyList, false, "{Monday,Friday}", {"Monday", "Friday"}},
      {"curly all with prose", OutputFormat::kCurlyList, false,
       "Sure! Here they are:\n{Monday, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday}\nHope this helps.",
       {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"}},
      {"curly quoted items", OutputFormat::kCurlyList, false, "{\"Monday\", 'Sunday', \"a, b\"}",
       {"Monday", "Sunday", "a, b"}},
      {"curly trailing comma", OutputFormat::kCurlyList, false, "{Monday, Tuesday, }",
       {"Monday", "Tuesday"}},
      {"curly empty items", OutputFormat::kCurlyList, false, "{Monday,, ,Tuesday}",
       {"Monday", "Tuesday"}},
      {"curly truncated", OutputFormat::kCurlyList, false, "{Monday, Tuesday, Wedn",
       {"Monday", "Tuesday", "Wedn"}},
      {"curly think", OutputFormat::kCurlyList, false,
       "<think>maybe {Saturday}?</think>\n{Sunday}", {"Sunday"}},
      {"curly nested parens", OutputFormat::kCurlyList, false, "{f(a, b), g}", {"f(a, b)", "g"}},
      {"curly verbalized", OutputFormat::kCurlyList, true,
       "{(Monday, 0.2), (Tuesday,0.15), (Sunday, 0.1)}", {"Monday", "Tuesday", "Sunday"}},
      {"curly unicode", OutputFormat::kCurlyList, false, "{Lundi, Mërkurë, 星期三}",
       {"Lundi", "Mërkurë", "星期三"}},
      {"json paper shape", OutputFormat::kAnswerIdJson, false,
       "{\n    {    \"answer-id\": 1,\n         \"content\": \"Bits and Borders\"\n    },\n"
       "    {    \"answer-id\": 2,    \n         \"content\": \"Lost in Translation\"\n    },\n}",
       {"Bits and Borders", "Lost in Translation"}},
      {"json single", OutputFormat::kAnswerIdJson, false,
       "{\n    {\n        \"answer-id\": 1,\n        \"content\": \"The Parallel Corpus\"\n    },\n}",
       {"The Parallel Corpus"}},
      {"json out of order", OutputFormat::kAnswerIdJson, false,
       "{ {\"answer-id\": 2, \"content\": \"second\"}, {\"answer-id\": 1, \"content\": \"first\"} }",
       {"first", "second"}},
      {"json string ids", OutputFormat::kAnswerIdJson, false,
       "{ {\"answer-id\": \"1\", \"content\": \"alpha\"}, {\"answer-id\": \"2\", \"content\": \"beta\"} }",
       {"alpha", "beta"}},
      {"json braces in content", OutputFormat::kAnswerIdJson, false,
       "{ {\"answer-id\": 1, \"content\": \"use {x} here\"}, {\"answer-id\": 2, \"content\": \"ok\"} }",
       {"use {x} here", "ok"}},
      {"json verbalized", OutputFormat::kAnswerIdJson, true,
       "{\n  {\"answer-id\": 1, \"content\": \"A\", \"probability\": \"0.4\"},\n"
       "  {\"answer-id\": 2, \"content\": \"B\", \"probability\": 0.3},\n}",
       {"A", "B"}},
      {"json truncated salvage", OutputFormat::kAnswerIdJson, false,
       "{\n  {\"answer-id\": 1, \"content\": \"Complete one\"},\n"
       "  {\"answer-id\": 2, \"content\": \"Complete two\"},\n  {\"answer-id\": 3, \"content\": \"Cut of",
       {"Complete one", "Complete two"}},
      {"json empty content skipped", OutputFormat::kAnswerIdJson, false,
       "{ {\"answer-id\": 1, \"content\": \"  \"}, {\"answer-id\": 2, \"content\": \"kept\"} }",
       {"kept"}},
      {"json fenced", OutputFormat::kAnswerIdJson, false,
       "```json\n{\n  {\"answer-id\": 1, \"content\": \"x\"}\n}\n```", {"x"}},
      {"json think", OutputFormat::kAnswerIdJson, false,
       "<think>{\"answer-id\": 9, \"content\": \"draft\"}</think>{ {\"answer-id\": 1, \"content\": \"final\"} }",
       {"final"}},
      {"tags basic", OutputFormat::kResponseTags, false,
       "<response><text>Monday</text></response>\n<response><text>Friday</text></response>",
       {"Monday", "Friday"}},
      {"tags with probability", OutputFormat::kResponseTags, true,
       "<response><text>A title</text><probability>0.3</probability></response>"
       "<response><text>Another</text><probability>0.2</probability></response>",
       {"A title", "Another"}},
      {"tags truncated", OutputFormat::kResponseTags, false,
       "<response><text>one</text></response><response><text>tw", {"one"}},
      {"tags multiline", OutputFormat::kResponseTags, false,
       "<response>\n  <text>\n    Line one\n  </text>\n</response>", {"Line one"}},
  };
}

}  // namespace divcov::testing
