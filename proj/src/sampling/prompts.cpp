#include "divcov/sampling/prompts.hpp"

#include "divcov/core/error.hpp"

namespace divcov::sampling {

namespace {

constexpr std::string_view kSystemVanilla =
    "You are a helpful assistant. For each query, please generate all possible "
    "responses, each within a separate <response> tag. Responses should each "
    "include a <text>.";

constexpr std::string_view kSystemVerbalized =
    "You are a helpful assistant. For each query, please generate all possible "
    "responses, each within a separate <response> tag. Responses should each "
    "include a <text> and a numeric <probability>. Please sample at random from "
    "the full distribution.";

constexpr std::string_view kOpenOneFormat =
    "Please use the following format:\n"
    "{\n"
    "    {    \n"
    "        \"answer-id\": 1,\n"
    "        \"content\": \"Your answer here\"\n"
    "    },\n"
    "}";

constexpr std::string_view kOpenTwoFormat =
    "Please use the following format:\n"
    "{\n"
    "    {\n"
    "        \"answer-id\": 1,\n"
    "        \"content\": \"Your answer here\"\n"
    "    },\n"
    "    {   \"answer-id\": 2,\n"
    "        \"content\": \"Your answer here\"\n"
    "    }\n"
    "} ";

constexpr std::string_view kOpenAllFormat =
    "Please use the following format:\n"
    "{\n"
    "    {    \"answer-id\": 1,\n"
    "         \"content\": \"Your answer here\"\n"
    "    },\n"
    "    {    \"answer-id\": 2,    \n"
    "         \"content\": \"Your answer here\"\n"
    "    },\n"
    "    ...\n"
    "}";

constexpr std::string_view kOpenVerbalizedFormat =
    "Please use the following format:\n"
    "{\n"
    "    {\n"
    "        \"answer-id\": 1,\n"
    "        \"content\": \"Your answer here\",\n"
    "        \"probability\": \"The probability of this answer\"\n"
    "    },\n"
    "    {\n"
    "        \"answer-id\": 2,\n"
    "        \"content\": \"Your answer here\", \n"
    "        \"probability\": \"The probability of this answer\"\n"
    "    },\n"
    "    ...\n"
    "}";

std::string fixed_body(const Query& q, PromptKind kind, const ItemNoun& n) {
  const std::string& s = n.singular;
  const std::string& p = n.plural;
  switch (kind) {
    case PromptKind::kG1:
      return q.text + "\nOutput only the " + s + " between two curly braces, \nlike this: {" +
             s + "}. \nDon't output code.";
    case PromptKind::kG2:
      return q.text + "\nOutput only the " + p +
             " between curly braces separated by a comma, \nlike this: "
             "{answer_1,answer_2}.\nDon't output code. ";
    case PromptKind::kGAll:
      return q.text + "\nOutput only the " + p + " between two curly braces, \nlike this: {" +
             s + "_1, " + s + "_2, ...}. \nDon't output code.";
    case PromptKind::kVerbalizedAll:
      return q.text +
             "\nFor each output, also provide a numeric probability of sampling that output. "
             "\nPlease sample at random from the full distribution.\nOutput only the " +
             p + " and probabilities between two curly braces, like this: \n{(" + s +
             "_1,probability_1), (" + s + "_2,probability_2) ...}. Don't output code.\"";
    default:
      return q.text;
  }
}

std::string open_body(const Query& q, PromptKind kind) {
  switch (kind) {
    case PromptKind::kG1:
      return q.text + "\n" + std::string(kOpenOneFormat);
    case PromptKind::kG2:
      return q.text + " Give me two different suggestions.\n" + std::string(kOpenTwoFormat);
    case PromptKind::kGAll:
      return q.text + " List all the possible answers you can think of.\n" +
             std::string(kOpenAllFormat);
    case PromptKind::kVerbalizedAll:
      return q.text +
             "\nList all the possible answers you can think of. For each answer, also "
             "provide a numeric probability of sampling that answer.\n" +
             std::string(kOpenVerbalizedFormat);
    default:
      return q.text;
  }
}

}  // namespace

std::string_view to_token(OutputFormat format) {
  switch (format) {
    case OutputFormat::kCurlyList: return "curly_list";
    case OutputFormat::kAnswerIdJson: return "answer_id_json";
    case OutputFormat::kResponseTags: return "response_tags";
  }
  return "?";
}

OutputFormat format_for(AnswerSpace space, PromptKind kind) {
  if (kind == PromptKind::kSystemVanilla || kind == PromptKind::kSystemVerbalizedAll) {
    return OutputFormat::kResponseTags;
  }
  return space == AnswerSpace::kFixedSet ? OutputFormat::kCurlyList
                                         : OutputFormat::kAnswerIdJson;
}

PromptTemplate render_prompt(const Query& query, PromptKind kind, const ItemNoun& noun) {
  if (query.text.empty()) throw ContractError("query " + query.id + " has no text");
  if (noun.singular.empty() || noun.plural.empty()) {
    throw ContractError("item noun must be non-empty");
  }
  PromptTemplate t;
  t.kind = kind;
  t.expected_format = format_for(query.space, kind);
  t.verbalized =
      kind == PromptKind::kVerbalizedAll || kind == PromptKind::kSystemVerbalizedAll;
  switch (kind) {
    case PromptKind::kSystemVanilla:
      t.system = std::string(kSystemVanilla);
      t.body = query.text;
      break;
    case PromptKind::kSystemVerbalizedAll:
      t.system = std::string(kSystemVerbalized);
      t.body = query.text;
      break;
    default:
      t.body = query.space == AnswerSpace::kFixedSet ? fixed_body(query, kind, noun)
                                                     : open_body(query, kind);
  }
  return t;
}

}  // namespace divcov::sampling
