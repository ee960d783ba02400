#include <gtest/gtest.h>

#include <regex>

#include "cfsim/core/parsers.hpp"
#include "cfsim/core/text.hpp"
#include "cfsim/tasks/dataset.hpp"
#include "cfsim/tasks/prompt_template.hpp"
#include "cfsim/tasks/prompts.hpp"
#include "golden_prompts.hpp"
#include "test_util.hpp"

using namespace cfsim;
using namespace cfsim::tasks;
using cfsim::testing::TempDir;

namespace {

GenerationParams params() { return {"scripted", "m", 0.0, 256, std::nullopt}; }

TaskInstance question(const std::string& id, const std::string& q, Label gold) {
  return {id, QuestionInput{q}, gold};
}

}  // namespace

class GoldenPrompt : public ::testing::TestWithParam<std::string> {};

TEST_P(GoldenPrompt, RenderMatchesPublishedText) {
  const auto id = GetParam();
  const auto text = read_file(cfsim::testing::golden(id + ".txt"));
  auto [rendered, expected] = cfsim::testing::render_golden(id, text);
  EXPECT_EQ(rendered, expected);
}

INSTANTIATE_TEST_SUITE_P(Bundled, GoldenPrompt,
                         ::testing::ValuesIn(cfsim::testing::kGoldenPromptIds),
                         [](const auto& info) {
                           auto name = info.param;
                           std::replace(name.begin(), name.end(), '.', '_');
                           return name;
                         });

TEST(Templates, BundledSetIsComplete) {
  auto ids = TemplateSet::bundled().ids();
  for (const char* id : {"strategyqa.cot", "strategyqa.direct_answer", "strategyqa.posthoc_explain",
                         "strategyqa.counterfactual", "strategyqa.simulate", "shp.explain",
                         "shp.direct_answer", "shp.posthoc_explain", "shp.counterfactual",
                         "shp.simulate"}) {
    EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;
  }
  EXPECT_THROW(TemplateSet::bundled().get("nope"), TemplateMissing);
}

TEST(Templates, ExemplarCompletionsRoundTripThroughParsers) {
  auto set = TemplateSet::bundled();
  struct Case {
    const char* id;
    TaskKind kind;
    int parser;  // 0 answer, 1 simulation, 2 counterfactual
  };
  for (auto c : {Case{"strategyqa.cot", TaskKind::YesNoQA, 0},
                 Case{"strategyqa.direct_answer", TaskKind::YesNoQA, 0},
                 Case{"strategyqa.posthoc_explain", TaskKind::YesNoQA, 0},
                 Case{"shp.explain", TaskKind::PairwisePreference, 0},
                 Case{"strategyqa.simulate", TaskKind::YesNoQA, 1},
                 Case{"shp.simulate", TaskKind::PairwisePreference, 1},
                 Case{"strategyqa.counterfactual", TaskKind::YesNoQA, 2},
                 Case{"shp.counterfactual", TaskKind::PairwisePreference, 2}}) {
    int checked = 0;
    for (const auto& turn : set.get(c.id).turns()) {
      // The acknowledgement after the instructions is not an exemplar.
      if (turn.role != gateway::Role::Assistant || turn.content == "here is my response. okay.") {
        continue;
      }
      ++checked;
      const auto& text = turn.content;
      if (c.parser == 0) {
        auto parsed = parse_answer(text, c.kind, ExplanationMethod::CoT);
        EXPECT_NE(to_lower(text).find(to_lower(marker_sentence(parsed.output))), std::string::npos)
            << c.id << ": " << text;
      } else if (c.parser == 1) {
        auto j = parse_simulation(text, c.kind);
        bool refusal = to_lower(text).find("cannot") != std::string::npos &&
                       to_lower(text).find("guess") != std::string::npos;
        EXPECT_EQ(j.simulatable(), !refusal) << c.id << ": " << text;
      } else {
        EXPECT_NO_THROW(parse_counterfactual(text, c.kind)) << c.id << ": " << text;
      }
    }
    EXPECT_GT(checked, 0) << c.id;
  }
}

TEST(Templates, ParseAndRenderRules) {
  auto t = PromptTemplate::parse(
      "# template: demo\n# version: 3\nHuman: Say {{word}} twice.\n\nAssistant: ok\n\n"
      "Human: Now {{word}} and {{other}}.\n\nAssistant: here is my response.\n");
  EXPECT_EQ(t.id(), "demo");
  EXPECT_EQ(t.version(), "3");
  EXPECT_EQ(t.placeholders(), (std::set<std::string>{"word", "other"}));
  EXPECT_EQ(t.response_cue(), "here is my response.");
  auto r = t.render({{"word", "hi"}, {"other", "bye"}});
  ASSERT_EQ(r.turns.size(), 3u);
  EXPECT_EQ(r.turns[2].content, "Now hi and bye.");
  EXPECT_THROW(t.render({{"word", "hi"}}), PlaceholderUnfilled);
  EXPECT_THROW(PromptTemplate::parse("# template: x\nAssistant: only\n"), Error);
}

TEST(Templates, OverridesDirectoryReplacesBundled) {
  TempDir dir;
  dir.write("strategyqa.cot.txt",
            "# template: strategyqa.cot\n# version: 9\nHuman: Custom {{question}}\n");
  auto set = TemplateSet::with_overrides(dir.str());
  EXPECT_EQ(set.get("strategyqa.cot").version(), "9");
  EXPECT_EQ(set.get("strategyqa.simulate").version(), "1");
}

TEST(Prompts, ExplanationRequestsPerMethod) {
  PromptSuite suite;
  auto inst = question("q1", "Is it hard to get a BLT in Casablanca?", Label::Yes);
  ModelSystem cot{"m/cot", "scripted", "m", ExplanationMethod::CoT};
  auto reqs = suite.render_explanation_prompt(inst, cot);
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_NE(reqs[0].final_turn().find("Yes or no: Is it hard to get a BLT in Casablanca?"),
            std::string::npos);
  EXPECT_EQ(reqs[0].turns.back().role, gateway::Role::Human);

  ModelSystem forced{"m/forced", "scripted", "m", ExplanationMethod::ForcedPostHoc};
  EXPECT_THROW(suite.render_explanation_prompt(inst, forced), PreconditionError);
  EXPECT_THROW(suite.render_explanation_prompt(inst, cot, Label::No), PreconditionError);
  auto f = suite.render_explanation_prompt(inst, forced, Label::No);
  EXPECT_NE(f.front().final_turn().find("Given answer: no"), std::string::npos);
}

TEST(Prompts, PosthocUsesDirectAnswerThenExplain) {
  PromptSuite suite;
  QuestionInput in{"Can eagles fly?"};
  auto direct = suite.direct_answer_request(in, params());
  EXPECT_NE(direct.final_turn().find("Can eagles fly?"), std::string::npos);
  EXPECT_EQ(direct.final_turn().find("Given answer"), std::string::npos);
  auto explain = suite.posthoc_explain_request(in, params(), Label::Yes);
  EXPECT_NE(explain.final_turn().find("Given answer: yes"), std::string::npos);
  EXPECT_THROW(suite.posthoc_explain_request(in, params(), Label::Response1), PreconditionError);
  PairwiseInput p{"ctx", "one", "two"};
  auto shp = suite.posthoc_explain_request(p, params(), Label::Response2);
  EXPECT_NE(shp.final_turn().find("Candidate Response 2"), std::string::npos);
}

TEST(Prompts, SimulationPromptPreconditions) {
  PromptSuite suite;
  auto inst = question("q1", "Can eagles fly?", Label::Yes);
  ExplanationRecord rec{"q1", "m/cot", ExplanationMethod::CoT, "Eagles have wings.", Label::Yes,
                        "Eagles have wings. So the answer is yes."};
  auto req = suite.render_simulation_prompt(inst, rec, QuestionInput{"Can penguins fly?"}, params());
  EXPECT_NE(req.final_turn().find("Follow-up Question: Can penguins fly?"), std::string::npos);
  EXPECT_NE(req.final_turn().find("Robot's Answer to the Starter Question: Eagles have wings. So "
                                  "the answer is yes."),
            std::string::npos);
  EXPECT_THROW(suite.render_simulation_prompt(inst, rec, QuestionInput{"  "}, params()),
               PreconditionError);
  EXPECT_THROW(
      suite.render_simulation_prompt(inst, rec, PairwiseInput{"a", "b", "c"}, params()),
      PreconditionError);
}

TEST(Prompts, RobotAnswerForPosthocAppendsMarker) {
  ExplanationRecord rec{"q1", "m/posthoc", ExplanationMethod::PostHoc, "Bacon is pork.",
                        Label::Yes, "Bacon is pork. So the answer is yes."};
  EXPECT_EQ(PromptSuite::robot_answer(rec), "Bacon is pork. So the answer is yes.");
  rec.output.reset();
  EXPECT_THROW(PromptSuite::robot_answer(rec), PreconditionError);
}

TEST(Prompts, OutputRequestFollowsParentMethod) {
  PromptSuite suite;
  QuestionInput cf{"Can penguins fly?"};
  ModelSystem cot{"m/cot", "scripted", "m", ExplanationMethod::CoT};
  ModelSystem post{"m/posthoc", "scripted", "m", ExplanationMethod::PostHoc};
  EXPECT_EQ(suite.output_request(cf, cot).turns, suite.cot_request(cf, params_of(cot)).turns);
  EXPECT_EQ(suite.output_request(cf, post).turns,
            suite.direct_answer_request(cf, params_of(post)).turns);
}

TEST(Dataset, StrategyQa) {
  auto d = parse_strategyqa(
      R"([{"qid": "p1", "question": "Would a pear sink in water?", "answer": false, "facts": []},
          {"question": "Can eagles fly?", "answer": true}])");
  ASSERT_EQ(d.instances.size(), 2u);
  EXPECT_EQ(d.kind, TaskKind::YesNoQA);
  EXPECT_EQ(d.instances[0].id, "p1");
  EXPECT_EQ(d.instances[0].gold, Label::No);
  EXPECT_EQ(std::get<QuestionInput>(d.instances[0].input).question, "Would a pear sink in water?");
  EXPECT_EQ(d.instances[1].gold, Label::Yes);
  EXPECT_EQ(d.at("p1").id, "p1");
  EXPECT_THROW(d.at("missing"), UnknownInstance);
}

TEST(Dataset, StrategyQaErrors) {
  auto empty = parse_strategyqa("[]");
  EXPECT_TRUE(empty.instances.empty());
  EXPECT_FALSE(empty.warnings.empty());
  EXPECT_THROW(parse_strategyqa(R"([{"question": "q"}])"), MissingField);
  try {
    parse_strategyqa("[\n{\"question\": \"q\",\n \"answer\": tru }]");
    FAIL() << "expected MalformedJson";
  } catch (const MalformedJson& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GT(e.offset(), 0u);
  }
  EXPECT_THROW(parse_strategyqa(R"([{"qid": "a", "question": "q", "answer": true},
                                   {"qid": "a", "question": "r", "answer": true}])"),
               DatasetError);
}

TEST(Dataset, Shp) {
  std::string content;
  for (int i = 0; i < 100; ++i) {
    content += R"({"context": "post )" + std::to_string(i) +
               R"(", "response_1": "a", "response_2": "b", "preferred": )" +
               std::to_string(1 + i % 2) + "}\n";
  }
  auto d = parse_shp(content);
  ASSERT_EQ(d.instances.size(), 100u);
  EXPECT_EQ(d.kind, TaskKind::PairwisePreference);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(std::get<PairwiseInput>(d.instances[i].input).context, "post " + std::to_string(i));
  }
  EXPECT_EQ(d.instances[1].gold, Label::Response2);
  auto blt = parse_shp(
      R"({"context": "Where can I find a BLT?", "response_1": "a", "response_2": "b", "preferred": 2})");
  EXPECT_EQ(blt.instances[0].gold, Label::Response2);
  EXPECT_THROW(parse_shp(R"({"context": "c", "response_1": "a", "response_2": "b", "preferred": 3})"),
               BadPreferredValue);
  EXPECT_THROW(parse_shp(R"({"context": "c", "response_1": "a", "preferred": 1})"), MissingField);
}

TEST(Dataset, TaskAccuracy) {
  auto d = parse_strategyqa(R"([{"qid": "a", "question": "q", "answer": true},
                               {"qid": "b", "question": "r", "answer": false}])");
  std::vector<ExplanationRecord> recs = {
      {"a", "s", ExplanationMethod::CoT, "", Label::Yes, ""},
      {"b", "s", ExplanationMethod::CoT, "", Label::Yes, ""}};
  EXPECT_DOUBLE_EQ(task_accuracy(recs, d), 0.5);
}
