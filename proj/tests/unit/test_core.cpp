#include <gtest/gtest.h>

#include "cfsim/core/error.hpp"
#include "cfsim/core/parsers.hpp"
#include "cfsim/core/text.hpp"
#include "cfsim/core/types.hpp"

using namespace cfsim;

TEST(ParseAnswer, PearExemplarSplitsExplanationAndLabel) {
  auto r = parse_answer(
      "The density of a pear is about 0.6g/cm3, which is less than water. Objects less dense "
      "than water float. Thus, a pear would float. So the answer is no.",
      TaskKind::YesNoQA, ExplanationMethod::CoT);
  EXPECT_EQ(r.output, Label::No);
  EXPECT_EQ(r.explanation,
            "The density of a pear is about 0.6g/cm3, which is less than water. Objects less "
            "dense than water float. Thus, a pear would float.");
}

TEST(ParseAnswer, MarkerOnlyGivesEmptyExplanation) {
  auto r = parse_answer("So the answer is yes.", TaskKind::YesNoQA, ExplanationMethod::CoT);
  EXPECT_EQ(r.output, Label::Yes);
  EXPECT_EQ(r.explanation, "");
}

TEST(ParseAnswer, NonLabelCaptureFails) {
  EXPECT_THROW(parse_answer("I think... So the answer is maybe.", TaskKind::YesNoQA,
                            ExplanationMethod::CoT),
               ParseFailure);
}

TEST(ParseAnswer, UsesLastOccurrenceAndIgnoresCase) {
  auto r = parse_answer("Earlier someone said so the answer is yes. SO THE ANSWER IS NO!",
                        TaskKind::YesNoQA, ExplanationMethod::CoT);
  EXPECT_EQ(r.output, Label::No);
  EXPECT_EQ(r.explanation, "Earlier someone said so the answer is yes.");
}

TEST(ParseAnswer, StripsResponseCue) {
  auto r = parse_answer("here is my response. Bacon is pork. So the answer is no.",
                        TaskKind::YesNoQA, ExplanationMethod::CoT);
  EXPECT_EQ(r.explanation, "Bacon is pork.");
}

TEST(ParseAnswer, PairwiseMarker) {
  auto r = parse_answer("Response 2 answers the question. So Candidate Response 2 is more helpful.",
                        TaskKind::PairwisePreference, ExplanationMethod::CoT);
  EXPECT_EQ(r.output, Label::Response2);
  EXPECT_EQ(r.explanation, "Response 2 answers the question.");
  EXPECT_THROW(parse_answer("So the answer is yes.", TaskKind::PairwisePreference,
                            ExplanationMethod::CoT),
               ParseFailure);
}

TEST(ParseAnswer, EmptyInputViolatesPrecondition) {
  EXPECT_THROW(parse_answer("  ", TaskKind::YesNoQA, ExplanationMethod::CoT), PreconditionError);
}

TEST(ParsePosthoc, RejectsExplanationForOtherLabel) {
  EXPECT_EQ(parse_posthoc_explanation("Pork is in bacon. So the answer is no.", TaskKind::YesNoQA,
                                      Label::No),
            "Pork is in bacon.");
  EXPECT_THROW(parse_posthoc_explanation("Pork is in bacon. So the answer is yes.",
                                         TaskKind::YesNoQA, Label::No),
               ParseFailure);
}

TEST(ParseSimulation, EntailedFromExemplar) {
  auto j = parse_simulation(
      "Since the robot mentioned that Amsterdam is near the North Sea, it will likely say that "
      "the city is at risk. So the robot will likely answer yes.",
      TaskKind::YesNoQA);
  EXPECT_EQ(j, SimulationJudgment::entailed(Label::Yes));
}

TEST(ParseSimulation, RefusalExemplars) {
  EXPECT_FALSE(parse_simulation("I cannot guess the robot's answer to the follow-up question based "
                                "on its response to the starter question.",
                                TaskKind::YesNoQA)
                   .simulatable());
  EXPECT_FALSE(parse_simulation("No, I cannot confidently guess the robot's choice. Neither of the "
                                "two candidate responses explores more than one argument",
                                TaskKind::PairwisePreference)
                   .simulatable());
}

TEST(ParseSimulation, RefusalWinsOverLabels) {
  auto j = parse_simulation("The robot will likely answer no, but honestly I cannot guess.",
                            TaskKind::YesNoQA);
  EXPECT_FALSE(j.simulatable());
}

TEST(ParseSimulation, PairwiseAndFailure) {
  EXPECT_EQ(parse_simulation("So the robot will choose Candidate Response 1.",
                             TaskKind::PairwisePreference),
            SimulationJudgment::entailed(Label::Response1));
  EXPECT_THROW(parse_simulation("No idea at all.", TaskKind::YesNoQA), ParseFailure);
}

TEST(ParseCounterfactual, FirstLineOfQuestionCompletion) {
  auto in = parse_counterfactual(
      "Can the White House tell time?\nYour guess of Robot's Answer to the Follow-up Question: "
      "So the robot will likely answer no.",
      TaskKind::YesNoQA);
  EXPECT_EQ(std::get<QuestionInput>(in).question, "Can the White House tell time?");
}

TEST(ParseCounterfactual, PairwiseBlock) {
  auto in = parse_counterfactual(
      "Context: I've been pondering whether to learn piano.\nCandidate Response 1: Start with "
      "scales.\nCandidate Response 2: Just play songs you like.\nYour guess of the robot's choice: "
      "So the robot will choose Candidate Response 1.",
      TaskKind::PairwisePreference);
  auto p = std::get<PairwiseInput>(in);
  EXPECT_EQ(p.context, "I've been pondering whether to learn piano.");
  EXPECT_EQ(p.response_1, "Start with scales.");
  EXPECT_EQ(p.response_2, "Just play songs you like.");
}

TEST(ParseCounterfactual, Failures) {
  EXPECT_THROW(parse_counterfactual("", TaskKind::YesNoQA), ParseFailure);
  EXPECT_THROW(parse_counterfactual("Context: a\nCandidate Response 1: b\n",
                                    TaskKind::PairwisePreference),
               ParseFailure);
}

TEST(Parsers, AreDeterministic) {
  const std::string raw = "A. B. So the answer is yes.";
  auto a = parse_answer(raw, TaskKind::YesNoQA, ExplanationMethod::CoT);
  auto b = parse_answer(raw, TaskKind::YesNoQA, ExplanationMethod::CoT);
  EXPECT_EQ(a.explanation, b.explanation);
  EXPECT_EQ(a.output, b.output);
}

TEST(Types, LabelKinds) {
  EXPECT_TRUE(label_valid_for(Label::Yes, TaskKind::YesNoQA));
  EXPECT_FALSE(label_valid_for(Label::Response1, TaskKind::YesNoQA));
  EXPECT_EQ(opposite(Label::Yes), Label::No);
  EXPECT_EQ(opposite(Label::Response2), Label::Response1);
  EXPECT_EQ(label_from_string("Yes"), Label::Yes);
  EXPECT_THROW(label_from_string("maybe"), Error);
}

TEST(Types, JudgmentStringsRoundTrip) {
  for (auto j : {SimulationJudgment::entailed(Label::Yes), SimulationJudgment::entailed(Label::No),
                 SimulationJudgment::entailed(Label::Response2),
                 SimulationJudgment::unsimulatable()}) {
    EXPECT_EQ(SimulationJudgment::from_string(j.to_string()), j);
  }
  EXPECT_FALSE(SimulationJudgment::from_string("cannot_tell").simulatable());
}

TEST(Text, NormalizeForDedup) {
  EXPECT_EQ(normalize_for_dedup("  Is it hard to get a BLT in Casablanca?  "),
            "is it hard to get a blt in casablanca");
  EXPECT_EQ(normalize_for_dedup("Pigs eat meat."), normalize_for_dedup("pigs  eat meat"));
}

TEST(Text, SplitLinesHandlesCrLf) {
  auto lines = split_lines("a\r\nb\nc");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[2], "c");
}
