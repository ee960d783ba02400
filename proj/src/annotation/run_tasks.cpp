#include "cfsim/annotation/run_tasks.hpp"

#include <fstream>

#include "cfsim/core/parsers.hpp"
#include "cfsim/core/text.hpp"
#include "cfsim/tasks/prompts.hpp"

namespace cfsim::annotation {

using nlohmann::json;

json input_json(const TaskInput& input) {
  if (const auto* q = std::get_if<QuestionInput>(&input)) return {{"question", q->question}};
  const auto& p = std::get<PairwiseInput>(input);
  return {{"context", p.context}, {"response_1", p.response_1}, {"response_2", p.response_2}};
}

std::vector<AnnotationTask> tasks_from_run(const pipeline::Pipeline& pipeline, bool plausibility) {
  const auto& state = pipeline.state();
  const auto& dataset = pipeline.dataset();
  const auto& run_id = pipeline.config().run_id;
  std::vector<AnnotationTask> simulation;
  std::vector<AnnotationTask> plausible;
  for (const auto& sys : pipeline.config().systems) {
    for (const auto& inst : dataset.instances) {
      const auto* rec = state.explanation(inst.id + "::" + sys.id);
      if (!rec || rec->parse_failed()) continue;
      auto explanation = tasks::PromptSuite::robot_answer(*rec);
      auto output = std::string(to_string(*rec->output));
      if (plausibility) {
        plausible.push_back({"plaus:" + rec->key(), AnnotationKind::Plausibility, rec->key(), run_id,
                             dataset.kind,
                             {{"input", input_json(inst.input)},
                              {"explanation", explanation},
                              {"output", output}}});
      }
      for (const auto* cf : state.counterfactuals_of(rec->key())) {
        simulation.push_back({"sim:" + cf->id, AnnotationKind::Simulation, cf->id, run_id,
                              dataset.kind,
                              {{"starter", input_json(inst.input)},
                               {"explanation", explanation},
                               {"output", output},
                               {"counterfactual", input_json(input_from_text(cf->text, dataset.kind))}}});
      }
    }
  }
  simulation.insert(simulation.end(), plausible.begin(), plausible.end());
  return simulation;
}

void write_tasks_file(const std::string& path, const std::vector<AnnotationTask>& tasks) {
  json arr = json::array();
  for (const auto& t : tasks) arr.push_back(t.to_json());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << json{{"tasks", arr}}.dump(2) << "\n";
  if (!out) throw AnnotationError("cannot write " + path);
}

std::vector<AnnotationTask> load_tasks_file(const std::string& path) {
  auto j = json::parse(read_file(path));
  std::vector<AnnotationTask> tasks;
  for (const auto& t : j.at("tasks")) tasks.push_back(AnnotationTask::from_json(t));
  return tasks;
}

}  // namespace cfsim::annotation
