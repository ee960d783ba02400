#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cfsim/annotation/service.hpp"
#include "cfsim/pipeline/pipeline.hpp"

namespace cfsim::annotation {

/// {"question": ...} or {"context": ..., "response_1": ..., "response_2": ...}.
nlohmann::json input_json(const TaskInput& input);

/// One simulation task per counterfactual ("sim:<counterfactual id>") and,
/// when `plausibility` is set, one plausibility task per parse-valid
/// explanation ("plaus:<explanation key>"), for the run's configured systems.
/// Simulation payloads carry the starter input, explanation, output and
/// counterfactual, never the model's output on the counterfactual.
std::vector<AnnotationTask> tasks_from_run(const pipeline::Pipeline& pipeline,
                                           bool plausibility = true);

void write_tasks_file(const std::string& path, const std::vector<AnnotationTask>& tasks);
std::vector<AnnotationTask> load_tasks_file(const std::string& path);

}  // namespace cfsim::annotation
