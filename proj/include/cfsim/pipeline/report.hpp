#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cfsim/metrics/embedding.hpp"
#include "cfsim/pipeline/config.hpp"
#include "cfsim/pipeline/store.hpp"
#include "cfsim/tasks/dataset.hpp"

namespace cfsim::pipeline {

inline constexpr const char* kApproximationNote =
    "Simulatable counterfactuals are approximated by LLM-generated candidates that survive "
    "the simulatability filter; generality and precision are computed over that set, not over "
    "every simulatable counterfactual.";

/// Aggregates over the main systems in a completed run. Deterministic given
/// the store: no timestamps, keys sorted.
nlohmann::json build_report(const RunConfig& config, const RunState& state,
                            const tasks::Dataset& dataset, const metrics::StopwordList& stopwords,
                            metrics::EmbeddingProvider* embeddings);

/// Fixed-width text rendering of a report.
std::string render_report_table(const nlohmann::json& report);

/// Opens the run, builds the report and writes `<store_dir>/<run_id>.report.json`.
nlohmann::json emit_report(const std::string& store_dir, const std::string& run_id);

}  // namespace cfsim::pipeline
