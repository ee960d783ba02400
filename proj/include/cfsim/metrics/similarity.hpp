#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfsim/core/error.hpp"

namespace cfsim::metrics {

class MetricError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public MetricError {
 public:
  using MetricError::MetricError;
};

class ZeroVector : public MetricError {
 public:
  using MetricError::MetricError;
};

enum class SimilarityMetricId { BLEU, Cosine, Jaccard };

std::string_view to_string(SimilarityMetricId id);
SimilarityMetricId similarity_metric_from_string(std::string_view s);

/// Lowercased tokens, split on whitespace, with leading and trailing
/// punctuation stripped from each token. Empty tokens are dropped.
using TokenSequence = std::vector<std::string>;
using TokenBag = std::set<std::string>;

TokenSequence tokenize(std::string_view text);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::set<std::string> words) : words_(std::move(words)) {}

  /// One word per line; blank lines and lines starting with '#' are ignored.
  static StopwordList parse(std::string_view content);
  static StopwordList from_file(const std::string& path);
  /// The English list compiled into the binary.
  static const StopwordList& bundled();

  bool contains(const std::string& word) const { return words_.count(word) != 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string> words_;
};

TokenBag bag_of_words(std::string_view text, const StopwordList& stopwords);

/// |A ∩ B| / |A ∪ B| over stopword-filtered bags. Two empty bags score 1.
double jaccard(std::string_view a, std::string_view b, const StopwordList& stopwords);

/// Sentence BLEU with the order capped at the shorter sentence length, zero
/// n-gram precisions replaced by 1e-9 and brevity penalty min(1, e^(1-r/h)).
double bleu(std::string_view hyp, std::string_view ref, int max_order = 4);

inline constexpr double kBleuSmoothing = 1e-9;

using EmbeddingVector = std::vector<double>;

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace cfsim::metrics
