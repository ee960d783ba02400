#include "cfsim/metrics/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "cfsim/core/bundled_data.hpp"
#include "cfsim/core/text.hpp"

namespace cfsim::metrics {

std::string_view to_string(SimilarityMetricId id) {
  switch (id) {
    case SimilarityMetricId::BLEU: return "bleu";
    case SimilarityMetricId::Cosine: return "cosine";
    case SimilarityMetricId::Jaccard: return "jaccard";
  }
  return "?";
}

SimilarityMetricId similarity_metric_from_string(std::string_view s) {
  auto l = to_lower(s);
  if (l == "bleu") return SimilarityMetricId::BLEU;
  if (l == "cosine" || l == "cos") return SimilarityMetricId::Cosine;
  if (l == "jaccard" || l == "jacc") return SimilarityMetricId::Jaccard;
  throw MetricError("unknown similarity metric: " + std::string(s));
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && punct(text[b])) ++b;
    while (e > b && punct(text[e - 1])) --e;
    if (b < e) tokens.push_back(to_lower(text.substr(b, e - b)));
    i = j;
  }
  return tokens;
}

StopwordList StopwordList::parse(std::string_view content) {
  std::set<std::string> words;
  for (const auto& line : split_lines(content)) {
    auto w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.insert(to_lower(w));
  }
  return StopwordList(std::move(words));
}

StopwordList StopwordList::from_file(const std::string& path) { return parse(read_file(path)); }

const StopwordList& StopwordList::bundled() {
  static const StopwordList list = parse(bundled_files().at("stopwords_en.txt"));
  return list;
}

TokenBag bag_of_words(std::string_view text, const StopwordList& stopwords) {
  TokenBag bag;
  for (auto& t : tokenize(text)) {
    if (!stopwords.contains(t)) bag.insert(std::move(t));
  }
  return bag;
}

double jaccard(std::string_view a, std::string_view b, const StopwordList& stopwords) {
  auto bag_a = bag_of_words(a, stopwords);
  auto bag_b = bag_of_words(b, stopwords);
  if (bag_a.empty() && bag_b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& w : bag_a) common += bag_b.count(w);
  auto total = bag_a.size() + bag_b.size() - common;
  return static_cast<double>(common) / static_cast<double>(total);
}

namespace {

std::map<std::vector<std::string>, int> ngram_counts(const TokenSequence& tokens, int n) {
  std::map<std::vector<std::string>, int> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

double bleu(std::string_view hyp, std::string_view ref, int max_order) {
  if (max_order < 1) throw MetricError("bleu: max_order must be >= 1");
  auto h = tokenize(hyp);
  auto r = tokenize(ref);
  if (h.empty() && r.empty()) return 1.0;
  if (h.empty() || r.empty()) return 0.0;

  const int order = std::min({max_order, static_cast<int>(h.size()), static_cast<int>(r.size())});
  double log_sum = 0.0;
  for (int n = 1; n <= order; ++n) {
    auto hyp_counts = ngram_counts(h, n);
    auto ref_counts = ngram_counts(r, n);
    int matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    const auto total = static_cast<double>(h.size() - n + 1);
    const double precision = matched == 0 ? kBleuSmoothing : matched / total;
    log_sum += std::log(precision);
  }
  const double geo_mean = std::exp(log_sum / order);
  const double bp =
      std::min(1.0, std::exp(1.0 - static_cast<double>(r.size()) / static_cast<double>(h.size())));
  return std::clamp(bp * geo_mean, 0.0, 1.0);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("cosine: dimensions " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace cfsim::metrics
