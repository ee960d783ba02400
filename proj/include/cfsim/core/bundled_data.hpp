#pragma once

#include <map>
#include <string>
#include <string_view>

namespace cfsim {

/// Data files compiled into the binary, keyed by their path relative to data/
/// (for example "templates/strategyqa.cot.txt" or "stopwords_en.txt").
const std::map<std::string, std::string_view>& bundled_files();

}  // namespace cfsim
