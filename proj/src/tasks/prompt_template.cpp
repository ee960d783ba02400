#include "cfsim/tasks/prompt_template.hpp"

#include <cctype>
#include <filesystem>

#include "cfsim/core/bundled_data.hpp"
#include "cfsim/core/text.hpp"

namespace cfsim::tasks {
namespace {

constexpr std::string_view kHuman = "Human: ";
constexpr std::string_view kAssistant = "Assistant: ";

struct Placeholder {
  std::size_t pos;
  std::size_t len;
  std::string name;
};

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Every {{name}} with a name of [A-Za-z0-9_]+, left to right.
std::vector<Placeholder> find_placeholders(const std::string& text) {
  std::vector<Placeholder> out;
  std::size_t at = 0;
  while ((at = text.find("{{", at)) != std::string::npos) {
    auto end = at + 2;
    while (end < text.size() && name_char(text[end])) ++end;
    if (end > at + 2 && text.compare(end, 2, "}}") == 0) {
      out.push_back({at, end + 2 - at, text.substr(at + 2, end - at - 2)});
      at = end + 2;
    } else {
      ++at;
    }
  }
  return out;
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

std::string substitute(const std::string& text, const std::map<std::string, std::string>& values,
                       const std::string& template_id) {
  std::string out;
  std::size_t last = 0;
  for (const auto& p : find_placeholders(text)) {
    auto found = values.find(p.name);
    if (found == values.end()) {
      throw PlaceholderUnfilled("template '" + template_id + "': no value for {{" + p.name + "}}");
    }
    out.append(text, last, p.pos - last);
    out += found->second;
    last = p.pos + p.len;
  }
  out.append(text, last);
  return out;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text, std::string fallback_id) {
  PromptTemplate t;
  t.id_ = std::move(fallback_id);
  t.version_ = "1";
  auto lines = split_lines(text);

  std::size_t i = 0;
  for (; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.rfind("# ", 0) != 0) break;
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    auto key = trim(std::string_view(line).substr(2, colon - 2));
    auto value = trim(std::string_view(line).substr(colon + 1));
    if (key == "template") t.id_ = value;
    if (key == "version") t.version_ = value;
  }

  std::vector<gateway::ChatTurn> turns;
  bool previous_blank = true;
  for (; i < lines.size(); ++i) {
    const auto& line = lines[i];
    std::optional<gateway::Role> role;
    std::size_t skip = 0;
    if (previous_blank && line.rfind(kHuman, 0) == 0) {
      role = gateway::Role::Human;
      skip = kHuman.size();
    } else if (previous_blank && line.rfind(kAssistant, 0) == 0) {
      role = gateway::Role::Assistant;
      skip = kAssistant.size();
    }
    if (role) {
      if (!turns.empty()) turns.back().content = strip_trailing_newlines(turns.back().content);
      turns.push_back({*role, line.substr(skip)});
    } else if (!turns.empty()) {
      turns.back().content += "\n" + line;
    } else if (!trim(line).empty()) {
      throw Error("template '" + t.id_ + "': text before the first turn");
    }
    previous_blank = trim(line).empty();
  }
  if (turns.empty()) throw Error("template '" + t.id_ + "' has no turns");
  turns.back().content = strip_trailing_newlines(turns.back().content);

  if (turns.back().role == gateway::Role::Assistant) {
    t.response_cue_ = turns.back().content;
    turns.pop_back();
  }
  if (turns.empty() || turns.back().role != gateway::Role::Human) {
    throw Error("template '" + t.id_ + "' must end with a human turn");
  }
  t.turns_ = std::move(turns);
  return t;
}

std::set<std::string> PromptTemplate::placeholders() const {
  std::set<std::string> names;
  for (const auto& turn : turns_) {
    for (const auto& p : find_placeholders(turn.content)) names.insert(p.name);
  }
  return names;
}

RenderedPrompt PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  RenderedPrompt out;
  out.response_cue = response_cue_;
  out.turns.reserve(turns_.size());
  for (const auto& turn : turns_) out.turns.push_back({turn.role, substitute(turn.content, values, id_)});
  return out;
}

std::string to_transcript(const std::vector<gateway::ChatTurn>& turns,
                          const std::optional<std::string>& response_cue) {
  std::string out;
  for (const auto& turn : turns) {
    if (!out.empty()) out += "\n\n";
    out += turn.role == gateway::Role::Human ? kHuman : kAssistant;
    out += turn.content;
  }
  if (response_cue) {
    out += "\n\n";
    out += kAssistant;
    out += *response_cue;
  }
  return out;
}

TemplateSet TemplateSet::bundled() {
  TemplateSet set;
  const std::string prefix = "templates/";
  for (const auto& [path, content] : bundled_files()) {
    if (path.rfind(prefix, 0) != 0) continue;
    auto stem = std::filesystem::path(path).stem().string();
    set.add(PromptTemplate::parse(content, stem));
  }
  return set;
}

TemplateSet TemplateSet::with_overrides(const std::string& dir) {
  auto set = bundled();
  if (!std::filesystem::is_directory(dir)) throw Error("templates directory not found: " + dir);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    set.add(PromptTemplate::parse(read_file(entry.path().string()), entry.path().stem().string()));
  }
  return set;
}

void TemplateSet::add(PromptTemplate t) {
  auto id = t.id();
  templates_.insert_or_assign(id, std::move(t));
}

const PromptTemplate& TemplateSet::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw TemplateMissing("no template '" + id + "'");
  return it->second;
}

std::vector<std::string> TemplateSet::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

}  // namespace cfsim::tasks
