/// @file prompt_kit.cpp

#include "sage/prompt_kit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "sage/assets.hpp"

namespace sage::prompt {

namespace {

constexpr std::array kTemplateIds = {
    TemplateId::PersonaGen,          TemplateId::SceneGen,
    TemplateId::EmotionEstimation,   TemplateId::ReplyGeneration,
    TemplateId::TargetSystem,        TemplateId::DialoguePurpose,
    TemplateId::EmotionStateDefinition, TemplateId::BlriJudge,
    TemplateId::UtteranceJudge,      TemplateId::StrategyAnnotator,
    TemplateId::ProfileCaseAnalysis, TemplateId::ProfileSummary,
    TemplateId::CoordinatePlacement,
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(c);
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

/// Maps unicode minus signs, dashes, full-width punctuation to ASCII.
std::string normalize_punct(std::string_view in) {
  std::string s(in);
  replace_all(s, "\xE2\x88\x92", "-");  // U+2212 minus
  replace_all(s, "\xE2\x80\x93", "-");  // en dash
  replace_all(s, "\xEF\xBC\x8D", "-");  // full-width hyphen-minus
  replace_all(s, "\xEF\xBC\x8B", "+");  // full-width plus
  replace_all(s, "\xEF\xBC\x9A", ":");  // full-width colon
  replace_all(s, "\xEF\xBC\x8C", ",");  // full-width comma
  replace_all(s, "\xEF\xBC\x88", "(");
  replace_all(s, "\xEF\xBC\x89", ")");
  return s;
}

/// Strips leading markdown decoration: whitespace, `*`, `#`, `-`, `>`, `[`, bullets.
std::string_view strip_decoration(std::string_view s) {
  for (;;) {
    if (s.empty()) return s;
    const char c = s.front();
    if (c == ' ' || c == '\t' || c == '*' || c == '#' || c == '-' || c == '>' || c == '[' ||
        c == '_') {
      s.remove_prefix(1);
    } else if (starts_with(s, "\xE2\x80\xA2")) {  // bullet
      s.remove_prefix(3);
    } else {
      return s;
    }
  }
}

/// Case-insensitive prefix match where a space in `label` matches any run of
/// spaces or underscores. Returns characters consumed.
std::optional<std::size_t> match_label(std::string_view s, std::string_view label) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < label.size(); ++j) {
    if (label[j] == ' ') {
      while (i < s.size() && (s[i] == ' ' || s[i] == '_' || s[i] == '\t')) ++i;
      continue;
    }
    if (i >= s.size() || lower(s[i]) != lower(label[j])) return std::nullopt;
    ++i;
  }
  return i;
}

struct HeaderHit {
  std::size_t spec_index;
  std::string rest;
};

std::optional<HeaderHit> match_header(std::string_view raw_line,
                                      const std::vector<SectionSpec>& specs) {
  const std::string line = normalize_punct(raw_line);
  const std::string_view s = strip_decoration(line);
  const bool heading = trim(line).starts_with('#');
  std::optional<HeaderHit> best;
  std::size_t best_len = 0;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    std::vector<std::string_view> names{specs[k].label};
    for (const auto& a : specs[k].aliases) names.emplace_back(a);
    for (auto name : names) {
      auto used = match_label(s, name);
      if (!used || *used < best_len) continue;
      std::size_t i = *used;
      while (i < s.size() && (s[i] == '*' || s[i] == ']' || s[i] == ' ' || s[i] == '\t' ||
                              s[i] == '_')) {
        ++i;
      }
      if (heading && i >= s.size()) {
        best = HeaderHit{k, std::string()};
        best_len = *used;
        continue;
      }
      if (i >= s.size() || s[i] != ':') continue;
      std::string_view rest = s.substr(i + 1);
      while (!rest.empty() && (rest.front() == '*' || rest.front() == ' ' || rest.front() == '\t')) {
        rest.remove_prefix(1);
      }
      best = HeaderHit{k, std::string(rest)};
      best_len = *used;
    }
  }
  return best;
}

/// Removes one layer of `[...]` when the brackets enclose the whole body.
std::string unwrap_brackets(std::string body) {
  for (;;) {
    std::string_view t = trim(body);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') return std::string(t);
    int depth = 0;
    bool encloses = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == '[') ++depth;
      if (t[i] == ']') --depth;
      if (depth == 0 && i + 1 < t.size()) {
        encloses = false;
        break;
      }
    }
    if (!encloses) return std::string(t);
    body = std::string(t.substr(1, t.size() - 2));
  }
}

std::string clean_body(std::string body) {
  std::string_view t = trim(body);
  // Stray bold markers left around a body, e.g. "** hi **".
  while (starts_with(t, "**")) t = trim(t.substr(2));
  while (t.size() >= 2 && t.substr(t.size() - 2) == "**") t = trim(t.substr(0, t.size() - 2));
  return unwrap_brackets(std::string(t));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Templates

std::span<const TemplateId> all_templates() { return kTemplateIds; }

std::string_view to_string(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::PersonaGen: return "persona_gen";
    case TemplateId::SceneGen: return "scene_gen";
    case TemplateId::EmotionEstimation: return "emotion_estimation";
    case TemplateId::ReplyGeneration: return "reply_generation";
    case TemplateId::TargetSystem: return "target_system";
    case TemplateId::DialoguePurpose: return "dialogue_purpose";
    case TemplateId::EmotionStateDefinition: return "emotion_state_definition";
    case TemplateId::BlriJudge: return "blri_judge";
    case TemplateId::UtteranceJudge: return "utterance_judge";
    case TemplateId::StrategyAnnotator: return "strategy_annotator";
    case TemplateId::ProfileCaseAnalysis: return "profile_case_analysis";
    case TemplateId::ProfileSummary: return "profile_summary";
    case TemplateId::CoordinatePlacement: return "coordinate_placement";
  }
  return "unknown";
}

TemplateId template_from_string(std::string_view name) {
  for (auto id : kTemplateIds) {
    if (to_string(id) == name) return id;
  }
  throw TemplateError("unknown template '" + std::string(name) + "'");
}

std::vector<std::string> placeholders(std::string_view text) {
  static const std::regex re(R"(\{([a-z0-9-]+)\})");
  std::vector<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    auto name = (*it)[1].str();
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
  }
  return out;
}

const TemplateStore& TemplateStore::builtin() {
  static const TemplateStore store = [] {
    TemplateStore s;
    for (auto id : kTemplateIds) {
      Entry e;
      e.text = std::string(assets::get(fmt::format("templates/{}.txt", to_string(id))));
      for (auto& p : placeholders(e.text)) e.slots.insert(std::move(p));
      s.entries_.emplace(id, std::move(e));
    }
    return s;
  }();
  return store;
}

TemplateStore TemplateStore::from_directory(const std::filesystem::path& dir) {
  const auto& reference = builtin();
  TemplateStore s;
  for (auto id : kTemplateIds) {
    const auto path = dir / fmt::format("{}.txt", to_string(id));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("missing template file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    Entry e;
    e.text = buf.str();
    for (auto& p : placeholders(e.text)) e.slots.insert(std::move(p));
    if (e.slots != reference.slots(id)) {
      throw TemplateError(fmt::format("template {} declares slots {{{}}}, expected {{{}}}",
                                      path.string(), fmt::join(e.slots, ", "),
                                      fmt::join(reference.slots(id), ", ")));
    }
    s.entries_.emplace(id, std::move(e));
  }
  return s;
}

const std::string& TemplateStore::text(TemplateId id) const { return entries_.at(id).text; }

const std::set<std::string>& TemplateStore::slots(TemplateId id) const {
  return entries_.at(id).slots;
}

std::string TemplateStore::render(TemplateId id, const Slots& slots) const {
  const auto& entry = entries_.at(id);
  for (const auto& name : entry.slots) {
    if (!slots.contains(name)) throw MissingSlot(name);
  }
  for (const auto& [name, value] : slots) {
    if (!entry.slots.contains(name)) throw UnknownSlot(name);
  }
  const std::string& text = entry.text;
  std::string out;
  out.reserve(text.size() + 256);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string::npos) {
        const std::string name = text.substr(i + 1, close - i - 1);
        if (auto it = slots.find(name); it != slots.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

std::string render(TemplateId id, const Slots& slots) {
  return TemplateStore::builtin().render(id, slots);
}

// ---------------------------------------------------------------------------
// Sections

void ParsedSections::set(const std::string& label, std::string body) {
  for (auto& [l, b] : items_) {
    if (l == label) {
      b = std::move(body);
      return;
    }
  }
  items_.emplace_back(label, std::move(body));
}

const std::string* ParsedSections::find(std::string_view label) const {
  for (const auto& [l, b] : items_) {
    if (l == label) return &b;
  }
  return nullptr;
}

bool ParsedSections::has_nonempty(std::string_view label) const {
  const auto* body = find(label);
  return body && !body->empty();
}

ParsedSections split_sections(std::string_view raw, const std::vector<SectionSpec>& labels) {
  ParsedSections out;
  std::optional<std::size_t> current;
  std::vector<std::string> body;
  auto flush = [&] {
    if (current) out.set(labels[*current].label, clean_body(join(body, "\n")));
    body.clear();
  };
  for (auto line : split_lines(raw)) {
    if (auto hit = match_header(line, labels)) {
      flush();
      current = hit->spec_index;
      if (!trim(hit->rest).empty()) body.push_back(hit->rest);
    } else if (current) {
      body.emplace_back(line);
    }
  }
  flush();
  return out;
}

std::optional<int> first_signed_integer(std::string_view text) {
  static const std::regex re(R"(([+-]?)\s?(\d+))");
  const std::string s = normalize_punct(text);
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  long long value = 0;
  const auto digits = m[2].str();
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec == std::errc::result_out_of_range) value = 1'000'000;
  value = std::min<long long>(value, 1'000'000);
  return static_cast<int>(m[1].str() == "-" ? -value : value);
}

// ---------------------------------------------------------------------------
// Emotion estimate and reply

EmotionEstimate parse_emotion_estimate(std::string_view raw, Warnings* warnings) {
  static const std::vector<SectionSpec> specs = {
      {"Content", {}},
      {"TargetCompletion", {"Target Completion", "Target-Completion"}},
      {"Activity", {}},
      {"Analyze", {}},
      {"Change", {}},
  };
  const auto sections = split_sections(raw, specs);
  std::vector<std::string> missing;
  for (const auto& spec : specs) {
    if (!sections.has_nonempty(spec.label)) missing.push_back(spec.label);
  }
  std::optional<int> change;
  if (sections.has_nonempty("Change")) {
    change = first_signed_integer(*sections.find("Change"));
    if (!change) missing.push_back("Change (no integer)");
  }
  if (!missing.empty()) throw MalformedEstimate(std::move(missing));

  EmotionEstimate e;
  e.content = *sections.find("Content");
  e.target_completion = *sections.find("TargetCompletion");
  e.activity = *sections.find("Activity");
  e.analyze = *sections.find("Analyze");
  e.change = clamp_delta(*change);
  if (e.change != *change) {
    auto note = fmt::format("emotion change {} clamped to {}", *change, e.change);
    spdlog::warn("{}", note);
    if (warnings) warnings->push_back(std::move(note));
  }
  return e;
}

AgentReply parse_agent_reply(std::string_view raw) {
  static const std::vector<SectionSpec> specs = {{"Thinking", {}}, {"Response", {}}};
  const auto sections = split_sections(raw, specs);
  if (!sections.find("Response")) throw MalformedReply("reply has no Response section");
  if (!sections.has_nonempty("Response")) throw MalformedReply("reply Response section is empty");
  AgentReply r;
  if (const auto* t = sections.find("Thinking")) r.thinking = *t;
  r.response = *sections.find("Response");
  return r;
}

std::string format_emotion_estimate(const EmotionEstimate& e) {
  return fmt::format("Content:\n{}\nTargetCompletion:\n{}\nActivity:\n{}\nAnalyze:\n{}\nChange:\n{:+}\n",
                     e.content, e.target_completion, e.activity, e.analyze, e.change);
}

std::string format_agent_reply(const AgentReply& r) {
  return fmt::format("Thinking:\n{}\nResponse:\n{}\n", r.thinking, r.response);
}

// ---------------------------------------------------------------------------
// BLRI

namespace {

struct NumberedLine {
  int number;
  std::string rest;
};

std::optional<NumberedLine> numbered_line(std::string_view line) {
  static const std::regex re(R"(^[\s*#>\-\[]*(\d{1,3})\s*[.):\]]+\s*(.*)$)");
  std::string s(line);
  replace_all(s, "\xE3\x80\x81", ".");  // ideographic comma
  s = normalize_punct(s);
  std::smatch m;
  if (!std::regex_match(s, m, re)) return std::nullopt;
  return NumberedLine{std::stoi(m[1].str()), m[2].str()};
}

std::optional<char> blri_label(std::string_view text) {
  static const std::regex label_re(R"(label\s*[\[(]?\s*([A-Fa-f])\b)", std::regex::icase);
  const std::string s(text);
  std::smatch m;
  if (std::regex_search(s, m, label_re)) {
    return static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0])));
  }
  // Bare letter such as "A", "[C]", "**B**", "D." (not the start of a word).
  std::string_view t = s;
  while (!t.empty() && (t.front() == ' ' || t.front() == '[' || t.front() == '*' ||
                        t.front() == '(' || t.front() == '\t')) {
    t.remove_prefix(1);
  }
  if (!t.empty() && t.front() >= 'A' && t.front() <= 'F' &&
      (t.size() == 1 || !std::isalpha(static_cast<unsigned char>(t[1])))) {
    return t.front();
  }
  const std::string l = to_lower(s);
  static const std::pair<const char*, char> names[] = {
      {"strongly disagree", 'F'}, {"somewhat disagree", 'D'}, {"strongly agree", 'A'},
      {"somewhat agree", 'C'},    {"disagree", 'E'},          {"agree", 'B'},
  };
  for (const auto& [name, label] : names) {
    if (l.find(name) != std::string::npos) return label;
  }
  return std::nullopt;
}

}  // namespace

BlriLabels parse_blri(std::string_view raw) {
  const auto lines = split_lines(raw);
  // Use the block after the last "Grade:" header when there is one.
  std::optional<std::size_t> grade_at;
  static const std::vector<SectionSpec> grade_spec = {{"Grade", {"Grades"}}};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (match_header(lines[i], grade_spec)) grade_at = i;
  }
  const bool strict = grade_at.has_value();
  std::map<int, char> items;
  std::size_t begin = 0;
  if (grade_at) {
    begin = *grade_at;
    // "Grade: 1. Label A" on the header line itself.
    auto hit = match_header(lines[begin], grade_spec);
    if (hit && !trim(hit->rest).empty()) {
      if (auto nl = numbered_line(hit->rest)) {
        auto label = blri_label(nl->rest);
        if (!label) throw UnknownLabel(fmt::format("item {}: no label in '{}'", nl->number, nl->rest));
        items[nl->number] = *label;
      }
    }
    ++begin;
  }
  for (std::size_t i = begin; i < lines.size(); ++i) {
    auto nl = numbered_line(lines[i]);
    if (!nl) continue;
    auto label = blri_label(nl->rest);
    if (!label) {
      if (strict) {
        throw UnknownLabel(fmt::format("item {}: no label in '{}'", nl->number, trim(nl->rest)));
      }
      continue;
    }
    items[nl->number] = *label;
  }
  if (items.size() != kBlriItems || items.begin()->first != 1 ||
      items.rbegin()->first != static_cast<int>(kBlriItems)) {
    throw WrongItemCount(kBlriItems, items.size(), "numbered grade lines 1..12");
  }
  BlriLabels out{};
  for (const auto& [n, label] : items) out[static_cast<std::size_t>(n - 1)] = label;
  return out;
}

std::string format_blri(const BlriLabels& labels) {
  std::string out = "Analyze:\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += fmt::format("{}.The user's feelings match this statement to degree {}.\n", i + 1, labels[i]);
  }
  out += "Grade:\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out += fmt::format("{}.Label {}\n", i + 1, labels[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Utterance ratings

UtteranceRatings parse_utterance_ratings(std::string_view raw) {
  static const std::regex re(R"(<\s*sentence\s*(\d+)\s*>([\s\S]*?)<\s*/\s*sentence\s*\d*\s*>)",
                             std::regex::icase);
  const std::string s(raw);
  std::map<int, std::string> values;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    values[std::stoi((*it)[1].str())] = (*it)[2].str();
  }
  for (const auto& [index, value] : values) {
    if (index < 1 || index > static_cast<int>(kUtteranceItems)) {
      throw WrongItemCount(kUtteranceItems, values.size(), fmt::format("unexpected sentence {}", index));
    }
  }
  if (values.size() != kUtteranceItems) {
    throw WrongItemCount(kUtteranceItems, values.size(), "<sentence i> tags");
  }
  UtteranceRatings out{};
  for (const auto& [index, value] : values) {
    std::string_view v = trim(value);
    while (!v.empty() && (v.front() == '[' || v.front() == '*')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ']' || v.back() == '*')) v.remove_suffix(1);
    v = trim(v);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || n < 1 || n > 6) {
      throw OutOfRange(fmt::format("sentence {}: '{}' is not an agreement degree in 1..6", index, v));
    }
    out[static_cast<std::size_t>(index - 1)] = n;
  }
  return out;
}

std::string format_utterance_ratings(const UtteranceRatings& ratings) {
  std::string out;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    out += fmt::format("The user would likely feel this way about statement {}.\n", i + 1);
    out += fmt::format("<sentence {0}>{1}</sentence {0}>\n\n", i + 1, ratings[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Strategies

std::vector<StrategySequence> parse_strategies(std::string_view raw) {
  static const std::regex span_re(R"(<\s*strategy\s*>([\s\S]*?)<\s*/\s*strategy\s*>)",
                                  std::regex::icase);
  static const std::regex code_re(R"(\(\s*([A-Za-z])\s*-\s*(\d+)\s*\))");
  static const std::regex bare_re(R"(\b([A-Z])\s*-\s*(\d+)\b)");
  const std::string s = normalize_punct(raw);
  std::vector<StrategySequence> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), span_re); it != std::sregex_iterator();
       ++it) {
    const std::string inner = (*it)[1].str();
    StrategySequence seq;
    auto collect = [&](const std::regex& re) {
      for (auto c = std::sregex_iterator(inner.begin(), inner.end(), re);
           c != std::sregex_iterator(); ++c) {
        StrategyCode code{static_cast<char>(std::toupper(static_cast<unsigned char>((*c)[1].str()[0]))),
                          std::stoi((*c)[2].str())};
        if (!is_known(code)) throw UnknownStrategyCode(code.str());
        if (std::find(seq.begin(), seq.end(), code) == seq.end()) seq.push_back(code);
      }
    };
    collect(code_re);
    if (seq.empty()) collect(bare_re);
    out.push_back(std::move(seq));
  }
  if (out.empty()) throw NoStrategyTags();
  return out;
}

std::string format_strategies(const std::vector<StrategySequence>& sequences) {
  std::string out;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    out += fmt::format("[Paragraph {}]\n<Strategy>", i + 1);
    for (std::size_t k = 0; k < sequences[i].size(); ++k) {
      const auto* info = find_strategy(sequences[i][k]);
      out += fmt::format("{}({}) {}", k ? ", " : " ", sequences[i][k].str(),
                         info ? info->name : std::string_view{});
    }
    out += "</Strategy>\n\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coordinates

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Offset just past a whole-name mention of `model` in `line`, if any.
std::optional<std::size_t> find_model(const std::string& line_lower, const std::string& model_lower) {
  for (std::size_t pos = line_lower.find(model_lower); pos != std::string::npos;
       pos = line_lower.find(model_lower, pos + 1)) {
    const std::size_t end = pos + model_lower.size();
    const bool left_ok = pos == 0 || !is_word_char(line_lower[pos - 1]);
    bool right_ok = end >= line_lower.size() || !is_word_char(line_lower[end]);
    // "gpt-4o" must not match inside "gpt-4o-latest" or "gpt-4o.1".
    if (right_ok && end + 1 < line_lower.size() &&
        (line_lower[end] == '-' || line_lower[end] == '.' || line_lower[end] == '_') &&
        is_word_char(line_lower[end + 1])) {
      right_ok = false;
    }
    if (left_ok && right_ok) return end;
  }
  return std::nullopt;
}

std::optional<Point> extract_point(const std::string& after, const std::string& whole_line) {
  static const std::string num = R"([+-]?(?:\d+(?:\.\d*)?|\.\d+))";
  static const std::regex paren_re(R"(\(\s*()" + num + R"()\s*,\s*()" + num + R"()\s*\))");
  static const std::regex x_re(R"(\bx\s*[=:]\s*()" + num + ")", std::regex::icase);
  static const std::regex y_re(R"(\by\s*[=:]\s*()" + num + ")", std::regex::icase);
  static const std::regex num_re("^\\s*(" + num + ")\\s*$");
  std::smatch m;
  if (std::regex_search(after, m, paren_re)) return Point{std::stod(m[1]), std::stod(m[2])};
  std::smatch mx;
  std::smatch my;
  if (std::regex_search(after, mx, x_re) && std::regex_search(after, my, y_re)) {
    return Point{std::stod(mx[1]), std::stod(my[1])};
  }
  if (whole_line.find('|') != std::string::npos) {
    std::vector<double> cells;
    std::stringstream ss(after);
    std::string cell;
    while (std::getline(ss, cell, '|')) {
      std::string c(trim(cell));
      c.erase(std::remove(c.begin(), c.end(), '*'), c.end());
      if (std::regex_match(c, m, num_re)) cells.push_back(std::stod(m[1]));
    }
    if (cells.size() >= 2) return Point{cells[0], cells[1]};
  }
  return std::nullopt;
}

double clamp_unit(double v, const std::string& model, char axis, Warnings* warnings) {
  const double c = std::clamp(v, -1.0, 1.0);
  if (c != v) {
    auto note = fmt::format("{} {} coordinate {} clamped to {}", model, axis, v, c);
    spdlog::warn("{}", note);
    if (warnings) warnings->push_back(std::move(note));
  }
  return c;
}

}  // namespace

std::map<std::string, Point> parse_coordinates(std::string_view raw,
                                               const std::vector<std::string>& models,
                                               Warnings* warnings) {
  const std::string text = normalize_punct(raw);
  const auto lines = split_lines(text);
  std::map<std::string, Point> out;
  for (const auto& model : models) {
    const std::string model_lower = to_lower(model);
    std::optional<Point> found;
    for (auto line_view : lines) {
      const std::string line(line_view);
      auto end = find_model(to_lower(line), model_lower);
      if (!end) continue;
      if (auto p = extract_point(line.substr(*end), line)) found = p;
    }
    if (!found) throw NoCoordinatesFound(model);
    out[model] = Point{clamp_unit(found->x, model, 'x', warnings),
                       clamp_unit(found->y, model, 'y', warnings)};
  }
  return out;
}

std::string format_coordinates(const std::map<std::string, Point>& points) {
  std::string out = "Coordinates:\n";
  for (const auto& [model, p] : points) out += fmt::format("{}: ({}, {})\n", model, p.x, p.y);
  return out;
}

// ---------------------------------------------------------------------------
// Persona and scene

namespace {

/// Splits a list body into items. Numbered lines ("1.", "2)") start items and
/// unnumbered lines continue them; without numbering every line is an item.
std::vector<std::string> list_items(std::string_view body) {
  static const std::regex numbered(R"(^\s*\d+\s*[.)]\s*(.*)$)");
  static const std::regex bullet(R"(^\s*(?:[-*]|\xE2\x80\xA2)\s+(.*)$)");
  std::vector<std::string> items;
  bool any_numbered = false;
  for (auto line : split_lines(body)) {
    if (std::regex_match(std::string(line), numbered)) any_numbered = true;
  }
  for (auto line_view : split_lines(body)) {
    const std::string line(line_view);
    if (trim(line).empty()) continue;
    std::smatch m;
    if (any_numbered) {
      if (std::regex_match(line, m, numbered)) {
        items.emplace_back(trim(m[1].str()));
      } else if (!items.empty()) {
        items.back() += "\n";
        items.back() += trim(line);
      } else {
        items.emplace_back(trim(line));
      }
    } else if (std::regex_match(line, m, bullet)) {
      items.emplace_back(trim(m[1].str()));
    } else {
      items.emplace_back(trim(line));
    }
  }
  return items;
}

}  // namespace

Persona parse_persona(std::string_view raw) {
  static const std::vector<SectionSpec> specs = {
      {"Name", {}},
      {"Age", {}},
      {"Gender", {"Sex"}},
      {"Occupation", {"Profession"}},
      {"Personal hobbies", {"Hobbies"}},
      {"Habits and behavioral characteristics",
       {"Habits and behavioural characteristics", "Habits and behaviors", "Habits"}},
      {"Speaking style", {}},
      {"Way of speaking", {}},
  };
  const auto sections = split_sections(raw, specs);
  std::vector<std::string> missing;
  for (std::size_t i = 0; i + 1 < specs.size(); ++i) {
    if (!sections.has_nonempty(specs[i].label)) missing.push_back(specs[i].label);
  }
  if (!missing.empty()) {
    throw MalformedPersona("persona profile missing: " + join(missing, ", "));
  }
  Persona p;
  p.name = *sections.find("Name");
  const auto age = first_signed_integer(*sections.find("Age"));
  if (!age) throw MalformedPersona("persona age has no number: " + *sections.find("Age"));
  p.age = *age;
  p.gender = *sections.find("Gender");
  p.occupation = *sections.find("Occupation");
  p.hobbies = list_items(*sections.find("Personal hobbies"));
  if (p.hobbies.size() != 3) {
    throw MalformedPersona(fmt::format("expected 3 personal hobbies, found {}", p.hobbies.size()));
  }
  p.habits_and_behaviors = list_items(*sections.find("Habits and behavioral characteristics"));
  p.speaking_style = *sections.find("Speaking style");
  if (sections.has_nonempty("Way of speaking")) {
    p.speaking_style += "\n" + *sections.find("Way of speaking");
  }
  return p;
}

std::string format_persona(const Persona& p) {
  std::string out = fmt::format("* Name: {}\n* Age: {} years old\n* Gender: {}\n* Occupation: {}\n\n",
                                p.name, p.age, p.gender, p.occupation);
  out += "* Personal hobbies:\n";
  for (std::size_t i = 0; i < p.hobbies.size(); ++i) out += fmt::format("{}. {}\n", i + 1, p.hobbies[i]);
  out += "\n* Habits and behavioral characteristics:\n";
  for (const auto& h : p.habits_and_behaviors) out += h + "\n";
  out += "\n* Speaking style:\n" + p.speaking_style + "\n";
  return out;
}

SceneText parse_scene(std::string_view raw) {
  static const std::vector<SectionSpec> specs = {
      {"Topics that players may want to talk to NPCs",
       {"Topics that players may want to talk to NPC", "Topics"}},
      {"Cause", {}},
      {"Course", {}},
      {"Conflicts", {"Conflict"}},
      {"Difficulties", {"Difficulty"}},
      {"Current state", {"Current status"}},
      {"Reactions", {"Reaction"}},
  };
  const auto sections = split_sections(raw, specs);
  std::vector<std::string> missing;
  for (std::size_t i = 1; i < specs.size(); ++i) {
    if (!sections.has_nonempty(specs[i].label)) missing.push_back(specs[i].label);
  }
  if (!missing.empty()) throw MalformedScene("scene missing: " + join(missing, ", "));
  SceneText s;
  if (const auto* t = sections.find(specs[0].label)) s.background.confide_topics = *t;
  s.background.cause = *sections.find("Cause");
  s.background.course = *sections.find("Course");
  s.background.conflicts = *sections.find("Conflicts");
  s.background.difficulties = *sections.find("Difficulties");
  s.background.current_state = *sections.find("Current state");
  s.reactions = *sections.find("Reactions");
  return s;
}

std::string format_scene(const SceneText& s) {
  std::string out;
  if (!s.background.confide_topics.empty()) {
    out += "Topics that players may want to talk to NPCs:\n" + s.background.confide_topics + "\n";
  }
  out += fmt::format("Cause:\n{}\nCourse:\n{}\nConflicts:\n{}\nDifficulties:\n{}\nCurrent state:\n{}\nReactions:\n{}\n",
                     s.background.cause, s.background.course, s.background.conflicts,
                     s.background.difficulties, s.background.current_state, s.reactions);
  return out;
}

std::string persona_slot(const Persona& persona) {
  std::string out = format_persona(persona);
  if (!persona.characteristics.empty()) out += "\n* Characteristics: " + persona.characteristics + "\n";
  return out;
}

std::string background_slot(const Scene& scene) {
  std::string out;
  if (!scene.theme.empty()) out += "Event topic: " + scene.theme + "\n";
  out += "Hidden intention: " + scene.hidden_intention + "\n\n";
  out += format_scene(SceneText{scene.background, scene.reaction_rules});
  return out;
}

}  // namespace sage::prompt
