#include "wrapforge/style_prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wrapforge/digest.hpp"
#include "wrapforge/text.hpp"

namespace wrapforge {

namespace {

constexpr std::string_view kPreamble =
    "A chat between a curious user and an artificial intelligence assistant. The assistant gives "
    "helpful, detailed, and polite answers to the questions.";

constexpr std::string_view kEasy =
    "For the following paragraph give me a paraphrase of the same using a very small vocabulary "
    "and extremely simple sentences that a toddler will understand:";

constexpr std::string_view kHard =
    "For the following paragraph give me a paraphrase of the same using very terse and abstruse "
    "language that only an erudite scholar will understand. Replace simple words and phrases with "
    "rare and complex ones:";

constexpr std::string_view kMedium =
    "For the following paragraph give me a diverse paraphrase of the same in high quality English "
    "language as in sentences on Wikipedia:";

constexpr std::string_view kQA =
    "Convert the following paragraph into a conversational format with multiple tags of "
    "\"Question:\" followed by \"Answer:\":";

}  // namespace

std::string to_string(Style style) {
  switch (style) {
    case Style::Easy: return "easy";
    case Style::Medium: return "medium";
    case Style::Hard: return "hard";
    case Style::QA: return "qa";
  }
  return "unknown";
}

Style parse_style(std::string_view name) {
  const std::string lower = to_lower_ascii(name);
  for (Style s : kAllStyles) {
    if (to_string(s) == lower) return s;
  }
  throw std::invalid_argument("unknown style: " + std::string(name));
}

std::string PromptTemplate::label() const { return style ? to_string(*style) : "file"; }

PromptTemplate builtin_template(Style style) {
  PromptTemplate t;
  t.style = style;
  t.system_preamble = kPreamble;
  t.version = kBuiltinTemplateVersion;
  switch (style) {
    case Style::Easy: t.instruction = kEasy; break;
    case Style::Medium: t.instruction = kMedium; break;
    case Style::Hard: t.instruction = kHard; break;
    case Style::QA: t.instruction = kQA; break;
  }
  return t;
}

PromptTemplate load_template_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open template file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string body = ss.str();
  if (body.find(kParagraphPlaceholder) == std::string::npos) {
    throw std::invalid_argument("template file lacks {{PARAGRAPH}} placeholder: " + path.string());
  }
  PromptTemplate t;
  t.version = "file:" + sha256_hex(body).substr(0, 12);
  t.user_body = std::move(body);
  return t;
}

PromptTemplate resolve_style_argument(std::string_view arg) {
  constexpr std::string_view kFile = "file:";
  if (arg.substr(0, kFile.size()) == kFile) {
    return load_template_file(std::filesystem::path(std::string(arg.substr(kFile.size()))));
  }
  return builtin_template(parse_style(arg));
}

ChatRequestBody render_prompt(const PromptTemplate& tmpl, std::string_view paragraph,
                              RoleLayout layout) {
  const std::string_view para = trim_right(paragraph);
  if (para.empty()) throw std::invalid_argument("empty paragraph");

  ChatRequestBody body;
  if (!tmpl.user_body.empty()) {
    std::string content = tmpl.user_body;
    const auto pos = content.find(kParagraphPlaceholder);
    content.replace(pos, kParagraphPlaceholder.size(), para);
    body.messages.push_back({"user", std::move(content)});
    return body;
  }
  std::string user = tmpl.instruction + "\n" + std::string(para);
  if (layout == RoleLayout::SplitRoles) {
    body.messages.push_back({"system", tmpl.system_preamble});
    body.messages.push_back({"user", std::move(user)});
  } else {
    body.messages.push_back({"user", tmpl.system_preamble + " USER: " + user});
  }
  return body;
}

nlohmann::json to_json(const ChatRequestBody& body) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : body.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return messages;
}

}  // namespace wrapforge
