#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace wrapforge {

enum class Style { Easy, Medium, Hard, QA };

inline constexpr std::array<Style, 4> kAllStyles = {Style::Easy, Style::Medium, Style::Hard,
                                                    Style::QA};

/// Lowercase name: easy, medium, hard, qa.
std::string to_string(Style style);
/// Case-insensitive inverse of to_string; throws std::invalid_argument otherwise.
Style parse_style(std::string_view name);

/// Rephrasing prompt. Builtin templates carry the system preamble and an
/// instruction ending in ':'; rendering appends "\n" and the paragraph.
/// User templates from a file instead carry a body with a `{{PARAGRAPH}}`
/// placeholder and no preamble.
struct PromptTemplate {
  std::optional<Style> style;
  std::string system_preamble;
  std::string instruction;
  std::string user_body;  // non-empty only for file templates
  std::string version;

  /// "easy", "medium", ... or "file" for user templates.
  std::string label() const;
  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

inline constexpr std::string_view kParagraphPlaceholder = "{{PARAGRAPH}}";
inline constexpr std::string_view kBuiltinTemplateVersion = "wrap-v1";

PromptTemplate builtin_template(Style style);

/// Loads a plain-text template containing `{{PARAGRAPH}}`. Version is
/// "file:" plus the first 12 hex digits of the content's SHA-256.
PromptTemplate load_template_file(const std::filesystem::path& path);

/// Resolves a `--style` argument: easy|medium|hard|qa|file:<path>.
PromptTemplate resolve_style_argument(std::string_view arg);

struct ChatMessage {
  std::string role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequestBody {
  std::vector<ChatMessage> messages;

  friend bool operator==(const ChatRequestBody&, const ChatRequestBody&) = default;
};

enum class RoleLayout {
  SplitRoles,  // system message = preamble, user = instruction + "\n" + paragraph
  SingleTurn,  // one user message "<preamble> USER: <instruction>\n<paragraph>"
};

/// Builds the chat messages for one paragraph. Trailing whitespace of the
/// paragraph is dropped; everything else is embedded verbatim. Throws
/// std::invalid_argument for an empty paragraph.
ChatRequestBody render_prompt(const PromptTemplate& tmpl, std::string_view paragraph,
                              RoleLayout layout = RoleLayout::SplitRoles);

nlohmann::json to_json(const ChatRequestBody& body);

}  // namespace wrapforge
