#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strux/core.hpp"

namespace strux {

enum class Role { System, User };

struct Message {
  Role role = Role::User;
  std::string content;

  bool operator==(const Message&) const = default;
};

/// Chat-message envelope handed to the gateway. Always ends with the user
/// message carrying the input text.
struct PromptBundle {
  std::vector<Message> messages;

  bool operator==(const PromptBundle&) const = default;
  size_t char_length() const;
  /// Stable byte serialization used for hashing/caching.
  std::string flatten() const;
};

/// Prompt text assets. The builtin set is compiled in; load() reads the same
/// three files from a template directory (CLI --template-dir). Trailing
/// whitespace is normalized away so on-disk files may end with a newline.
struct PromptTemplates {
  std::string instruction;
  std::string example_1;
  std::string example_2;

  static const PromptTemplates& builtin();
  static PromptTemplates load(const std::string& dir);

  bool operator==(const PromptTemplates&) const = default;
};

/// Marker opening each few-shot exemplar block; zero-shot prompts never
/// contain it.
inline constexpr std::string_view kExemplarMarker = "### Example";

/// Builds the structurization prompt. FewShot = instruction + two exemplars +
/// payload; ZeroShot drops the exemplars and keeps everything else
/// byte-identical. Throws Error(EmptyInput) when text trims to empty.
PromptBundle build_structurize_prompt(std::string_view text, PromptMode mode,
                                      const PromptTemplates& templates = PromptTemplates::builtin());

/// ABS/QBS summarization baselines with the fixed wording. QBS requires a
/// query; ABS forbids one.
PromptBundle build_baseline_prompt(std::string_view text, PromptMode mode,
                                   const std::optional<std::string>& query = std::nullopt);

size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace strux
