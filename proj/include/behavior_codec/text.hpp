#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace behavior_codec {

struct TokenizedCode {
  std::string code_id;
  std::vector<std::string> tokens;
  /// Nothing alphabetic survived the filters.
  bool empty_after_filter = false;
};

/// Splits on every non-alphanumeric character, lowercases, drops tokens that
/// are not purely alphabetic, drops stop words, lemmatizes, and drops any
/// lemma that is itself a stop word. Idempotent on its own output.
TokenizedCode preprocess(std::string_view text, std::string_view code_id = {});

/// The shipped English stop list (lowercase).
const std::vector<std::string_view>& stop_words();
bool is_stop_word(std::string_view word);

/// Rule-based lemma of a lowercase alphabetic word: irregular table, plural
/// suffixes, and -ing/-ed with consonant undoubling and silent-e restoration,
/// applied until the word stops changing.
std::string lemmatize(std::string_view word);

}  // namespace behavior_codec
