#pragma once

// A token is a maximal run of ASCII letters, case-folded to lower case.
// Digits, punctuation and whitespace are separators.

#include <cstddef>
#include <string>
#include <string_view>

namespace tonegar {

constexpr bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

constexpr char fold_case(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

/// Calls fn(std::string_view token) for every token; the view is only valid during the call.
template <typename Fn>
void for_each_token(std::string_view text, Fn&& fn) {
  std::string token;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && !is_token_char(text[i])) ++i;
    if (i == n) break;
    token.clear();
    while (i < n && is_token_char(text[i])) token.push_back(fold_case(text[i++]));
    fn(std::string_view{token});
  }
}

inline std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    const bool t = is_token_char(c);
    if (t && !in_token) ++count;
    in_token = t;
  }
  return count;
}

}  // namespace tonegar
