#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sgaudit {

/// Lowercase (ASCII) and strip surrounding whitespace. Names, candidate values
/// and labels are compared in this form.
std::string normalize(std::string_view text);

std::string trim(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Splits on ASCII whitespace and strips punctuation from each word, lowercased.
std::vector<std::string> words(std::string_view text);

/// Zero-padded decimal, e.g. padded(7, 4) == "0007".
std::string padded(unsigned long long value, int width);

}  // namespace sgaudit
