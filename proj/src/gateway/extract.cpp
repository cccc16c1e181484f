#include "avr/gateway/extract.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <vector>

namespace avr::gateway {

namespace {

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_fence(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return line.substr(i, 3) == "```";
}

std::optional<std::string> last_fenced_block(std::string_view reply) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    auto nl = reply.find('\n', pos);
    if (nl == std::string_view::npos) nl = reply.size();
    lines.push_back(trim_right(reply.substr(pos, nl - pos)));
    pos = nl + 1;
  }
  std::optional<std::string> last;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    std::size_t j = i + 1;
    while (j < lines.size() && !is_fence(lines[j])) ++j;
    if (j == lines.size()) break;
    std::string body;
    for (std::size_t k = i + 1; k < j; ++k) {
      body.append(lines[k]);
      body.push_back('\n');
    }
    last = std::move(body);
    i = j;
  }
  return last;
}

std::size_t find_ci(std::string_view hay, std::string_view needle) {
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  });
  return it == hay.end() ? std::string_view::npos : static_cast<std::size_t>(it - hay.begin());
}

}  // namespace

std::string extract_code(std::string_view reply) {
  if (auto block = last_fenced_block(reply); block && !block->empty()) return *block;
  const auto doctype = find_ci(reply, "<!DOCTYPE");
  const auto html = find_ci(reply, "<html");
  const auto start = std::min(doctype, html);
  if (start == std::string_view::npos)
    throw ExtractionError("reply contains neither a fenced code block nor an HTML document");
  return std::string(reply.substr(start));
}

}  // namespace avr::gateway
