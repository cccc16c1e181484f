#pragma once

#include <string>
#include <string_view>

#include "avr/core/errors.hpp"

namespace avr::gateway {

class ExtractionError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

/// Document source from a coder reply: the last fenced code block, else
/// everything from the first `<!DOCTYPE` or `<html` (case-insensitive).
std::string extract_code(std::string_view reply);

}  // namespace avr::gateway
