#pragma once

#include <stdexcept>
#include <string>

namespace dcnet {

enum class Errc {
  invalid_group,
  missing_trapdoor,
  group_too_small,
  out_of_range,
  schedule_exhausted,
  config_mismatch,
  domain_error,
  decode_error,
  io_error,
};

const char* to_string(Errc code) noexcept;

/// Exception carrying one of the library error classes.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what)
    , m_code{code}
  {}

  Errc code() const noexcept { return m_code; }

private:
  Errc m_code;
};

} // namespace dcnet
