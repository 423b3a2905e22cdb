#include "dcnet/error.hpp"

namespace dcnet {

const char* to_string(Errc code) noexcept
{
  switch (code) {
  case Errc::invalid_group: return "InvalidGroup";
  case Errc::missing_trapdoor: return "MissingTrapdoor";
  case Errc::group_too_small: return "GroupTooSmall";
  case Errc::out_of_range: return "OutOfRange";
  case Errc::schedule_exhausted: return "ScheduleExhausted";
  case Errc::config_mismatch: return "ConfigMismatch";
  case Errc::domain_error: return "DomainError";
  case Errc::decode_error: return "DecodeError";
  case Errc::io_error: return "IOError";
  }
  return "Unknown";
}

} // namespace dcnet
