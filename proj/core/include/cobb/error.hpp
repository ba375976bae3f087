#pragma once

#include <stdexcept>
#include <string>

namespace cobb {

/// Error with a stable machine-parseable code; the CLI prints
/// "E_<code>: message" on one line and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

namespace errc {
inline constexpr const char* io = "IO";
inline constexpr const char* parse = "PARSE";
inline constexpr const char* schema = "SCHEMA";
inline constexpr const char* config = "CONFIG";
inline constexpr const char* width = "WIDTH_MISMATCH";
inline constexpr const char* fit = "FIT";
inline constexpr const char* args = "ARGS";
}  // namespace errc

}  // namespace cobb
