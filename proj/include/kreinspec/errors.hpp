#ifndef KREINSPEC_ERRORS_HPP
#define KREINSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kreinspec {

// All recoverable failures carry a short machine-readable code
// (e.g. "NonIntegrable", "ContourTooClose") plus a human message.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
  throw Error(code, message);
}

} // namespace kreinspec

#endif
