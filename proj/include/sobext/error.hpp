#pragma once

#include <stdexcept>
#include <string>

namespace sobext {

enum class ErrorKind { validation, numerical, inconclusive };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string &msg) { throw Error(ErrorKind::validation, msg); }
[[noreturn]] inline void fail_numerical(const std::string &msg) { throw Error(ErrorKind::numerical, msg); }

// exit code convention of the command line tool
inline int exit_code(ErrorKind k)
{
  switch (k) {
  case ErrorKind::validation: return 2;
  case ErrorKind::numerical: return 3;
  case ErrorKind::inconclusive: return 4;
  }
  return 3;
}

} // namespace sobext
