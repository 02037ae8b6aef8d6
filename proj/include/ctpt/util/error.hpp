#pragma once

#include <stdexcept>
#include <string>

namespace ctpt {

// Error categories map onto CLI exit codes: usage=1, data=2, numeric=3.
enum class ErrorKind { usage, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& what) {
  return Error(ErrorKind::usage, what);
}
inline Error data_error(const std::string& what) {
  return Error(ErrorKind::data, what);
}
inline Error numeric_error(const std::string& what) {
  return Error(ErrorKind::numeric, what);
}

}  // namespace ctpt
