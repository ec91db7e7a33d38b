#pragma once

#include <stdexcept>
#include <string>

namespace dyadot {

/// File could not be opened, read, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dyadot
