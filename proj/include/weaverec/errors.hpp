#pragma once

#include <stdexcept>
#include <string>

namespace weaverec {

// Input data violates a contract (bad manifest, dimension mismatch,
// invalid parameter ranges). Exit code 3 at the CLI boundary.
class data_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure (missing file, unwritable directory,
// truncated stream). Exit code 4 at the CLI boundary.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace weaverec
