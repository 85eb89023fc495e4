#include "strb/error.hpp"

namespace strb {

void require(bool condition, const std::string& what) {
  if (!condition) throw InvalidArgument(what);
}

}  // namespace strb
