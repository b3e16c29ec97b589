#include "effinfer/model.hpp"

#include <fmt/format.h>

namespace effinfer {

std::string to_string(const Addr& addr) { return fmt::format("{}#{}", addr.tag, addr.occurrence); }

}  // namespace effinfer
