#include "pmelab/util.hpp"

#include <fmt/format.h>

namespace pmelab {

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string fmt_g17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace pmelab
