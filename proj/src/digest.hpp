#pragma once

#include <string>

namespace majlab {

std::string sha256_hex(const std::string& data);

}  // namespace majlab
