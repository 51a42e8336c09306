#pragma once

#include <cstdint>
#include <vector>

#include "svaug/features.hpp"

namespace svaug::detail {

void validate_training_inputs(const std::vector<SparseVector>& X,
                              const std::vector<uint32_t>& y,
                              uint32_t n_classes);

}  // namespace svaug::detail
