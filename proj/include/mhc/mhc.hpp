#pragma once

#include "mhc/bounds.hpp"
#include "mhc/chain.hpp"
#include "mhc/coupling.hpp"
#include "mhc/estimate.hpp"
#include "mhc/estimators.hpp"
#include "mhc/model.hpp"
#include "mhc/models/quadratic.hpp"
#include "mhc/models/tps.hpp"
#include "mhc/norm.hpp"
#include "mhc/parallel.hpp"
#include "mhc/proposal.hpp"
#include "mhc/random.hpp"

namespace mhc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mhc
