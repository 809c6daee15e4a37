#pragma once

#include <string>

namespace intbo {

/// How integer-valued variables are handled by the optimization loop.
///  - Naive: continuous GP, acquisition on the relaxation, rounded point stored.
///  - Basic: continuous GP, rounding only inside the objective wrapper.
///  - Proposed: GP kernel evaluated on rounded inputs.
enum class Strategy { Naive, Basic, Proposed };

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

}  // namespace intbo
