#include "intbo/strategy.hpp"

#include "intbo/space.hpp"

namespace intbo {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Naive:
      return "naive";
    case Strategy::Basic:
      return "basic";
    case Strategy::Proposed:
      return "proposed";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "naive") return Strategy::Naive;
  if (name == "basic") return Strategy::Basic;
  if (name == "proposed") return Strategy::Proposed;
  throw ContractError("unknown strategy '" + name + "' (expected naive, basic or proposed)");
}

}  // namespace intbo
