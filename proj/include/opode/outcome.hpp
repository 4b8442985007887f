#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opode/verify.hpp"

namespace opode {

/// What a strategy did, for reports.
struct Trace {
    std::string strategy;
    int iterations = 0;
    std::vector<std::string> events;       // survived-detection history and similar
    std::vector<std::string> diagnostics;  // why a strategy gave up
};

struct Outcome {
    std::optional<Solution> solution;
    Trace trace;
};

}  // namespace opode
