#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "orsum/llm/backend.hpp"

namespace orsum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitTotalFailure = 3;

// Test seams. `gate` is shared by every mock backend the run creates;
// `sleep` replaces the retry back-off sleep.
struct Hooks {
  std::shared_ptr<llm::ConcurrencyGate> gate;
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Runs one command line (without the program name), e.g.
// {"--workdir", "w", "generate", "--method", "cgi2"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Hooks& hooks = {});

// Keeps [A-Za-z0-9._-] and maps everything else to '_'.
std::string file_stem(const std::string& paper_id);

}  // namespace orsum::cli
