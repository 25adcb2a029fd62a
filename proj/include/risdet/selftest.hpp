#pragma once

#include <cstdint>
#include <ostream>

namespace risdet::selftest {

/// Compact oracle suite for the CLI: cross-checks the closed forms against
/// their independent evaluations and prints one line per check. Returns true
/// when every check passes.
bool run(std::ostream& out, std::uint64_t seed = 1);

}  // namespace risdet::selftest
