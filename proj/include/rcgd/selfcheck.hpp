#pragma once

#include <ostream>

namespace rcgd {

// Runs the fast invariant suite, one PASS/FAIL line per check.
// Returns the number of failed checks.
int run_invariant_suite(std::ostream& out);

}  // namespace rcgd
