#pragma once

namespace guidelab {

// Built-in check groups, one "ok <group>" / "FAIL <group>" line each on
// stdout. Returns the number of failing groups (0 when healthy).
int run_selftest();

}  // namespace guidelab
