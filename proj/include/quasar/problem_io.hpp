#pragma once

#include <filesystem>
#include <string>

#include "quasar/objectives.hpp"

namespace quasar {

/// Shortest decimal text that parses back to the same double ("%.17g").
std::string format_double(double v);

/// Writes `<stem>.csv` (header j,x_1..x_d,y) and `<stem>.json`
/// ({n, d, link, alpha, seed, w_star}). Values round-trip bit-exactly.
void write_problem(const GlmProblem& problem, const std::filesystem::path& stem);

/// Reads the pair written by write_problem. Throws Error on schema mismatch.
GlmProblem read_problem(const std::filesystem::path& stem);

}  // namespace quasar
