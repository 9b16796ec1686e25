#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "axgen/evolver.hpp"

namespace axgen::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kInfeasible = 3 };

/// Runs `axgen <args...>` in-process. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Knee of an archive: argmax of normalized train-accuracy gain minus
/// normalized area. Lowest index wins ties. Throws DataError when empty.
std::size_t knee_index(const evolver::ParetoArchive& archive);

/// Header plus one row per entry, in archive order.
std::string report_csv(const evolver::ParetoArchive& archive);
std::string report_gnuplot(const evolver::ParetoArchive& archive);

/// Rows whose test accuracy is below that of some smaller-area row.
std::vector<bool> non_monotone_test(const evolver::ParetoArchive& archive);

/// `<dataset>_<areaFA>_<acc%>` with acc% the test accuracy to one decimal.
std::string entry_stem(const evolver::ParetoArchive& archive, std::size_t index);

}  // namespace axgen::cli
