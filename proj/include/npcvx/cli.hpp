#pragma once

#include <iosfwd>
#include <string>

#include "npcvx/data.hpp"

namespace npc {

/// Labeled CSV: header row, a label column `y` with values in {-1, 1}, every
/// other column a finite feature. Row order is preserved.
/// Throws SchemaError, NonFiniteValue, UnknownLabel, EmptyData.
LabeledData load_csv(const std::string& path);
LabeledData parse_labeled_csv(std::istream& in);

/// Unlabeled CSV of finite reals with a header row (e.g. pre-evaluated
/// g_j(xi_i) values, one column per j).
FeatureMatrix load_value_csv(const std::string& path);
FeatureMatrix parse_value_csv(std::istream& in);

/// Runs one subcommand. Returns 0 on success, 2 on validation errors (error
/// JSON on `err`), 1 on runtime failures.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int parse_and_dispatch(int argc, const char* const* argv);

}  // namespace npc
