#pragma once

#include <string>

#include "gbcalib/huber_lmm.hpp"

namespace gbcalib {

// Formats a double with 17 significant digits (round-trip exact).
std::string g17(double value);

// Dataset interchange: header `group_id,y,x_1..x_p`, one row per
// observation. Rows with the same group_id form one group even when
// not contiguous; groups keep first-appearance order. Throws
// ParseError (with the 1-based line number) on malformed input.
GroupedDataset load_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const GroupedDataset& ds);

// Draw matrices: header `draw_index,<prefix>1..<prefix>p`.
void write_draws_csv(const std::string& path, const Matrix& draws,
                     const std::string& column_prefix);
Matrix load_draws_csv(const std::string& path);

}  // namespace gbcalib
