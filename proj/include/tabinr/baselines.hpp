#pragma once

#include "tabinr/table.hpp"

namespace tabinr {

// Numeric missing cells get the observed column mean; categorical groups get
// the modal category (tie -> lowest index) as one-hot. Same units as `table`.
Matrix impute_mean_mode(const EncodedTable& table, const BoolMask& target_mask);

// Row distance: Euclidean over co-observed numeric columns plus 0/1 mismatch
// over co-observed categorical groups, normalized by the co-observed count.
// Numeric: mean of the k nearest valid donors. Categorical: majority vote,
// ties broken by the nearest donor's label. Rows without co-observed features
// fall back to mean/mode.
Matrix impute_knn(const EncodedTable& table, const BoolMask& target_mask, int k);

}  // namespace tabinr
