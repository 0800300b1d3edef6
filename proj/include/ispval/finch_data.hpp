#pragma once

#include <vector>

#include "ispval/matrix.hpp"

namespace ispval {

// Darwin's finch occurrence matrix: 13 species x 17 Galapagos islands.
const BinaryMatrix& darwin_finch_matrix();

// Row and column margins sorted descending, as quoted in the literature.
const std::vector<int>& finch_sorted_row_margins();
const std::vector<int>& finch_sorted_col_margins();

}  // namespace ispval
