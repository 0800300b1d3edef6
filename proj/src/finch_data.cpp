#include "ispval/finch_data.hpp"

#include <array>

namespace ispval {

namespace {

// Rows: G. magnirostris, G. fortis, G. fuliginosa, G. difficilis, G. scandens,
// G. conirostris, C. psittacula, C. pauper, C. parvulus, P. crassirostris,
// C. pallida, C. heliobates, Certhidea olivacea.
// Columns: Seymour, Baltra, Isabella, Fernandina, Santiago, Rabida, Pinzon,
// Santa Cruz, Santa Fe, San Cristobal, Espanola, Floreana, Genovesa, Marchena,
// Pinta, Darwin, Wolf.
constexpr std::array<std::array<int, 17>, 13> kFinch = {{
    {0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1},
    {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0},
    {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 0, 0},
    {0, 0, 1, 1, 1, 0, 0, 1, 0, 1, 0, 1, 1, 0, 1, 1, 1},
    {1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0},
    {0, 0, 1, 1, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0},
    {0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 0, 0, 1, 0, 0},
    {0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0},
    {0, 0, 1, 1, 1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
}};

}  // namespace

const BinaryMatrix& darwin_finch_matrix() {
    static const BinaryMatrix m = [] {
        BinaryMatrix x(13, 17);
        for (int i = 0; i < 13; ++i)
            for (int j = 0; j < 17; ++j) x.set(i, j, static_cast<std::uint8_t>(kFinch[i][j]));
        return x;
    }();
    return m;
}

const std::vector<int>& finch_sorted_row_margins() {
    static const std::vector<int> v = {17, 14, 14, 13, 12, 11, 10, 10, 10, 6, 2, 2, 1};
    return v;
}

const std::vector<int>& finch_sorted_col_margins() {
    static const std::vector<int> v = {11, 10, 10, 10, 10, 9, 9, 9,
                                       8,  8,  7,  4,  4,  4, 3, 3, 3};
    return v;
}

}  // namespace ispval
