#include "easybo/sobol.hpp"
#include "easybo/rng.hpp"

#include <stdexcept>

namespace easybo {

namespace {

constexpr int kBits = 32;

// Joe-Kuo primitive polynomials and initial direction numbers for dimensions
// 2..16 (dimension 1 is the van der Corput sequence). Fields: degree s,
// polynomial coefficient a, initial m_1..m_s.
struct JoeKuoRow {
    int s;
    std::uint32_t a;
    std::uint32_t m[6];
};

constexpr JoeKuoRow kJoeKuo[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 1, 3, 3, 9, 7}},
    {6, 13, {1, 1, 5, 13, 3, 7}},
    {6, 16, {1, 3, 3, 9, 9, 25}},
};

std::vector<std::uint32_t> direction_vectors(int dim_index) {
    std::vector<std::uint32_t> v(kBits);
    if (dim_index == 0) {
        for (int j = 0; j < kBits; ++j) v[j] = 1u << (kBits - 1 - j);
        return v;
    }
    const JoeKuoRow& row = kJoeKuo[dim_index - 1];
    const int s = row.s;
    for (int j = 0; j < s; ++j) v[j] = row.m[j] << (kBits - 1 - j);
    for (int j = s; j < kBits; ++j) {
        std::uint32_t x = v[j - s] ^ (v[j - s] >> s);
        for (int k = 1; k < s; ++k) {
            if ((row.a >> (s - 1 - k)) & 1u) x ^= v[j - k];
        }
        v[j] = x;
    }
    return v;
}

} // namespace

SobolSequence::SobolSequence(int dim, std::uint64_t seed) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim)
        throw std::invalid_argument("SobolSequence: dimension must be in [1, 16]");
    dirs_.reserve(dim);
    shift_.reserve(dim);
    Rng rng(derive_seed(seed, "sobol-shift"));
    for (int d = 0; d < dim; ++d) {
        dirs_.push_back(direction_vectors(d));
        shift_.push_back(static_cast<std::uint32_t>(rng.next_u64() >> 32));
    }
}

Eigen::VectorXd SobolSequence::point(std::uint64_t index) const {
    Eigen::VectorXd p(dim_);
    // Gray-code construction evaluated directly at `index`.
    std::uint64_t gray = index ^ (index >> 1);
    for (int d = 0; d < dim_; ++d) {
        std::uint32_t x = 0;
        std::uint64_t g = gray;
        for (int bit = 0; g != 0 && bit < kBits; ++bit, g >>= 1) {
            if (g & 1) x ^= dirs_[d][bit];
        }
        x ^= shift_[d];
        p[d] = static_cast<double>(x) * 0x1.0p-32;
    }
    return p;
}

} // namespace easybo
