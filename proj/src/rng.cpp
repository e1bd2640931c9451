#include "dlneb/rng.hpp"

namespace dlneb {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream(std::uint64_t seed, std::string_view name) {
    // FNV-1a over the name, then mixed with the seed
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(seed ^ splitmix64(h));
}

Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& gen, double sd) {
    std::normal_distribution<double> nd(0.0, sd);
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = nd(gen);
    return M;
}

Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed, double sd) {
    std::mt19937_64 gen(seed);
    return gaussian_matrix(rows, cols, gen, sd);
}

Matrix uniform_matrix(int rows, int cols, double bound, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> ud(-bound, bound);
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = ud(gen);
    return M;
}

} // namespace dlneb
