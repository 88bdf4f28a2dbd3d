#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace cusplab {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using SparseRealMatrix = Eigen::SparseMatrix<double>;

/// Which part of a glued graph a vertex belongs to.
enum class Block : std::uint8_t { funnel, compact, cusp };

inline const char* block_name(Block b) {
    switch (b) {
        case Block::funnel: return "funnel";
        case Block::compact: return "compact";
        case Block::cusp: return "cusp";
    }
    return "?";
}

/// Product coordinates of a vertex: ray level and fiber index.
/// Compact-part vertices carry level = -1 and fiber = index within the
/// compact part.
struct VertexLabel {
    Block block = Block::cusp;
    int level = -1;
    int fiber = 0;
};

/// Japanese-bracket weight sqrt(1 + x^2).
inline double bracket(double x) { return std::sqrt(1.0 + x * x); }

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace cusplab
