// Linearized water-wave operator, its good-unknown factorization and the block split
// of the restricted operator by space frequency.
#pragma once

#include "sww/dn.hpp"
#include "sww/state.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sww {

using LinearMap = std::function<StatePair(const StatePair&)>;

// F'(u) with coefficients frozen at u.
struct LinearizedOp {
    StatePair u;
    double omega = 0.0;
    double kappa = 0.0;
    DNConfig dn;
    Field2D B, V;
    // 1 + omega B_t + V B_x
    Field2D a;
    // (1 + eta_x^2)^{-3/2}
    Field2D c;

    Field2D G(const Field2D& f) const { return dn_apply(u.eta, f, dn); }
    StatePair apply(const StatePair& h) const;

    // Z = [[1, 0], [B, 1]] and its inverse.
    StatePair Z(const StatePair& h) const;
    StatePair Z_inv(const StatePair& h) const;
    // [[omega d_t + d_x V, -G], [a - kappa d_x c d_x, omega d_t + V d_x]]
    StatePair L0(const StatePair& h) const;
};

LinearizedOp build_linearized(const StatePair& u, double omega, double kappa, const DNConfig& cfg = {});

StatePair linearized_apply(const StatePair& u, double omega, double kappa, const StatePair& h,
                           const DNConfig& cfg = {});

struct GoodUnknownFactor {
    LinearMap Z;
    LinearMap Z_inv;
    LinearMap L0;
    Field2D a;
};

// F'(u) = Z L0 Z^{-1}.
GoodUnknownFactor good_unknown_factor(const StatePair& u, double omega, double kappa,
                                      const DNConfig& cfg = {});

// Parity projection onto X x Y followed by removal of the kernel direction v0.
StatePair project_W(const StatePair& h, double omega_bar);
// Parity projection onto Y x X followed by removal of the z0 direction.
StatePair project_R(const StatePair& f, double omega_bar);
// Keep |j| <= 1, resp. |j| >= 2.
StatePair low_space(const StatePair& h);
StatePair high_space(const StatePair& h);

class NeumannError : public std::runtime_error {
public:
    NeumannError(double contraction, int iterations);
    double contraction;
    int iterations;
};

struct NeumannReport {
    int iterations = 0;
    // Largest ratio of successive correction norms.
    double contraction = 0.0;
    double final_correction = 0.0;
};

struct BlockDecomposition {
    LinearizedOp op;
    double omega_bar = 0.0;

    // Block L_a^b = Pi_{R_a} F'(u) restricted to W_b, a, b in {01, 2}.
    StatePair L01_01(const StatePair& h) const;
    StatePair L01_2(const StatePair& h) const;
    StatePair L2_01(const StatePair& h) const;
    StatePair L2_2(const StatePair& h) const;

    // Inverse of the unperturbed block Pi_{R01} L_omega on W01.
    StatePair invert_linear01(const StatePair& f) const;
    // Inverse of L01_01 by defect correction around invert_linear01.
    StatePair invert_L0101(const StatePair& f, NeumannReport* report = nullptr, double tol = 1e-13,
                           int max_iter = 60) const;
    // -L2_01 (L01_01)^{-1} L01_2
    StatePair remainder(const StatePair& h) const;
};

BlockDecomposition restrict_blocks(const StatePair& u, double omega, double kappa, const DNConfig& cfg = {});

// Real basis of a parity class on the lattice |l| + |j| < N, l, j >= 0.
// X x Y: (cos lt cos jx, 0) and (0, sin lt cos jx); Y x X: (sin lt cos jx, 0) and
// (0, cos lt cos jx).
class ParityBasis {
public:
    enum class Kind { XY, YX };
    ParityBasis(Kind kind, int N);

    Kind kind() const { return kind_; }
    int N() const { return N_; }
    int size() const { return static_cast<int>(items_.size()); }

    struct Item {
        int comp;
        int l;
        int j;
    };
    const Item& item(int k) const { return items_[static_cast<std::size_t>(k)]; }

    StatePair vector(int k, int L, int J) const;
    StatePair synthesize(const std::vector<double>& x, int L, int J) const;
    std::vector<double> coordinates(const StatePair& u) const;

private:
    Kind kind_;
    int N_;
    std::vector<Item> items_;
};

// Dense matrix of a linear map between parity bases, column-major, rows = out.size().
std::vector<double> densify(const LinearMap& map, const ParityBasis& in, const ParityBasis& out, int L, int J);

// Coordinate-list text export of a dense matrix (entries above the threshold).
std::string matrix_market(const std::vector<double>& m, int rows, int cols, double threshold = 0.0);

}  // namespace sww
