// Truncated double Fourier series on the (t, x) torus.
#pragma once

#include <cassert>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sww {

using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

enum class ParityClass { X, Y, OddT_OddX, EvenT_OddX };

std::string to_string(ParityClass c);

// Values of a field sampled at t_a = 2*pi*a/nt, x_b = 2*pi*b/nx, row-major in a.
struct Grid {
    int nt = 0;
    int nx = 0;
    std::vector<cd> v;

    Grid() = default;
    Grid(int nt_, int nx_) : nt(nt_), nx(nx_), v(static_cast<std::size_t>(nt_) * nx_) {}
    cd& operator()(int a, int b) { return v[static_cast<std::size_t>(a) * nx + b]; }
    const cd& operator()(int a, int b) const { return v[static_cast<std::size_t>(a) * nx + b]; }
};

// Coefficients c(l, j) of f(t, x) = sum c(l, j) e^{i(l t + j x)} for |l| <= L, |j| <= J.
// Real fields keep c(-l, -j) = conj(c(l, j)); complex fields clear the flag.
class Field2D {
public:
    Field2D() = default;
    Field2D(int L, int J, bool real = true);

    int L() const { return L_; }
    int J() const { return J_; }
    bool is_real() const { return real_; }
    void set_real(bool r) { real_ = r; }

    bool in_range(int l, int j) const { return l >= -L_ && l <= L_ && j >= -J_ && j <= J_; }
    cd& operator()(int l, int j) { return c_[index(l, j)]; }
    const cd& operator()(int l, int j) const { return c_[index(l, j)]; }
    // Zero outside the table.
    cd at(int l, int j) const { return in_range(l, j) ? c_[index(l, j)] : cd(0.0); }

    std::vector<cd>& data() { return c_; }
    const std::vector<cd>& data() const { return c_; }
    std::size_t size() const { return c_.size(); }

    // Copy onto another table, dropping or zero-filling modes.
    Field2D resized(int L, int J) const;

    Field2D& operator+=(const Field2D& o);
    Field2D& operator-=(const Field2D& o);
    Field2D& operator*=(cd s);
    Field2D& operator*=(double s);
    Field2D operator-() const;

    // Pointwise complex conjugate of the function.
    Field2D conj() const;
    // Real and imaginary parts of the function (both real fields).
    Field2D re() const;
    Field2D im() const;

    // Largest |c(l,j) - conj(c(-l,-j))|.
    double hermitian_defect() const;
    // Replace c by its Hermitian average; marks the field real.
    void symmetrize();

    double max_abs() const;
    bool is_zero(double tol = 0.0) const { return max_abs() <= tol; }

    // Builders.
    static Field2D zeros(int L, int J, bool real = true) { return Field2D(L, J, real); }
    static Field2D constant(int L, int J, double value);
    // Single exponential e^{i(l t + j x)} with amplitude a (complex field).
    static Field2D exponential(int L, int J, int l, int j, cd a = 1.0);
    // a * trig_t(l t) * trig_x(j x) where trig is cos when the flag is true, sin otherwise.
    static Field2D trig(int L, int J, bool cos_t, int l, bool cos_x, int j, double a = 1.0);

private:
    std::size_t index(int l, int j) const
    {
        assert(in_range(l, j));
        return static_cast<std::size_t>(l + L_) * static_cast<std::size_t>(2 * J_ + 1) +
               static_cast<std::size_t>(j + J_);
    }

    int L_ = 0;
    int J_ = 0;
    bool real_ = true;
    std::vector<cd> c_ = std::vector<cd>(1);
};

Field2D operator+(Field2D a, const Field2D& b);
Field2D operator-(Field2D a, const Field2D& b);
Field2D operator*(Field2D a, cd s);
Field2D operator*(cd s, Field2D a);
Field2D operator*(Field2D a, double s);
Field2D operator*(double s, Field2D a);

// Fourier multiplier m(l, j). real_symmetric means m(-l,-j) = conj m(l,j), so real
// fields stay real.
struct Multiplier {
    std::function<cd(int, int)> symbol;
    bool real_symmetric = true;

    cd operator()(int l, int j) const { return symbol(l, j); }
};

Multiplier operator*(const Multiplier& a, const Multiplier& b);
Multiplier operator+(const Multiplier& a, const Multiplier& b);
Multiplier scaled(const Multiplier& a, cd s);

namespace mult {
Multiplier identity();
Multiplier dt();
Multiplier dx();
Multiplier dxx();
// |D_x|^r, zero on j = 0.
Multiplier abs_dx(double r = 1.0);
// -i sign(j).
Multiplier hilbert();
// Primitive in t (resp. x) with zero mean; kills the zero mode.
Multiplier dt_inv();
Multiplier dx_inv();
// Space average.
Multiplier pi0();
// max(1, |j|)^r.
Multiplier japanese_x(double r = 1.0);
// Symbol sum along the diagonal used by Sobolev norms: max(1, |l| + |j|)^r.
Multiplier weight(double r);
}  // namespace mult

Field2D apply(const Multiplier& m, const Field2D& f);

// <l, j> = max(1, |l| + |j|).
inline double bracket(int l, int j)
{
    const int s = std::abs(l) + std::abs(j);
    return s < 1 ? 1.0 : static_cast<double>(s);
}

double sobolev_norm(const Field2D& f, double s);
// Zero all modes with |l| + |j| >= N.
Field2D truncate(const Field2D& f, int N);

Field2D parity_project(const Field2D& f, ParityClass c);
double parity_distance(const Field2D& f, ParityClass c, double s = 0.0);

// ff keeps |j| <= 1, pp keeps |j| >= 2.
std::pair<Field2D, Field2D> space_split(const Field2D& f);

// Smallest FFT size >= n with factors 2, 3, 5, 7.
int fft_size(int n);

Grid to_grid(const Field2D& f, int nt, int nx);
// Coefficients of the trigonometric interpolant restricted to |l| <= L, |j| <= J.
Field2D from_grid(const Grid& g, int L, int J, bool real);

struct ProductResult {
    Field2D value;
    // Sobolev-0 norm of modes that fell outside the output table.
    double truncation_loss = 0.0;
};

// Exact product with 2x padding, returned on max(L), max(J).
Field2D multiply(const Field2D& f, const Field2D& g);
// Exact product on the table (L, J), with the discarded part reported.
ProductResult multiply_report(const Field2D& f, const Field2D& g, int L, int J);
Field2D operator*(const Field2D& f, const Field2D& g);

// Pointwise map F(f1(t,x), ..., fn(t,x)) evaluated on a collocation grid of at least
// 4(2L+1) x 4(2J+1) points; output on (L, J).
Field2D collocate(const std::vector<const Field2D*>& inputs,
                  const std::function<cd(const cd*)>& fn, int L, int J, bool real_out);
Field2D collocate(const Field2D& f, const std::function<cd(cd)>& fn);

// Sample a field at one point.
cd evaluate(const Field2D& f, double t, double x);

}  // namespace sww
