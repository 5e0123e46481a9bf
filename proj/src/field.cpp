#include "sww/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace sww {

std::string to_string(ParityClass c)
{
    switch (c) {
    case ParityClass::X: return "X";
    case ParityClass::Y: return "Y";
    case ParityClass::OddT_OddX: return "odd_t_odd_x";
    case ParityClass::EvenT_OddX: return "even_t_odd_x";
    }
    return "?";
}

Field2D::Field2D(int L, int J, bool real) : L_(L), J_(J), real_(real)
{
    if (L < 0 || J < 0) throw std::invalid_argument("Field2D: negative truncation");
    c_.assign(static_cast<std::size_t>(2 * L + 1) * static_cast<std::size_t>(2 * J + 1), cd(0.0));
}

Field2D Field2D::resized(int L, int J) const
{
    Field2D r(L, J, real_);
    const int lm = std::min(L, L_), jm = std::min(J, J_);
    for (int l = -lm; l <= lm; ++l)
        for (int j = -jm; j <= jm; ++j) r(l, j) = (*this)(l, j);
    return r;
}

Field2D& Field2D::operator+=(const Field2D& o)
{
    if (o.L() != L_ || o.J() != J_) {
        const int L = std::max(L_, o.L()), J = std::max(J_, o.J());
        *this = resized(L, J);
        *this += o.resized(L, J);
        return *this;
    }
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    real_ = real_ && o.real_;
    return *this;
}

Field2D& Field2D::operator-=(const Field2D& o)
{
    if (o.L() != L_ || o.J() != J_) {
        const int L = std::max(L_, o.L()), J = std::max(J_, o.J());
        *this = resized(L, J);
        *this -= o.resized(L, J);
        return *this;
    }
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    real_ = real_ && o.real_;
    return *this;
}

Field2D& Field2D::operator*=(cd s)
{
    for (auto& v : c_) v *= s;
    if (s.imag() != 0.0) real_ = false;
    return *this;
}

Field2D& Field2D::operator*=(double s)
{
    for (auto& v : c_) v *= s;
    return *this;
}

Field2D Field2D::operator-() const
{
    Field2D r(*this);
    for (auto& v : r.c_) v = -v;
    return r;
}

Field2D Field2D::conj() const
{
    Field2D r(L_, J_, real_);
    for (int l = -L_; l <= L_; ++l)
        for (int j = -J_; j <= J_; ++j) r(l, j) = std::conj((*this)(-l, -j));
    return r;
}

Field2D Field2D::re() const
{
    Field2D r = *this;
    r += conj();
    r *= 0.5;
    r.set_real(true);
    return r;
}

Field2D Field2D::im() const
{
    Field2D r = *this;
    r -= conj();
    r *= cd(0.0, -0.5);
    r.set_real(true);
    return r;
}

double Field2D::hermitian_defect() const
{
    double d = 0.0;
    for (int l = -L_; l <= L_; ++l)
        for (int j = -J_; j <= J_; ++j)
            d = std::max(d, std::abs((*this)(l, j) - std::conj((*this)(-l, -j))));
    return d;
}

void Field2D::symmetrize()
{
    for (int l = -L_; l <= L_; ++l)
        for (int j = -J_; j <= J_; ++j) {
            if (l < 0 || (l == 0 && j < 0)) continue;
            const cd a = 0.5 * ((*this)(l, j) + std::conj((*this)(-l, -j)));
            (*this)(l, j) = a;
            (*this)(-l, -j) = std::conj(a);
        }
    real_ = true;
}

double Field2D::max_abs() const
{
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
}

Field2D Field2D::constant(int L, int J, double value)
{
    Field2D r(L, J, true);
    r(0, 0) = value;
    return r;
}

Field2D Field2D::exponential(int L, int J, int l, int j, cd a)
{
    Field2D r(L, J, false);
    r(l, j) = a;
    return r;
}

Field2D Field2D::trig(int L, int J, bool cos_t, int l, bool cos_x, int j, double a)
{
    // cos(l t) = (e^{il t} + e^{-il t})/2, sin(l t) = (e^{il t} - e^{-il t})/(2i).
    Field2D r(L, J, true);
    const cd ct_p = cos_t ? cd(0.5) : cd(0.0, -0.5);
    const cd ct_m = cos_t ? cd(0.5) : cd(0.0, 0.5);
    const cd cx_p = cos_x ? cd(0.5) : cd(0.0, -0.5);
    const cd cx_m = cos_x ? cd(0.5) : cd(0.0, 0.5);
    r(l, j) += a * ct_p * cx_p;
    r(-l, j) += a * ct_m * cx_p;
    r(l, -j) += a * ct_p * cx_m;
    r(-l, -j) += a * ct_m * cx_m;
    return r;
}

Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
Field2D operator*(Field2D a, cd s) { return a *= s; }
Field2D operator*(cd s, Field2D a) { return a *= s; }
Field2D operator*(Field2D a, double s) { return a *= s; }
Field2D operator*(double s, Field2D a) { return a *= s; }

Multiplier operator*(const Multiplier& a, const Multiplier& b)
{
    auto sa = a.symbol, sb = b.symbol;
    return {[sa, sb](int l, int j) { return sa(l, j) * sb(l, j); }, a.real_symmetric && b.real_symmetric};
}

Multiplier operator+(const Multiplier& a, const Multiplier& b)
{
    auto sa = a.symbol, sb = b.symbol;
    return {[sa, sb](int l, int j) { return sa(l, j) + sb(l, j); }, a.real_symmetric && b.real_symmetric};
}

Multiplier scaled(const Multiplier& a, cd s)
{
    auto sa = a.symbol;
    return {[sa, s](int l, int j) { return s * sa(l, j); }, a.real_symmetric && s.imag() == 0.0};
}

namespace mult {
Multiplier identity() { return {[](int, int) { return cd(1.0); }, true}; }
Multiplier dt() { return {[](int l, int) { return cd(0.0, l); }, true}; }
Multiplier dx() { return {[](int, int j) { return cd(0.0, j); }, true}; }
Multiplier dxx() { return {[](int, int j) { return cd(-double(j) * j); }, true}; }
Multiplier abs_dx(double r)
{
    return {[r](int, int j) { return j == 0 ? cd(0.0) : cd(std::pow(std::abs(double(j)), r)); }, true};
}
Multiplier hilbert()
{
    return {[](int, int j) { return j == 0 ? cd(0.0) : cd(0.0, j > 0 ? -1.0 : 1.0); }, true};
}
Multiplier dt_inv()
{
    return {[](int l, int) { return l == 0 ? cd(0.0) : cd(0.0, -1.0 / l); }, true};
}
Multiplier dx_inv()
{
    return {[](int, int j) { return j == 0 ? cd(0.0) : cd(0.0, -1.0 / j); }, true};
}
Multiplier pi0() { return {[](int, int j) { return j == 0 ? cd(1.0) : cd(0.0); }, true}; }
Multiplier japanese_x(double r)
{
    return {[r](int, int j) { return cd(std::pow(std::max(1.0, std::abs(double(j))), r)); }, true};
}
Multiplier weight(double r)
{
    return {[r](int l, int j) { return cd(std::pow(bracket(l, j), r)); }, true};
}
}  // namespace mult

Field2D apply(const Multiplier& m, const Field2D& f)
{
    Field2D r(f.L(), f.J(), f.is_real() && m.real_symmetric);
    for (int l = -f.L(); l <= f.L(); ++l)
        for (int j = -f.J(); j <= f.J(); ++j) {
            const cd c = f(l, j);
            if (c != cd(0.0)) r(l, j) = m(l, j) * c;
        }
    return r;
}

double sobolev_norm(const Field2D& f, double s)
{
    double acc = 0.0;
    for (int l = -f.L(); l <= f.L(); ++l)
        for (int j = -f.J(); j <= f.J(); ++j) {
            const double a = std::norm(f(l, j));
            if (a != 0.0) acc += a * std::pow(bracket(l, j), 2.0 * s);
        }
    return std::sqrt(acc);
}

Field2D truncate(const Field2D& f, int N)
{
    Field2D r = f;
    for (int l = -f.L(); l <= f.L(); ++l)
        for (int j = -f.J(); j <= f.J(); ++j)
            if (std::abs(l) + std::abs(j) >= N) r(l, j) = 0.0;
    return r;
}

Field2D parity_project(const Field2D& f, ParityClass c)
{
    double st = 1.0, sx = 1.0;  // sign under t -> -t and x -> -x
    switch (c) {
    case ParityClass::X: break;
    case ParityClass::Y: st = -1.0; break;
    case ParityClass::OddT_OddX: st = -1.0; sx = -1.0; break;
    case ParityClass::EvenT_OddX: sx = -1.0; break;
    }
    Field2D r(f.L(), f.J(), f.is_real());
    for (int l = -f.L(); l <= f.L(); ++l)
        for (int j = -f.J(); j <= f.J(); ++j)
            r(l, j) = 0.25 * (f(l, j) + st * f(-l, j) + sx * f(l, -j) + st * sx * f(-l, -j));
    return r;
}

double parity_distance(const Field2D& f, ParityClass c, double s)
{
    return sobolev_norm(f - parity_project(f, c), s);
}

std::pair<Field2D, Field2D> space_split(const Field2D& f)
{
    Field2D ff(f.L(), f.J(), f.is_real()), pp(f.L(), f.J(), f.is_real());
    for (int l = -f.L(); l <= f.L(); ++l)
        for (int j = -f.J(); j <= f.J(); ++j) (std::abs(j) <= 1 ? ff : pp)(l, j) = f(l, j);
    return {ff, pp};
}

int fft_size(int n)
{
    for (int m = std::max(n, 1);; ++m) {
        int k = m;
        for (int p : {2, 3, 5, 7})
            while (k % p == 0) k /= p;
        if (k == 1) return m;
    }
}

namespace {

struct Plan {
    fftw_plan plan = nullptr;
    fftw_complex* buf = nullptr;
    int n = 0;
};

class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [k, p] : plans_) {
            fftw_destroy_plan(p.plan);
            fftw_free(p.buf);
        }
    }

    // Runs an in-place 2D transform of the grid values.
    void run(std::vector<cd>& v, int nt, int nx, int sign)
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(nt, nx, sign);
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            Plan p;
            p.n = nt * nx;
            p.buf = fftw_alloc_complex(static_cast<std::size_t>(p.n));
            p.plan = fftw_plan_dft_2d(nt, nx, p.buf, p.buf, sign, FFTW_ESTIMATE);
            it = plans_.emplace(key, p).first;
        }
        Plan& p = it->second;
        std::memcpy(p.buf, v.data(), sizeof(fftw_complex) * static_cast<std::size_t>(p.n));
        fftw_execute(p.plan);
        std::memcpy(static_cast<void*>(v.data()), p.buf, sizeof(fftw_complex) * static_cast<std::size_t>(p.n));
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, Plan> plans_;
};

PlanCache& plans()
{
    static PlanCache cache;
    return cache;
}

inline int wrap(int k, int n) { return ((k % n) + n) % n; }

}  // namespace

Grid to_grid(const Field2D& f, int nt, int nx)
{
    if (nt < 2 * f.L() + 1 || nx < 2 * f.J() + 1)
        throw std::invalid_argument("to_grid: grid too coarse for the field");
    Grid g(nt, nx);
    for (int l = -f.L(); l <= f.L(); ++l)
        for (int j = -f.J(); j <= f.J(); ++j) g(wrap(l, nt), wrap(j, nx)) = f(l, j);
    plans().run(g.v, nt, nx, FFTW_BACKWARD);
    return g;
}

Field2D from_grid(const Grid& g, int L, int J, bool real)
{
    Grid w = g;
    plans().run(w.v, w.nt, w.nx, FFTW_FORWARD);
    const double scale = 1.0 / (static_cast<double>(w.nt) * w.nx);
    const int lm = std::min(L, (w.nt - 1) / 2), jm = std::min(J, (w.nx - 1) / 2);
    Field2D r(L, J, real);
    for (int l = -lm; l <= lm; ++l)
        for (int j = -jm; j <= jm; ++j) r(l, j) = w(wrap(l, w.nt), wrap(j, w.nx)) * scale;
    if (real) r.symmetrize();
    return r;
}

Field2D multiply(const Field2D& f, const Field2D& g)
{
    const int L = std::max(f.L(), g.L()), J = std::max(f.J(), g.J());
    const int nt = fft_size(2 * (2 * L + 1)), nx = fft_size(2 * (2 * J + 1));
    Grid a = to_grid(f, nt, nx);
    const Grid b = to_grid(g, nt, nx);
    for (std::size_t k = 0; k < a.v.size(); ++k) a.v[k] *= b.v[k];
    return from_grid(a, L, J, f.is_real() && g.is_real());
}

ProductResult multiply_report(const Field2D& f, const Field2D& g, int L, int J)
{
    const int Lf = f.L() + g.L(), Jf = f.J() + g.J();
    const int nt = fft_size(2 * Lf + 1), nx = fft_size(2 * Jf + 1);
    Grid a = to_grid(f, nt, nx);
    const Grid b = to_grid(g, nt, nx);
    for (std::size_t k = 0; k < a.v.size(); ++k) a.v[k] *= b.v[k];
    const Field2D full = from_grid(a, Lf, Jf, f.is_real() && g.is_real());
    ProductResult out;
    out.value = full.resized(L, J);
    out.truncation_loss = sobolev_norm(full - out.value.resized(Lf, Jf), 0.0);
    return out;
}

Field2D operator*(const Field2D& f, const Field2D& g) { return multiply(f, g); }

Field2D collocate(const std::vector<const Field2D*>& inputs, const std::function<cd(const cd*)>& fn,
                  int L, int J, bool real_out)
{
    int Lm = L, Jm = J;
    for (const auto* f : inputs) {
        Lm = std::max(Lm, f->L());
        Jm = std::max(Jm, f->J());
    }
    const int nt = fft_size(4 * (2 * Lm + 1)), nx = fft_size(4 * (2 * Jm + 1));
    std::vector<Grid> grids;
    grids.reserve(inputs.size());
    for (const auto* f : inputs) grids.push_back(to_grid(*f, nt, nx));
    Grid out(nt, nx);
    std::vector<cd> vals(inputs.size());
    for (std::size_t k = 0; k < out.v.size(); ++k) {
        for (std::size_t i = 0; i < grids.size(); ++i) vals[i] = grids[i].v[k];
        out.v[k] = fn(vals.data());
    }
    return from_grid(out, L, J, real_out);
}

Field2D collocate(const Field2D& f, const std::function<cd(cd)>& fn)
{
    return collocate({&f}, [&fn](const cd* v) { return fn(v[0]); }, f.L(), f.J(), f.is_real());
}

cd evaluate(const Field2D& f, double t, double x)
{
    cd acc = 0.0;
    for (int l = -f.L(); l <= f.L(); ++l)
        for (int j = -f.J(); j <= f.J(); ++j) {
            const cd c = f(l, j);
            if (c != cd(0.0)) acc += c * std::exp(cd(0.0, l * t + j * x));
        }
    return acc;
}

}  // namespace sww
