// Pair u = (eta, psi) of surface elevation and surface potential.
#pragma once

#include "sww/field.hpp"

#include <cmath>

namespace sww {

struct StatePair {
    Field2D eta;
    Field2D psi;

    StatePair() = default;
    StatePair(Field2D e, Field2D p) : eta(std::move(e)), psi(std::move(p)) {}
    static StatePair zeros(int L, int J) { return {Field2D(L, J), Field2D(L, J)}; }

    StatePair& operator+=(const StatePair& o)
    {
        eta += o.eta;
        psi += o.psi;
        return *this;
    }
    StatePair& operator-=(const StatePair& o)
    {
        eta -= o.eta;
        psi -= o.psi;
        return *this;
    }
    StatePair& operator*=(cd s)
    {
        eta *= s;
        psi *= s;
        return *this;
    }
    StatePair& operator*=(double s)
    {
        eta *= s;
        psi *= s;
        return *this;
    }
    StatePair resized(int L, int J) const { return {eta.resized(L, J), psi.resized(L, J)}; }
    StatePair re() const { return {eta.re(), psi.re()}; }
    StatePair im() const { return {eta.im(), psi.im()}; }
    double max_abs() const { return std::max(eta.max_abs(), psi.max_abs()); }
};

inline StatePair operator+(StatePair a, const StatePair& b) { return a += b; }
inline StatePair operator-(StatePair a, const StatePair& b) { return a -= b; }
inline StatePair operator*(StatePair a, double s) { return a *= s; }
inline StatePair operator*(double s, StatePair a) { return a *= s; }
inline StatePair operator*(StatePair a, cd s) { return a *= s; }
inline StatePair operator*(cd s, StatePair a) { return a *= s; }

// (||eta||_s^2 + ||psi||_s^2)^{1/2}
inline double norm(const StatePair& u, double s)
{
    return std::hypot(sobolev_norm(u.eta, s), sobolev_norm(u.psi, s));
}

inline StatePair truncate(const StatePair& u, int N) { return {truncate(u.eta, N), truncate(u.psi, N)}; }

}  // namespace sww
