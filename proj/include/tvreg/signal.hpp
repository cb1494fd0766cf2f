#pragma once
// Uniform grids on [0,1], sampled signals, and piecewise-defined data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tvreg/errors.hpp"

namespace tvreg {

/// n >= 2 equispaced nodes t_i = i / (n - 1) on [0,1].
class Grid {
public:
    explicit Grid(std::size_t n) : n_(n) {
        if (n < 2) throw InvalidArgument("Grid: need at least two nodes");
        h_ = 1.0 / static_cast<double>(n - 1);
    }

    std::size_t size() const { return n_; }
    std::size_t edges() const { return n_ - 1; }
    double h() const { return h_; }
    double node(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n_ - 1); }
    double midpoint(std::size_t e) const { return (static_cast<double>(e) + 0.5) * h_; }
    /// Trapezoid weight of node i (1/2 at the ends, 1 inside).
    double weight(std::size_t i) const { return (i == 0 || i + 1 == n_) ? 0.5 : 1.0; }

    bool operator==(const Grid& o) const { return n_ == o.n_; }

private:
    std::size_t n_;
    double h_;
};

/// Samples f_i of the data on a grid; 0 <= f_i <= 1.
class Signal {
public:
    Signal(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw GridMismatch("Signal: value count does not match the grid");
        for (double v : values_)
            if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("Signal: values must lie in [0,1]");
    }

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    /// sum |f_{i+1} - f_i|, the discrete stand-in for ||f'||_1.
    double total_variation() const {
        double tv = 0.0;
        for (std::size_t i = 0; i + 1 < values_.size(); ++i) tv += std::abs(values_[i + 1] - values_[i]);
        return tv;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// One smooth piece of a datum. `fn` is the continuous extension of the datum
/// to the closed interval [a, b], so integrators may evaluate it at both ends.
struct DatumPiece {
    double a;
    double b;
    std::function<double(double)> fn;
};

/// Piecewise-continuous data on [0,1]. A point shared by two pieces takes the
/// value of the left piece (the step datum is 0 on [0,1/2], 1 on (1/2,1]).
class Datum {
public:
    enum class Kind { constant, step, triangle, rectangle, noisy, sampled };

    Datum(Kind kind, std::vector<DatumPiece> pieces) : kind_(kind), pieces_(std::move(pieces)) {
        if (pieces_.empty()) throw InvalidArgument("Datum: no pieces");
        if (pieces_.front().a != 0.0 || pieces_.back().b != 1.0)
            throw InvalidArgument("Datum: pieces must cover [0,1]");
        for (std::size_t k = 0; k < pieces_.size(); ++k) {
            if (!(pieces_[k].b > pieces_[k].a)) throw InvalidArgument("Datum: empty piece");
            if (k > 0 && pieces_[k].a != pieces_[k - 1].b)
                throw InvalidArgument("Datum: pieces must be contiguous");
        }
    }

    Kind kind() const { return kind_; }
    const std::vector<DatumPiece>& pieces() const { return pieces_; }

    double operator()(double t) const {
        for (const auto& p : pieces_)
            if (t <= p.b) return p.fn(std::max(t, p.a));
        return pieces_.back().fn(pieces_.back().b);
    }

    /// Interior breakpoints.
    std::vector<double> breakpoints() const {
        std::vector<double> out;
        for (std::size_t k = 1; k < pieces_.size(); ++k) out.push_back(pieces_[k].a);
        return out;
    }

    Signal sample(const Grid& grid) const {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = (*this)(grid.node(i));
        return Signal(grid, std::move(v));
    }

private:
    Kind kind_;
    std::vector<DatumPiece> pieces_;
};

inline Datum constant_datum(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw InvalidArgument("constant datum: value must lie in [0,1]");
    return Datum(Datum::Kind::constant, {{0.0, 1.0, [c](double) { return c; }}});
}

/// 0 on [0, 1/2], 1 on (1/2, 1].
inline Datum step_datum() {
    return Datum(Datum::Kind::step,
                 {{0.0, 0.5, [](double) { return 0.0; }}, {0.5, 1.0, [](double) { return 1.0; }}});
}

/// Hat of the given height centred at `center` with support
/// [center - half_width, center + half_width] (clipped to [0,1]).
inline Datum triangle_datum(double center = 0.5, double half_width = 0.5, double height = 1.0) {
    if (!(center > 0.0 && center < 1.0) || !(half_width > 0.0) || !(height >= 0.0 && height <= 1.0))
        throw InvalidArgument("triangle datum: need 0 < center < 1, half_width > 0, 0 <= height <= 1");
    auto hat = [=](double t) { return height * std::max(0.0, 1.0 - std::abs(t - center) / half_width); };
    std::vector<double> cuts{0.0};
    for (double c : {center - half_width, center, center + half_width})
        if (c > cuts.back() && c < 1.0) cuts.push_back(c);
    cuts.push_back(1.0);
    std::vector<DatumPiece> pieces;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) pieces.push_back({cuts[k], cuts[k + 1], hat});
    return Datum(Datum::Kind::triangle, std::move(pieces));
}

/// `height` on (a, b], 0 elsewhere.
inline Datum rectangle_datum(double a, double b, double height = 1.0) {
    if (!(0.0 < a && a < b && b < 1.0) || !(height >= 0.0 && height <= 1.0))
        throw InvalidArgument("rectangle datum: need 0 < a < b < 1 and 0 <= height <= 1");
    auto zero = [](double) { return 0.0; };
    return Datum(Datum::Kind::rectangle,
                 {{0.0, a, zero}, {a, b, [height](double) { return height; }}, {b, 1.0, zero}});
}

/// `base` plus uniform noise in [-amplitude, amplitude], clamped to [0,1].
/// The noise is piecewise constant on `cells` equal cells so that the datum is
/// a fixed function of t, independent of the grid it is later sampled on.
inline Datum noisy_datum(const Datum& base, double amplitude, std::uint64_t seed, std::size_t cells = 32) {
    if (!(amplitude >= 0.0 && amplitude <= 1.0) || cells == 0)
        throw InvalidArgument("noisy datum: need 0 <= amplitude <= 1 and cells >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> noise(cells);
    for (auto& x : noise) {
        const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x = amplitude * (2.0 * u01 - 1.0);
    }
    std::vector<double> cuts;
    for (std::size_t c = 0; c <= cells; ++c) cuts.push_back(static_cast<double>(c) / static_cast<double>(cells));
    for (double bp : base.breakpoints()) cuts.push_back(bp);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<DatumPiece> pieces;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        const double mid = 0.5 * (a + b);
        const auto cell = std::min<std::size_t>(cells - 1, static_cast<std::size_t>(mid * static_cast<double>(cells)));
        const double eta = noise[cell];
        // base piece containing (a, b)
        const DatumPiece* bp = nullptr;
        for (const auto& p : base.pieces())
            if (mid > p.a && mid < p.b) bp = &p;
        auto fn = bp->fn;
        pieces.push_back({a, b, [fn, eta](double t) { return std::clamp(fn(t) + eta, 0.0, 1.0); }});
    }
    return Datum(Datum::Kind::noisy, std::move(pieces));
}

/// Piecewise-linear interpolant of grid samples.
inline Datum sampled_datum(const Signal& f) {
    std::vector<DatumPiece> pieces;
    const Grid& g = f.grid();
    for (std::size_t e = 0; e < g.edges(); ++e) {
        const double a = g.node(e);
        const double b = g.node(e + 1);
        const double fa = f[e];
        const double fb = f[e + 1];
        pieces.push_back({a, b, [=](double t) { return fa + (fb - fa) * (t - a) / (b - a); }});
    }
    return Datum(Datum::Kind::sampled, std::move(pieces));
}

} // namespace tvreg
