#pragma once

// Asymptotic height functions: affine, piecewise affine on a simplex domain,
// and a small registry of closed-form builtins with Lipschitz certificates.

#include "heightlab/error.hpp"
#include "heightlab/mesh.hpp"
#include "heightlab/rational.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace heightlab {

/// x -> s . x + b
struct AffineSpec {
  RationalVector s;
  Rational b{0};
};

/// 1D tent: peak + left * (x - apex) for x <= apex, peak + right * (x - apex) beyond.
struct TentProfile {
  Rational apex;
  Rational peak;
  Rational left{1};
  Rational right{-1};
};

/// min_i x_i + offset
struct MinCoordsProfile {
  int dim = 2;
  Rational offset{0};
};

/// coef * |x|_2^2. radius bounds |x|_inf on the region of use and makes the
/// certificate 2 |coef| radius available.
struct QuadraticProfile {
  int dim = 2;
  Rational coef{1, 4};
  std::optional<Rational> radius;
};

class LipschitzProfile {
 public:
  using PwaPtr = std::shared_ptr<const ExactPiecewiseAffine>;
  using Variant = std::variant<AffineSpec, PwaPtr, TentProfile, MinCoordsProfile, QuadraticProfile>;

  static LipschitzProfile affine(AffineSpec spec) {
    if (spec.s.empty()) throw Error(ErrorKind::UnsupportedProfile, "affine slope must have at least one component");
    for (const auto& c : spec.s)
      if (abs(c) > 1) throw Error(ErrorKind::SlopeOutOfRange, "affine slope component " + to_string(c) + " outside [-1,1]");
    return LipschitzProfile(std::move(spec));
  }

  static LipschitzProfile affine(RationalVector s, Rational b = 0) { return affine(AffineSpec{std::move(s), b}); }

  static LipschitzProfile piecewise(PwaPtr h) {
    if (!h) throw Error(ErrorKind::UnsupportedProfile, "null piecewise profile");
    if (h->lipschitz() > 1) throw Error(ErrorKind::SlopeOutOfRange, "piecewise profile has a gradient component above 1");
    return LipschitzProfile(std::move(h));
  }

  static LipschitzProfile tent(TentProfile t) {
    if (abs(t.left) > 1 || abs(t.right) > 1) throw Error(ErrorKind::SlopeOutOfRange, "tent slopes must lie in [-1,1]");
    return LipschitzProfile(t);
  }

  static LipschitzProfile min_coords(MinCoordsProfile p) {
    if (p.dim < 1) throw Error(ErrorKind::UnsupportedProfile, "dimension must be >= 1");
    return LipschitzProfile(p);
  }

  static LipschitzProfile quadratic(QuadraticProfile p) {
    if (p.dim < 1) throw Error(ErrorKind::UnsupportedProfile, "dimension must be >= 1");
    return LipschitzProfile(std::move(p));
  }

  const Variant& variant() const { return v_; }
  bool is_builtin() const { return v_.index() >= 2; }

  std::string name() const {
    static const char* names[] = {"affine", "pwa", "tent", "min", "quadratic"};
    return names[v_.index()];
  }

  int dim() const {
    return std::visit(
        [](const auto& p) -> int {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, AffineSpec>) return static_cast<int>(p.s.size());
          else if constexpr (std::is_same_v<P, PwaPtr>) return p->dim();
          else if constexpr (std::is_same_v<P, TentProfile>) return 1;
          else return p.dim;
        },
        v_);
  }

  Rational value(std::span<const Rational> x) const {
    return std::visit(
        [&](const auto& p) -> Rational {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, AffineSpec>) {
            return detail::dot(p.s, x) + p.b;
          } else if constexpr (std::is_same_v<P, PwaPtr>) {
            return p->evaluate(x);
          } else if constexpr (std::is_same_v<P, TentProfile>) {
            Rational d = x[0] - p.apex;
            return p.peak + (d <= 0 ? p.left : p.right) * d;
          } else if constexpr (std::is_same_v<P, MinCoordsProfile>) {
            Rational best = x[0];
            for (const auto& c : x) best = std::min(best, c);
            return best + p.offset;
          } else {
            Rational r = 0;
            for (const auto& c : x) r += c * c;
            return p.coef * r;
          }
        },
        v_);
  }

  /// Registered analytic gradient; at kinks the left/lowest-index piece wins.
  std::vector<double> gradient(std::span<const Rational> x) const {
    return std::visit(
        [&](const auto& p) -> std::vector<double> {
          using P = std::decay_t<decltype(p)>;
          std::vector<double> g(x.size(), 0.0);
          if constexpr (std::is_same_v<P, AffineSpec>) {
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = to_double(p.s[i]);
          } else if constexpr (std::is_same_v<P, PwaPtr>) {
            auto s = p->mesh().locate(x);
            if (!s) throw Error(ErrorKind::MeshOutsideDomain, "gradient requested outside the simplex domain");
            auto exact = p->gradient(*s);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = to_double(exact[i]);
          } else if constexpr (std::is_same_v<P, TentProfile>) {
            g[0] = to_double(x[0] <= p.apex ? p.left : p.right);
          } else if constexpr (std::is_same_v<P, MinCoordsProfile>) {
            std::size_t arg = 0;
            for (std::size_t i = 1; i < x.size(); ++i)
              if (x[i] < x[arg]) arg = i;
            g[arg] = 1.0;
          } else {
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * to_double(p.coef * x[i]);
          }
          return g;
        },
        v_);
  }

 private:
  explicit LipschitzProfile(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Exact for affine and piecewise profiles; the declared certificate for builtins.
inline Rational lipschitz_constant(const LipschitzProfile& p) {
  return std::visit(
      [](const auto& q) -> Rational {
        using P = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<P, AffineSpec>) {
          Rational best = 0;
          for (const auto& c : q.s) best = std::max(best, abs(c));
          return best;
        } else if constexpr (std::is_same_v<P, LipschitzProfile::PwaPtr>) {
          return q->lipschitz();
        } else if constexpr (std::is_same_v<P, TentProfile>) {
          return std::max(abs(q.left), abs(q.right));
        } else if constexpr (std::is_same_v<P, MinCoordsProfile>) {
          return Rational(1);
        } else {
          if (!q.radius) throw Error(ErrorKind::UnsupportedProfile, "quadratic profile has no declared radius");
          return Rational(2) * abs(q.coef) * *q.radius;
        }
      },
      p.variant());
}

}  // namespace heightlab
