#include "sliphom/loads.hpp"

#include <cmath>
#include <stdexcept>

namespace sliphom {

namespace {

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// integral of x^k over (-1,1)
double moment1(int k) { return (k % 2 == 1) ? 0.0 : 2.0 / (k + 1); }

void check_exponent(int e) {
  if (e < 0 || e > 12) throw std::invalid_argument("LoadField: exponent out of range [0,12]");
}

}  // namespace

LoadField LoadField::affine(const Mat2& A, Vec2 b) {
  LoadField f;
  f.kind_ = Kind::affine;
  f.A_ = A;
  f.b_ = b;
  return f;
}

LoadField LoadField::polynomial(std::vector<Term> terms) {
  LoadField f;
  f.kind_ = Kind::polynomial;
  for (const Term& t : terms) {
    check_exponent(t.p);
    check_exponent(t.q);
    check_exponent(t.r);
    check_exponent(t.s);
  }
  f.terms_ = std::move(terms);
  return f;
}

LoadField LoadField::sampled(const Grid2D& grid, std::vector<Vec2> values) {
  if (static_cast<int>(values.size()) != grid.n_gauss()) {
    throw std::invalid_argument("LoadField::sampled: value count does not match grid");
  }
  LoadField f;
  f.kind_ = Kind::sampled;
  f.sampled_ = std::make_shared<Sampled>(Sampled{grid, std::move(values)});
  return f;
}

LoadField LoadField::sampled_on(const Grid2D& grid) const {
  if (is_sampled()) throw std::invalid_argument("LoadField::sampled_on: field already sampled");
  std::vector<Vec2> vals(grid.n_gauss());
  for (int cx = 0; cx < grid.nx(); ++cx)
    for (int cy = 0; cy < grid.ny(); ++cy)
      for (int gx = 0; gx < 2; ++gx)
        for (int gy = 0; gy < 2; ++gy)
          vals[grid.gauss_index(cx, cy, gx, gy)] = eval(grid.gauss_point(cx, cy, gx, gy));
  return sampled(grid, std::move(vals));
}

const LoadField::Sampled& LoadField::samples() const {
  if (!sampled_) throw std::logic_error("LoadField: not a sampled field");
  return *sampled_;
}

Vec2 LoadField::eval(Vec2 x) const {
  switch (kind_) {
    case Kind::affine:
      return A_ * x + b_;
    case Kind::polynomial: {
      Vec2 v{0.0, 0.0};
      for (const Term& t : terms_) {
        v += t.a * Vec2{pow_int(x.x, t.p) * pow_int(x.y, t.q),
                        pow_int(x.x, t.r) * pow_int(x.y, t.s)};
      }
      return v;
    }
    case Kind::sampled:
      throw std::invalid_argument("LoadField: sampled fields evaluate only at their Gauss points");
  }
  return {};
}

Vec2 LoadField::eval_gauss(const Grid2D& grid, int cx, int cy, int gx, int gy) const {
  if (is_sampled()) {
    const Sampled& s = samples();
    if (s.grid.nx() != grid.nx() || s.grid.ny() != grid.ny()) {
      throw std::invalid_argument("LoadField: sampled-field grid mismatch");
    }
    return s.values[grid.gauss_index(cx, cy, gx, gy)];
  }
  return eval(grid.gauss_point(cx, cy, gx, gy));
}

LoadField LoadField::lin_comb(double a, const LoadField& f, double b, const LoadField& g) {
  if (f.kind_ != g.kind_) {
    // Affine fields are polynomials; promote when mixing the two.
    auto as_terms = [](const LoadField& h) -> std::vector<Term> {
      if (h.kind_ == Kind::affine) {
        return {Term{{h.A_.a11, 0, h.A_.a21, 0}, 1, 0, 1, 0},
                Term{{h.A_.a12, 0, h.A_.a22, 0}, 0, 1, 0, 1},
                Term{{h.b_.x, 0, h.b_.y, 0}, 0, 0, 0, 0}};
      }
      if (h.kind_ == Kind::polynomial) return h.terms_;
      throw std::invalid_argument("LoadField::lin_comb: incompatible kinds");
    };
    std::vector<Term> terms;
    for (Term t : as_terms(f)) {
      t.a = a * t.a;
      terms.push_back(t);
    }
    for (Term t : as_terms(g)) {
      t.a = b * t.a;
      terms.push_back(t);
    }
    return polynomial(std::move(terms));
  }
  switch (f.kind_) {
    case Kind::affine:
      return affine(a * f.A_ + b * g.A_, a * f.b_ + b * g.b_);
    case Kind::polynomial: {
      std::vector<Term> terms;
      terms.reserve(f.terms_.size() + g.terms_.size());
      for (Term t : f.terms_) {
        t.a = a * t.a;
        terms.push_back(t);
      }
      for (Term t : g.terms_) {
        t.a = b * t.a;
        terms.push_back(t);
      }
      return polynomial(std::move(terms));
    }
    case Kind::sampled: {
      const Sampled& sf = f.samples();
      const Sampled& sg = g.samples();
      if (sf.grid.nx() != sg.grid.nx() || sf.grid.ny() != sg.grid.ny()) {
        throw std::invalid_argument("LoadField::lin_comb: sampled grids differ");
      }
      std::vector<Vec2> vals(sf.values.size());
      for (size_t i = 0; i < vals.size(); ++i) vals[i] = a * sf.values[i] + b * sg.values[i];
      return sampled(sf.grid, std::move(vals));
    }
  }
  throw std::logic_error("LoadField::lin_comb: unreachable");
}

Vec2 marginal_x1_at(const LoadField& g, double x2) {
  switch (g.kind()) {
    case LoadField::Kind::affine:
      // integral over x1 of A x + b is 2 x2 A e2 + 2 b.
      return 2.0 * x2 * g.A().col(1) + 2.0 * g.b();
    case LoadField::Kind::polynomial: {
      Vec2 v{0.0, 0.0};
      for (const auto& t : g.terms()) {
        v += t.a * Vec2{moment1(t.p) * pow_int(x2, t.q), moment1(t.r) * pow_int(x2, t.s)};
      }
      return v;
    }
    case LoadField::Kind::sampled:
      throw std::invalid_argument("marginal_x1_at: sampled fields have no pointwise marginal");
  }
  return {};
}

Marginal marginal_x1(const LoadField& g, const Grid1D& grid) {
  Marginal m{grid, std::vector<Vec2>(2 * static_cast<size_t>(grid.n()))};
  if (g.is_sampled()) {
    const auto& s = g.samples();
    if (s.grid.ny() != grid.n()) {
      throw std::invalid_argument("marginal_x1: sampled grid does not match the x2 grid");
    }
    // Gauss sum over the x1 cells at each x2 Gauss line.
    const double wx = 0.5 * s.grid.hx();
    for (int cy = 0; cy < grid.n(); ++cy) {
      for (int gy = 0; gy < 2; ++gy) {
        Vec2 acc{0.0, 0.0};
        for (int cx = 0; cx < s.grid.nx(); ++cx)
          for (int gx = 0; gx < 2; ++gx)
            acc += wx * s.values[s.grid.gauss_index(cx, cy, gx, gy)];
        m.at_gauss[2 * cy + gy] = acc;
      }
    }
    return m;
  }
  for (int i = 0; i < grid.n(); ++i)
    for (int w = 0; w < 2; ++w) m.at_gauss[2 * i + w] = marginal_x1_at(g, grid.gauss(i, w));
  return m;
}

Vec2 hat_g(const LoadField& g, const Grid2D& grid) {
  Vec2 acc{0.0, 0.0};
  const double w = grid.weight();
  for (int cx = 0; cx < grid.nx(); ++cx)
    for (int cy = 0; cy < grid.ny(); ++cy)
      for (int gx = 0; gx < 2; ++gx)
        for (int gy = 0; gy < 2; ++gy) {
          const Vec2 x = grid.gauss_point(cx, cy, gx, gy);
          const Vec2 gv = g.eval_gauss(grid, cx, cy, gx, gy);
          acc += w * (x.x * gv - x.y * gv.perp());
        }
  return acc;
}

namespace {

// integral over (-1,1) of Gamma(x2) m(x2) dx2 by per-cell two-point Gauss.
Vec2 profile_marginal_integral(const ShearProfile& profile, const Marginal& m) {
  const Grid1D& grid = profile.grid();
  const double w = 0.5 * grid.h();
  Vec2 acc{0.0, 0.0};
  for (int i = 0; i < grid.n(); ++i) {
    for (int which = 0; which < 2; ++which) {
      const double x2 = grid.gauss(i, which);
      const double G = profile.node_value(i) + (x2 - grid.node(i)) * profile.gamma(i);
      acc += (w * G) * m.gauss(i, which);
    }
  }
  return acc;
}

}  // namespace

Vec2 lambda_vec(const LoadField& g, const ShearProfile& profile, const Grid2D& hatg_grid) {
  if (std::abs(profile.mean()) > 1e-10) {
    throw std::invalid_argument("lambda_vec: profile mean exceeds 1e-10");
  }
  const Marginal m = marginal_x1(g, profile.grid());
  return hat_g(g, hatg_grid) + profile_marginal_integral(profile, m);
}

double work_direct(const LoadField& g, const DeformationState& q, const Grid2D& grid) {
  double acc = 0.0;
  const double w = grid.weight();
  for (int cx = 0; cx < grid.nx(); ++cx)
    for (int cy = 0; cy < grid.ny(); ++cy)
      for (int gx = 0; gx < 2; ++gx)
        for (int gy = 0; gy < 2; ++gy) {
          const Vec2 x = grid.gauss_point(cx, cy, gx, gy);
          const Vec2 gv = g.eval_gauss(grid, cx, cy, gx, gy);
          acc += w * gv.dot(q.displace(x));
        }
  return acc;
}

Vec2 LambdaMap::value(std::span<const double> gamma) const {
  Vec2 v = g_hat;
  for (size_t i = 0; i < coeff.size(); ++i) v += gamma[i] * coeff[i];
  return v;
}

std::vector<Vec2> lambda_coefficients(const LoadField& g, const Grid1D& grid) {
  const Marginal m = marginal_x1(g, grid);
  // The profile construction (cumulative sum + zero-mean shift) is linear in
  // gamma; apply it to unit vectors to obtain the coefficients.
  std::vector<Vec2> coeff(grid.n());
  std::vector<double> unit(grid.n(), 0.0);
  for (int j = 0; j < grid.n(); ++j) {
    unit[j] = 1.0;
    coeff[j] = profile_marginal_integral(ShearProfile(grid, unit), m);
    unit[j] = 0.0;
  }
  return coeff;
}

LambdaMap assemble_lambda_map(const LoadField& g, const Grid1D& grid, const Grid2D& hatg_grid) {
  return {hat_g(g, hatg_grid), lambda_coefficients(g, grid)};
}

LoadPath LoadPath::constant(const LoadField& g, double T) {
  return table({0.0, T}, {g, g});
}

LoadPath LoadPath::table(std::vector<double> knots, std::vector<LoadField> fields) {
  if (knots.size() < 2 || knots.size() != fields.size()) {
    throw std::invalid_argument("LoadPath: need >= 2 knots with one field each");
  }
  if (knots.front() != 0.0) throw std::invalid_argument("LoadPath: first knot must be t = 0");
  for (size_t i = 1; i < knots.size(); ++i) {
    if (knots[i] <= knots[i - 1]) {
      throw std::invalid_argument("LoadPath: knots must be strictly increasing");
    }
  }
  LoadPath p;
  p.knots_ = std::move(knots);
  p.fields_ = std::move(fields);
  return p;
}

LoadField LoadPath::at(double t) const {
  if (t <= knots_.front()) return fields_.front();
  if (t >= knots_.back()) return fields_.back();
  size_t i = 1;
  while (knots_[i] < t) ++i;
  const double s = (t - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
  return LoadField::lin_comb(1.0 - s, fields_[i - 1], s, fields_[i]);
}

LoadField LoadPath::delta(double t0, double t1) const {
  return LoadField::lin_comb(1.0, at(t1), -1.0, at(t0));
}

LoadPath LoadPath::lin_comb(double a, const LoadPath& f, double b, const LoadPath& g) {
  if (f.T() != g.T()) throw std::invalid_argument("LoadPath::lin_comb: horizons differ");
  // Piecewise linearity is preserved on the union of the knot tables.
  std::vector<double> knots = f.knots_;
  knots.insert(knots.end(), g.knots_.begin(), g.knots_.end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<LoadField> fields;
  fields.reserve(knots.size());
  for (double t : knots) fields.push_back(LoadField::lin_comb(a, f.at(t), b, g.at(t)));
  return table(std::move(knots), std::move(fields));
}

}  // namespace sliphom
