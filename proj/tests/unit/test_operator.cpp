#include <doctest.h>

#include <cmath>

#include "heatlab/box.hpp"
#include "heatlab/error.hpp"

using namespace heatlab;

namespace {

ComplexField smooth_field(const Grid2D& g) {
  ComplexField f(g);
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      const Vec2 x = g.node(i, j);
      f.at(i, j) = std::exp(-(x.x1 * x.x1 + x.x2 * x.x2)) * std::polar(1.0, 0.7 * x.x1 - 0.3 * x.x2);
    }
  }
  return f;
}

// Largest |a - b| over nodes with |x| <= radius.
double max_diff(const ComplexField& a, const ComplexField& b, double radius) {
  double m = 0.0;
  const auto& g = a.grid;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      const Vec2 x = g.node(i, j);
      if (std::hypot(x.x1, x.x2) <= radius) m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("tau = 0 is minus a quarter of the five-point Laplacian") {
  const Grid2D g(2.0, 33);
  const auto box = assemble_box(model_p1(1), 0.0, g);
  const auto f = smooth_field(g);
  const auto af = apply_box(box, f);
  const double h2 = g.h() * g.h();
  double worst = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      cplx nb{};
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int a = i + di, b = j + dj;
        if (a >= 0 && b >= 0 && a < g.n() && b < g.n()) nb += f.at(a, b);
      }
      const cplx expect = -0.25 * (nb - 4.0 * f.at(i, j)) / h2;
      worst = std::max(worst, std::abs(af.at(i, j) - expect));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("potential of |z|^2") {
  const auto p = model_p1(1);
  for (Vec2 x : {Vec2{0, 0}, Vec2{1, 0.5}, Vec2{-2, 3}}) {
    CHECK(box_potential(p, 1.0, x) == doctest::Approx(1.0 + x.x1 * x.x1 + x.x2 * x.x2));
  }
}

TEST_CASE("assembled operator is Hermitian with nonnegative form") {
  const Grid2D g(2.0, 41);
  const auto box = assemble_box(model_p1(2), 3.0, g);
  const SparseMatrix d = box.action - SparseMatrix(box.action.adjoint());
  CHECK(d.norm() < 1e-12 * box.action.norm());
  const auto f = smooth_field(g);
  const cplx q = inner(apply_box(box, f), f, 0);
  CHECK(q.real() > 0.0);
  CHECK(std::abs(q.imag()) < 1e-10 * q.real());
}

TEST_CASE("link discretization agrees with the real form to second order") {
  const auto p = Polynomial::make({{{2, 2}, 0.5}, {{1, 1}, 1.0}, {{2, 1}, cplx{0.1, 0.2}}, {{1, 2}, cplx{0.1, -0.2}}});
  double err[2];
  int k = 0;
  for (int n : {81, 161}) {
    const Grid2D g(4.0, n);
    const auto f = smooth_field(g);
    const auto box = assemble_box(p, 0.5, g);
    err[k++] = max_diff(apply_box(box, f), apply_real_form(p, 0.5, f), 1.5);
  }
  CAPTURE(err[0]);
  CAPTURE(err[1]);
  CHECK(err[0] / err[1] > 3.5);
}

TEST_CASE("weighted fields") {
  const Grid2D g(2.0, 81);
  const auto p = model_p1(2);
  const double tau = 0.8;

  // Zbar annihilates e^{-tau p} up to the stencil error.
  {
    ComplexField w(g);
    for (int i = 0; i < g.n(); ++i) {
      for (int j = 0; j < g.n(); ++j) w.at(i, j) = std::exp(-tau * p.eval(g.node(i, j)));
    }
    const auto z = apply_field(FieldKind::Zbar, p, tau, w);
    const double coarse = max_diff(z, ComplexField(g), 1.0);
    const Grid2D fine(2.0, 161);
    ComplexField wf(fine);
    for (int i = 0; i < fine.n(); ++i) {
      for (int j = 0; j < fine.n(); ++j) wf.at(i, j) = std::exp(-tau * p.eval(fine.node(i, j)));
    }
    const double refined = max_diff(apply_field(FieldKind::Zbar, p, tau, wf), ComplexField(fine), 1.0);
    CHECK(coarse < 5e-3);
    CHECK(coarse / refined > 3.5);
  }

  // X1 - U1 = 2 i tau p_x2
  {
    const auto f = smooth_field(g);
    const auto x1 = apply_field(FieldKind::X1, p, tau, f);
    const auto u1 = apply_field(FieldKind::U1, p, tau, f);
    double worst = 0.0;
    for (int i = 1; i < g.n() - 1; ++i) {
      for (int j = 1; j < g.n() - 1; ++j) {
        const cplx expect = cplx{0.0, 2.0 * tau * p.gradient(g.node(i, j)).x2} * f.at(i, j);
        worst = std::max(worst, std::abs(x1.at(i, j) - u1.at(i, j) - expect));
      }
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("box = -Zbar Z under refinement") {
  const auto p = model_p1(2);
  const double tau = 0.8;
  double err[2];
  int k = 0;
  for (int n : {81, 161}) {
    const Grid2D g(4.0, n);
    const auto f = smooth_field(g);
    auto zz = apply_field(FieldKind::Zbar, p, tau, apply_field(FieldKind::Z, p, tau, f));
    zz.values = -zz.values;
    err[k++] = max_diff(zz, apply_box(assemble_box(p, tau, g), f), 1.5);
  }
  CAPTURE(err[0]);
  CAPTURE(err[1]);
  CHECK(err[0] / err[1] > 3.0);
}

TEST_CASE("field kind names round trip") {
  for (auto k : {FieldKind::Zbar, FieldKind::Z, FieldKind::X1, FieldKind::X2, FieldKind::U1, FieldKind::U2}) {
    CHECK(parse_field_kind(field_kind_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_field_kind("Y"), Error);
}

TEST_CASE("lowest Landau level" * doctest::timeout(120)) {
  const auto box = assemble_box(model_p1(1), 1.0, Grid2D(8.0, 129));
  const auto e = smallest_eigenvalue(box);
  CHECK(e.value == doctest::Approx(2.0).epsilon(0.025));
}
