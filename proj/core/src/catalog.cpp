#include "orbitherm/catalog.hpp"

#include <cmath>
#include <sstream>

namespace orbitherm {

namespace {

constexpr double kPi = 3.14159265358979323846;

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// Index of the strip [lo_j, hi_j] containing t, or -1.
int strip_index(const std::vector<std::pair<double, double>>& strips, double t,
                double tol = 1e-12) {
  for (size_t j = 0; j < strips.size(); ++j)
    if (t >= strips[j].first - tol && t <= strips[j].second + tol)
      return static_cast<int>(j);
  return -1;
}

int nearest_strip(const std::vector<std::pair<double, double>>& strips, double t) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < strips.size(); ++j) {
    double d = 0.0;
    if (t < strips[j].first) d = strips[j].first - t;
    else if (t > strips[j].second) d = t - strips[j].second;
    if (d < best_d) { best_d = d; best = static_cast<int>(j); }
  }
  return best;
}

}  // namespace

SmoothSystem make_cat_map() {
  SmoothSystem sys;
  sys.name = "cat_map";
  sys.dim = 2;
  sys.chart = Chart::Torus;
  sys.domain = Box::unit(2);
  sys.full_torus = true;

  Mat A(2, 2), Ainv(2, 2);
  A << 2, 1, 1, 1;
  Ainv << 1, -1, -1, 2;

  sys.forward_rule = [A](const Vec& p) -> std::optional<Vec> {
    return torus_normalize(A * p);
  };
  sys.inverse_rule = [Ainv](const Vec& p) -> std::optional<Vec> {
    return torus_normalize(Ainv * p);
  };
  sys.derivative_rule = [A](const Vec&) -> std::optional<Mat> { return A; };
  sys.newton_map = [A](const Vec& p) -> std::optional<std::pair<Vec, Mat>> {
    return std::make_pair(torus_normalize(A * p), A);
  };

  auto model = std::make_shared<SymbolicModel>();
  model->lattice = true;
  model->lattice_matrix << 2, 1, 1, 1;
  // phi^u is the constant -log(lambda_max(A)) on the whole torus.
  sys.symbolic = model;
  return sys;
}

SmoothSystem make_linear_horseshoe(double lambda, double mu, int branches) {
  if (branches < 2 || branches > 8)
    throw std::invalid_argument("linear_horseshoe: branches must be in [2,8]");
  if (!(lambda > branches))
    throw std::invalid_argument("linear_horseshoe: need lambda > branches");
  if (!(mu > 0.0 && branches * mu < 1.0))
    throw std::invalid_argument("linear_horseshoe: need 0 < mu < 1/branches");

  SmoothSystem sys;
  sys.name = "linear_horseshoe";
  sys.params = {{"lambda", lambda}, {"mu", mu}, {"branches", double(branches)}};
  sys.dim = 2;
  sys.chart = Chart::Planar;
  sys.domain = Box::unit(2);

  const int s = branches;
  std::vector<std::pair<double, double>> strips(s);   // y-strips H_j
  std::vector<double> xoff(s);                        // image strip offsets a_j
  for (int j = 0; j < s; ++j) {
    double t = (s == 1) ? 0.0 : j * (1.0 - 1.0 / lambda) / (s - 1);
    strips[j] = {t, t + 1.0 / lambda};
    xoff[j] = (s == 1) ? 0.0 : j * (1.0 - mu) / (s - 1);
  }

  auto branch_forward = [lambda, mu, strips, xoff](int j, const Vec& p) -> Vec {
    Vec q(2);
    bool flip = (j % 2) == 1;  // odd branches orientation-reversing
    q[1] = flip ? lambda * (strips[j].second - p[1]) : lambda * (p[1] - strips[j].first);
    q[0] = flip ? xoff[j] + mu * (1.0 - p[0]) : xoff[j] + mu * p[0];
    return q;
  };
  auto branch_jacobian = [lambda, mu](int j) -> Mat {
    Mat J = Mat::Zero(2, 2);
    double sgn = (j % 2) == 1 ? -1.0 : 1.0;
    J(0, 0) = sgn * mu;
    J(1, 1) = sgn * lambda;
    return J;
  };

  sys.forward_rule = [strips, branch_forward](const Vec& p) -> std::optional<Vec> {
    if (p[0] < -1e-12 || p[0] > 1.0 + 1e-12) return std::nullopt;
    int j = strip_index(strips, p[1]);
    if (j < 0) return std::nullopt;
    return branch_forward(j, p);
  };
  sys.inverse_rule = [lambda, mu, strips, xoff, s](const Vec& p) -> std::optional<Vec> {
    if (p[1] < -1e-12 || p[1] > 1.0 + 1e-12) return std::nullopt;
    for (int j = 0; j < s; ++j) {
      if (p[0] >= xoff[j] - 1e-12 && p[0] <= xoff[j] + mu + 1e-12) {
        Vec q(2);
        bool flip = (j % 2) == 1;
        q[0] = flip ? 1.0 - (p[0] - xoff[j]) / mu : (p[0] - xoff[j]) / mu;
        q[1] = flip ? strips[j].second - p[1] / lambda : strips[j].first + p[1] / lambda;
        return q;
      }
    }
    return std::nullopt;
  };
  sys.derivative_rule = [strips, branch_jacobian](const Vec& p) -> std::optional<Mat> {
    int j = strip_index(strips, p[1]);
    if (j < 0) return std::nullopt;
    return branch_jacobian(j);
  };
  sys.newton_map = [strips, branch_forward, branch_jacobian](
                       const Vec& p) -> std::optional<std::pair<Vec, Mat>> {
    int j = nearest_strip(strips, p[1]);
    return std::make_pair(branch_forward(j, p), branch_jacobian(j));
  };

  auto model = std::make_shared<SymbolicModel>();
  model->symbols = s;
  model->strips = strips;
  model->y_inverse_branch = [lambda, strips](int j, double Y) {
    bool flip = (j % 2) == 1;
    return flip ? strips[j].second - Y / lambda : strips[j].first + Y / lambda;
  };
  model->x_forward = [mu, xoff](int j, double x, double) {
    bool flip = (j % 2) == 1;
    return flip ? xoff[j] + mu * (1.0 - x) : xoff[j] + mu * x;
  };
  model->phiu_symbol_values.assign(s, -std::log(lambda));
  sys.symbolic = model;
  return sys;
}

SmoothSystem make_nonlinear_horseshoe(double lambda, double mu, double gamma,
                                      double eta, double shear) {
  if (!(lambda > 2.0 && gamma > 0.0 && eta > 0.0 && mu > 0.0))
    throw std::invalid_argument("nonlinear_horseshoe: bad parameters");
  const double ystar = (-lambda + std::sqrt(lambda * lambda + 4.0 * gamma)) / (2.0 * gamma);
  const double xmax = mu + eta;
  if (!(2.0 * ystar < 1.0))
    throw std::invalid_argument("nonlinear_horseshoe: strips overlap (lambda too small)");
  if (!(xmax + shear < 0.5))
    throw std::invalid_argument("nonlinear_horseshoe: image strips overlap");

  SmoothSystem sys;
  sys.name = "nonlinear_horseshoe";
  sys.params = {{"lambda", lambda}, {"mu", mu}, {"gamma", gamma},
                {"eta", eta}, {"shear", shear}};
  sys.dim = 2;
  sys.chart = Chart::Planar;
  sys.domain = Box::unit(2);

  auto u = [mu, eta](double x) { return mu * x + eta * x * x; };
  auto du = [mu, eta](double x) { return mu + 2.0 * eta * x; };
  auto uinv = [mu, eta](double X) {
    return (-mu + std::sqrt(mu * mu + 4.0 * eta * X)) / (2.0 * eta);
  };
  auto v0 = [lambda, gamma](double y) { return lambda * y + gamma * y * y; };
  auto dv0 = [lambda, gamma](double y) { return lambda + 2.0 * gamma * y; };
  auto v0inv = [lambda, gamma](double Y) {
    return (-lambda + std::sqrt(lambda * lambda + 4.0 * gamma * Y)) / (2.0 * gamma);
  };

  std::vector<std::pair<double, double>> strips = {{0.0, ystar}, {1.0 - ystar, 1.0}};

  // Branch 0: Y = v0(y), X = u(x) + shear*sin(pi Y).
  // Branch 1: Y = v0(1-y), X = 1 - u(x) - shear*sin(pi Y).
  auto branch_eval = [u, du, v0, dv0, shear](int j, const Vec& p) -> std::pair<Vec, Mat> {
    Vec q(2);
    Mat J = Mat::Zero(2, 2);
    if (j == 0) {
      double Y = v0(p[1]);
      q[1] = Y;
      q[0] = u(p[0]) + shear * std::sin(kPi * Y);
      J(0, 0) = du(p[0]);
      J(1, 1) = dv0(p[1]);
      J(0, 1) = shear * kPi * std::cos(kPi * Y) * J(1, 1);
    } else {
      double Y = v0(1.0 - p[1]);
      q[1] = Y;
      q[0] = 1.0 - u(p[0]) - shear * std::sin(kPi * Y);
      J(1, 1) = -dv0(1.0 - p[1]);
      J(0, 0) = -du(p[0]);
      J(0, 1) = -shear * kPi * std::cos(kPi * Y) * J(1, 1);
    }
    return {q, J};
  };

  sys.forward_rule = [strips, branch_eval](const Vec& p) -> std::optional<Vec> {
    if (p[0] < -1e-12 || p[0] > 1.0 + 1e-12) return std::nullopt;
    int j = strip_index(strips, p[1]);
    if (j < 0) return std::nullopt;
    return branch_eval(j, p).first;
  };
  sys.derivative_rule = [strips, branch_eval](const Vec& p) -> std::optional<Mat> {
    int j = strip_index(strips, p[1]);
    if (j < 0) return std::nullopt;
    return branch_eval(j, p).second;
  };
  sys.inverse_rule = [uinv, v0inv, xmax, shear](const Vec& p) -> std::optional<Vec> {
    if (p[1] < -1e-12 || p[1] > 1.0 + 1e-12) return std::nullopt;
    double Y = std::clamp(p[1], 0.0, 1.0);
    int j = p[0] <= 0.5 ? 0 : 1;
    double Xu = (j == 0 ? p[0] : 1.0 - p[0]) - shear * std::sin(kPi * Y);
    if (Xu < -1e-12 || Xu > xmax + 1e-12) return std::nullopt;
    Vec q(2);
    q[0] = uinv(std::max(Xu, 0.0));
    q[1] = (j == 0) ? v0inv(Y) : 1.0 - v0inv(Y);
    return q;
  };
  sys.newton_map = [strips, branch_eval](const Vec& p)
      -> std::optional<std::pair<Vec, Mat>> {
    int j = p[1] < 0.5 ? 0 : 1;
    (void)strips;
    return branch_eval(j, p);
  };

  auto model = std::make_shared<SymbolicModel>();
  model->symbols = 2;
  model->strips = strips;
  model->y_inverse_branch = [v0inv](int j, double Y) {
    return j == 0 ? v0inv(Y) : 1.0 - v0inv(Y);
  };
  model->x_forward = [u, v0, shear](int j, double x, double y) {
    if (j == 0) return u(x) + shear * std::sin(kPi * v0(y));
    return 1.0 - u(x) - shear * std::sin(kPi * v0(1.0 - y));
  };
  sys.symbolic = model;
  return sys;
}

SmoothSystem make_henon(double a, double b) {
  if (b == 0.0) throw std::invalid_argument("henon: b must be nonzero");
  SmoothSystem sys;
  sys.name = "henon";
  sys.params = {{"a", a}, {"b", b}};
  sys.dim = 2;
  sys.chart = Chart::Planar;
  sys.domain = Box((Vec(2) << -2.0, -0.7).finished(), (Vec(2) << 2.0, 0.7).finished());

  sys.forward_rule = [a, b](const Vec& p) -> std::optional<Vec> {
    if (p.lpNorm<Eigen::Infinity>() > 1e8) return std::nullopt;  // diverged
    Vec q(2);
    q[0] = 1.0 + p[1] - a * p[0] * p[0];
    q[1] = b * p[0];
    return q;
  };
  sys.inverse_rule = [a, b](const Vec& p) -> std::optional<Vec> {
    if (p.lpNorm<Eigen::Infinity>() > 1e8) return std::nullopt;
    Vec q(2);
    q[0] = p[1] / b;
    q[1] = p[0] - 1.0 + a * (p[1] / b) * (p[1] / b);
    return q;
  };
  sys.derivative_rule = [a, b](const Vec& p) -> std::optional<Mat> {
    Mat J(2, 2);
    J << -2.0 * a * p[0], 1.0, b, 0.0;
    return J;
  };
  sys.newton_map = [&, a, b](const Vec& p) -> std::optional<std::pair<Vec, Mat>> {
    if (p.lpNorm<Eigen::Infinity>() > 1e3) return std::nullopt;
    Vec q(2);
    q[0] = 1.0 + p[1] - a * p[0] * p[0];
    q[1] = b * p[0];
    Mat J(2, 2);
    J << -2.0 * a * p[0], 1.0, b, 0.0;
    return std::make_pair(q, J);
  };
  return sys;
}

SmoothSystem make_composite_horseshoe_sink(double lambda, double mu, double rho,
                                           double sink_x, double sink_y,
                                           double sink_radius) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("composite: contraction rho must be in (0,1)");
  SmoothSystem horseshoe = make_linear_horseshoe(lambda, mu, 2);

  Vec sink(2);
  sink << sink_x, sink_y;
  if (sink_x - sink_radius < 1.0 + 0.05)
    throw std::invalid_argument("composite: sink ball must be disjoint from the square");

  SmoothSystem sys;
  sys.name = "example2_composite";
  sys.params = {{"lambda", lambda}, {"mu", mu}, {"rho", rho},
                {"sink_x", sink_x}, {"sink_y", sink_y}, {"sink_radius", sink_radius}};
  sys.dim = 2;
  sys.chart = Chart::Planar;
  double hi_x = std::max(1.0, sink_x + sink_radius + 0.15);
  sys.domain = Box((Vec(2) << 0.0, 0.0).finished(), (Vec(2) << hi_x, 1.0).finished());

  auto in_square = [](const Vec& p) {
    return p[0] >= -1e-12 && p[0] <= 1.0 + 1e-12 && p[1] >= -1e-12 && p[1] <= 1.0 + 1e-12;
  };
  auto hs_forward = horseshoe.forward_rule;
  auto hs_inverse = horseshoe.inverse_rule;
  auto hs_deriv = horseshoe.derivative_rule;
  auto hs_newton = horseshoe.newton_map;

  sys.forward_rule = [=](const Vec& p) -> std::optional<Vec> {
    if (in_square(p)) return hs_forward(p);
    if ((p - sink).norm() <= sink_radius + 1e-12) return Vec(sink + rho * (p - sink));
    return std::nullopt;
  };
  sys.inverse_rule = [=](const Vec& p) -> std::optional<Vec> {
    if (in_square(p)) return hs_inverse(p);
    if ((p - sink).norm() <= rho * sink_radius + 1e-12)
      return Vec(sink + (p - sink) / rho);
    return std::nullopt;
  };
  sys.derivative_rule = [=](const Vec& p) -> std::optional<Mat> {
    if (in_square(p)) return hs_deriv(p);
    if ((p - sink).norm() <= sink_radius + 1e-12) return Mat(rho * Mat::Identity(2, 2));
    return std::nullopt;
  };
  sys.newton_map = [=](const Vec& p) -> std::optional<std::pair<Vec, Mat>> {
    if (p[0] < (1.0 + (sink_x - sink_radius)) / 2.0) return hs_newton(p);
    return std::make_pair(Vec(sink + rho * (p - sink)), Mat(rho * Mat::Identity(2, 2)));
  };

  auto model = std::make_shared<SymbolicModel>(*horseshoe.symbolic);
  model->extra_fixed_points.push_back(sink);
  sys.symbolic = model;
  return sys;
}

SmoothSystem make_rotation_cat_product(double omega) {
  SmoothSystem sys;
  sys.name = "example1_product";
  sys.params = {{"omega", omega}};
  sys.dim = 3;
  sys.chart = Chart::Torus;
  sys.domain = Box::unit(3);
  sys.full_torus = true;

  Mat D = Mat::Identity(3, 3);
  D(1, 1) = 2; D(1, 2) = 1; D(2, 1) = 1; D(2, 2) = 1;
  Mat Dinv = Mat::Identity(3, 3);
  Dinv(1, 1) = 1; Dinv(1, 2) = -1; Dinv(2, 1) = -1; Dinv(2, 2) = 2;

  sys.forward_rule = [omega, D](const Vec& p) -> std::optional<Vec> {
    Vec q(3);
    q[0] = p[0] + omega;
    q[1] = 2.0 * p[1] + p[2];
    q[2] = p[1] + p[2];
    return torus_normalize(q);
  };
  sys.inverse_rule = [omega](const Vec& p) -> std::optional<Vec> {
    Vec q(3);
    q[0] = p[0] - omega;
    q[1] = p[1] - p[2];
    q[2] = -p[1] + 2.0 * p[2];
    return torus_normalize(q);
  };
  sys.derivative_rule = [D](const Vec&) -> std::optional<Mat> { return D; };
  sys.newton_map = [omega, D](const Vec& p) -> std::optional<std::pair<Vec, Mat>> {
    Vec q(3);
    q[0] = p[0] + omega;
    q[1] = 2.0 * p[1] + p[2];
    q[2] = p[1] + p[2];
    return std::make_pair(torus_normalize(q), D);
  };
  return sys;
}

Potential sink_bump_potential(const SmoothSystem& composite, double value) {
  auto sx = composite.params.find("sink_x");
  auto sy = composite.params.find("sink_y");
  auto sr = composite.params.find("sink_radius");
  if (sx == composite.params.end() || sy == composite.params.end() ||
      sr == composite.params.end())
    throw std::invalid_argument("sink_bump_potential: system has no sink");
  Vec sink(2);
  sink << sx->second, sy->second;
  double r = sr->second;
  return {"sink_bump", PotentialKind::Continuous,
          [sink, r, value](const Point& p) {
            double d = (p.x - sink).norm();
            return value * std::max(0.0, 1.0 - d / r);
          }};
}

Potential cylinder_potential(const SmoothSystem& system, std::vector<double> values) {
  if (!system.symbolic || system.symbolic->lattice || system.symbolic->strips.empty())
    throw std::invalid_argument("cylinder_potential: system has no strip symbolic model");
  if (static_cast<int>(values.size()) != system.symbolic->symbols)
    throw std::invalid_argument("cylinder_potential: one value per symbol required");
  auto strips = system.symbolic->strips;
  return {"cylinder", PotentialKind::LocallyConstant,
          [strips, values](const Point& p) {
            int j = strip_index(strips, p.x[1], 1e-9);
            if (j < 0) j = nearest_strip(strips, p.x[1]);
            return values[j];
          }};
}

SmoothSystem make_system(const std::string& name,
                         const std::map<std::string, double>& params) {
  if (name == "cat_map") return make_cat_map();
  if (name == "linear_horseshoe")
    return make_linear_horseshoe(param_or(params, "lambda", 4.0),
                                 param_or(params, "mu", 0.25),
                                 static_cast<int>(param_or(params, "branches", 2.0)));
  if (name == "nonlinear_horseshoe")
    return make_nonlinear_horseshoe(param_or(params, "lambda", 4.0),
                                    param_or(params, "mu", 0.25),
                                    param_or(params, "gamma", 0.5),
                                    param_or(params, "eta", 0.05),
                                    param_or(params, "shear", 0.03));
  if (name == "henon")
    return make_henon(param_or(params, "a", 1.4), param_or(params, "b", 0.3));
  if (name == "example2_composite")
    return make_composite_horseshoe_sink(param_or(params, "lambda", 4.0),
                                         param_or(params, "mu", 0.25),
                                         param_or(params, "rho", 0.5),
                                         param_or(params, "sink_x", 2.5),
                                         param_or(params, "sink_y", 0.5),
                                         param_or(params, "sink_radius", 0.35));
  if (name == "example1_product")
    return make_rotation_cat_product(param_or(params, "omega", 0.6180339887498949));

  std::ostringstream msg;
  msg << "unknown system '" << name << "'; available:";
  for (const auto& n : catalog_names()) msg << " " << n;
  throw std::invalid_argument(msg.str());
}

std::vector<std::string> catalog_names() {
  return {"cat_map", "linear_horseshoe", "nonlinear_horseshoe",
          "henon", "example2_composite", "example1_product"};
}

}  // namespace orbitherm
