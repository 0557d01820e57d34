#include "proxent/moment_problem.hpp"

#include <cmath>
#include <sstream>

#include "proxent/kernels.hpp"

namespace proxent::moment {

double Generator::operator()(double s) const {
  if (kind == Kind::Custom) return custom(s);
  return base_shift + 0.5 * std::sin(3.0 * 3.14159265358979323846 * s * s);
}

Generator Generator::shifted_down(double delta) const {
  Generator g = *this;
  if (kind == Kind::BuiltinSin) {
    g.base_shift -= delta;
  } else {
    auto f = custom;
    g.custom = [f, delta](double s) { return f(s) - delta; };
  }
  return g;
}

Eigen::VectorXd data_vector(const Generator& gen, int n,
                            const quadrature::QuadratureRule& rule) {
  Eigen::VectorXd b(n);
  for (int k = 1; k <= n; ++k) {
    b(k - 1) = rule.integrate(
        [&](double s) { return std::pow(s, k - 1) * gen(s); });
  }
  return b;
}

MomentProblem::MomentProblem(Generator gen, averages::AverageSpec average,
                             int n_moments, quadrature::QuadratureRule rule)
    : gen_(std::move(gen)),
      avg_(average),
      n_(n_moments),
      rule_(std::move(rule)) {
  if (n_ < 1) throw std::invalid_argument("MomentProblem: n_moments >= 1");
  avg_.validate();

  const auto s = rule_.nodes();
  const int m = rule_.order();
  basis_.resize(m, n_);
  weights_.resize(m);
  for (int i = 0; i < m; ++i) {
    weights_(i) = rule_.weights()[i];
    double p = 1.0;
    for (int k = 0; k < n_; ++k) {
      basis_(i, k) = p;  // monomials by iterated multiplication
      p *= s[i];
    }
  }
  b_ = data_vector(gen_, n_, rule_);
}

double MomentProblem::constraint_function(int k, double s) const {
  if (k < 1 || k > n_) {
    throw std::out_of_range("constraint_function: k must lie in 1..n");
  }
  double p = 1.0;
  for (int j = 1; j < k; ++j) p *= s;
  return p;
}

Eigen::VectorXd MomentProblem::inner_products(
    const Eigen::VectorXd& mu) const {
  if (mu.size() != n_) {
    throw std::invalid_argument("multiplier vector has wrong length");
  }
  return basis_ * mu;
}

Eigen::VectorXd MomentProblem::dual_residual(const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd u = inner_products(mu);
  Eigen::VectorXd x(u.size());
  kernels::fstar_prime_batch(avg_, {u.data(), (size_t)u.size()},
                             {x.data(), (size_t)x.size()});
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i))) throw DivergedEvaluation(i, u(i), mu);
  }
  return basis_.transpose() * weights_.cwiseProduct(x) - b_;
}

Eigen::MatrixXd MomentProblem::dual_jacobian(const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd u = inner_products(mu);
  Eigen::VectorXd d(u.size());
  kernels::fstar_second_batch(avg_, {u.data(), (size_t)u.size()},
                              {d.data(), (size_t)d.size()});
  for (int i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d(i))) throw DivergedEvaluation(i, u(i), mu);
  }
  return basis_.transpose() *
         weights_.cwiseProduct(d).asDiagonal() * basis_;
}

double MomentProblem::primal_solution(const Eigen::VectorXd& mu,
                                      double s) const {
  double u = 0.0, p = 1.0;
  for (int k = 0; k < n_; ++k) {
    u += mu(k) * p;
    p *= s;
  }
  return averages::fstar_prime(avg_, u);
}

void MomentProblem::primal_curve(const Eigen::VectorXd& mu,
                                 std::span<const double> s,
                                 std::span<double> out) const {
  if (s.size() != out.size()) {
    throw std::invalid_argument("primal_curve: span size mismatch");
  }
  std::vector<double> u(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    double acc = 0.0, p = 1.0;
    for (int k = 0; k < n_; ++k) {
      acc += mu(k) * p;
      p *= s[i];
    }
    u[i] = acc;
  }
  kernels::fstar_prime_batch(avg_, u, out);
}

MomentProblem::SosObjective MomentProblem::sos_objective(
    const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd r = dual_residual(mu);
  const Eigen::MatrixXd j = dual_jacobian(mu);
  return {r.squaredNorm(), 2.0 * j.transpose() * r};
}

ProblemConfig ProblemConfig::from_key_values(
    const std::map<std::string, std::string>& kv) {
  ProblemConfig cfg;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("generator")) {
    if (*v != "sin" && *v != "builtin") {
      throw std::invalid_argument(
          "generator: only the builtin sin family is deserializable");
    }
  }
  if (auto* v = get("shift")) cfg.shift = std::stod(*v);
  if (auto* v = get("moments")) cfg.moments = std::stoi(*v);
  if (auto* v = get("quad")) cfg.quad = std::stoi(*v);
  if (auto* v = get("family")) {
    if (*v == "weighted") {
      cfg.average.family = averages::Family::Weighted;
    } else if (*v == "proximal") {
      cfg.average.family = averages::Family::Proximal;
    } else {
      throw std::invalid_argument("family must be weighted or proximal");
    }
  }
  if (auto* v = get("param")) cfg.average.parameter = std::stod(*v);
  if (auto* v = get("limiting")) {
    cfg.average.endpoint_mode = (*v == "1" || *v == "true")
                                    ? averages::EndpointMode::Limiting
                                    : averages::EndpointMode::Exact;
  }
  cfg.average.validate();
  return cfg;
}

std::map<std::string, std::string> flat_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

ProblemConfig ProblemConfig::from_stream(std::istream& in) {
  return from_key_values(flat_key_values(in));
}

MomentProblem make_problem(const ProblemConfig& cfg) {
  Generator gen;
  gen.base_shift = cfg.shift;
  return MomentProblem(gen, cfg.average, cfg.moments,
                       quadrature::QuadratureRule::gauss_legendre(cfg.quad));
}

}  // namespace proxent::moment
