#include "qstomo/quadprop.hpp"

#include <algorithm>
#include <cmath>

#include "qstomo/errors.hpp"

namespace qstomo {

QuadFactorization QuadFactorization::adjoint() const {
  QuadFactorization a;
  a.t = t;
  a.branch = branch;
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) a.factors.push_back({it->kind, -it->value});
  return a;
}

Mat2 factor_matrix(const Factor& f) {
  Mat2 m = Mat2::Identity();
  switch (f.kind) {
    case FactorKind::chirp:
      m(1, 0) = f.value;
      break;
    case FactorKind::dilate:
      m(0, 0) = std::exp(-f.value);
      m(1, 1) = std::exp(f.value);
      break;
    case FactorKind::free:
      m(0, 1) = f.value;
      break;
    case FactorKind::const_phase:
      break;
  }
  return m;
}

Mat2 QuadFactorization::symplectic() const {
  Mat2 m = Mat2::Identity();
  for (const auto& f : factors) m = m * factor_matrix(f);
  return m;
}

double QuadFactorization::total_phase() const {
  double s = 0.0;
  for (const auto& f : factors)
    if (f.kind == FactorKind::const_phase) s += f.value;
  return s;
}

QuadFactorization compose(const QuadFactorization& outer, const QuadFactorization& inner) {
  QuadFactorization c;
  c.t = outer.t;
  c.branch = Branch::composite;
  c.factors = outer.factors;
  c.factors.insert(c.factors.end(), inner.factors.begin(), inner.factors.end());
  return c;
}

WaveFunction apply(const QuadFactorization& fac, const WaveFunction& psi) {
  WaveFunction out = psi;
  for (auto it = fac.factors.rbegin(); it != fac.factors.rend(); ++it) {
    switch (it->kind) {
      case FactorKind::chirp:
        out = chirp_multiply(out, it->value);
        break;
      case FactorKind::dilate:
        out = dilate(out, it->value);
        break;
      case FactorKind::free:
        out = free_step(out, it->value);
        break;
      case FactorKind::const_phase:
        out.frame.phase += it->value;
        break;
    }
  }
  return out;
}

MehlerParameters mehler_parameters(double t, const ModelParams& p) {
  const double w = p.omega;
  const double th = std::tanh(w * t);
  // The unimodular constants of the two dilation normalizations cancel on the principal branch.
  return {w * th, -std::log(std::cosh(w * t)), th / w, 0.0};
}

QuadFactorization mehler_any(double t, const ModelParams& p) {
  QuadFactorization f;
  f.t = t;
  f.branch = Branch::mehler;
  if (t == 0.0) return f;
  const auto m = mehler_parameters(t, p);
  f.factors = {{FactorKind::const_phase, m.const_phase},
               {FactorKind::chirp, m.chirp},
               {FactorKind::dilate, m.dilate},
               {FactorKind::free, m.free}};
  return f;
}

QuadFactorization mehler_factorization(double t, const ModelParams& p) {
  if (std::abs(t) > 1.0) throw DomainError("mehler_factorization: requires |t| <= 1");
  return mehler_any(t, p);
}

namespace {

// U0,lambda formula, also evaluated at the endpoint |t| = 1 as a one-sided limit.
QuadFactorization u0_lambda_formula(double t, const ModelParams& p) {
  const double l = p.lambda, a = std::abs(t);
  QuadFactorization f;
  f.t = t;
  f.branch = t > 0 ? Branch::lambda_plus : Branch::lambda_minus;
  const double sgn = t > 0 ? 1.0 : -1.0;
  f.factors = {{FactorKind::chirp, -(l - 1.0) / t},
               {FactorKind::dilate, (l - 1.0) * std::log(a)},
               {FactorKind::free, sgn * std::pow(a, 2.0 * l - 1.0) / (2.0 * l - 1.0)}};
  return f;
}

}  // namespace

QuadFactorization u0_lambda_factorization(double t, const ModelParams& p) {
  if (!(std::abs(t) > 1.0)) throw DomainError("u0_lambda_factorization: requires |t| > 1");
  return u0_lambda_formula(t, p);
}

QuadFactorization u0_two_time_factorization(double s, double t, const ModelParams& p) {
  QuadFactorization f;
  f.t = t;
  f.branch = Branch::composite;
  if (s == t) return f;
  if (std::abs(s) <= 1.0 && std::abs(t) <= 1.0) {
    auto m = mehler_any(t - s, p);
    m.t = t;
    return m;
  }
  const bool plus = s >= 1.0 && t >= 1.0;
  const bool minus = s <= -1.0 && t <= -1.0;
  if (!plus && !minus) throw DomainError("u0_two_time: s and t lie in different branches");
  return compose(u0_lambda_formula(t, p), u0_lambda_formula(s, p).adjoint());
}

WaveFunction u0_two_time(const WaveFunction& psi, double s, double t, const ModelParams& p) {
  return apply(u0_two_time_factorization(s, t, p), psi);
}

QuadFactorization comparison_factorization(double t, const ModelParams& p, Comparison mode) {
  if (std::abs(t) <= 1.0) return mehler_factorization(t, p);
  if (mode == Comparison::lambda_literal) return u0_lambda_factorization(t, p);
  const double edge = t > 0 ? 1.0 : -1.0;
  auto c = compose(u0_two_time_factorization(edge, t, p), mehler_factorization(edge, p));
  c.t = t;
  return c;
}

std::pair<double, double> heisenberg_p_coefficients(double t, const ModelParams& p) {
  if (std::abs(t) > 1.0) throw DomainError("heisenberg_p_coefficients: requires |t| <= 1");
  const double w = p.omega;
  return {w * std::sinh(w * t), std::cosh(w * t)};
}

std::pair<double, double> lambda_conjugated_p_coefficients(double t, const ModelParams& p) {
  if (!(std::abs(t) > 1.0)) throw DomainError("lambda_conjugated_p_coefficients: requires |t| > 1");
  const double l = p.lambda, a = std::abs(t);
  const double g = std::pow(a, 1.0 - l);
  return {(l - 1.0) / t * g, g};
}

namespace {

const char* kind_name(FactorKind k) {
  switch (k) {
    case FactorKind::chirp:
      return "chirp";
    case FactorKind::dilate:
      return "dilate";
    case FactorKind::free:
      return "free";
    case FactorKind::const_phase:
      return "const_phase";
  }
  return "?";
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::mehler:
      return "mehler";
    case Branch::lambda_plus:
      return "lambda_plus";
    case Branch::lambda_minus:
      return "lambda_minus";
    case Branch::composite:
      return "composite";
  }
  return "?";
}

}  // namespace

nlohmann::json to_json(const QuadFactorization& f) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& x : f.factors) arr.push_back({{"kind", kind_name(x.kind)}, {"value", x.value}});
  return {{"factors", arr}, {"t", f.t}, {"branch", branch_name(f.branch)}};
}

QuadFactorization factorization_from_json(const nlohmann::json& j) {
  QuadFactorization f;
  try {
    f.t = j.at("t").get<double>();
    const auto b = j.at("branch").get<std::string>();
    if (b == "mehler")
      f.branch = Branch::mehler;
    else if (b == "lambda_plus")
      f.branch = Branch::lambda_plus;
    else if (b == "lambda_minus")
      f.branch = Branch::lambda_minus;
    else if (b == "composite")
      f.branch = Branch::composite;
    else
      throw ConfigError("factorization: unknown branch " + b);
    for (const auto& e : j.at("factors")) {
      const auto k = e.at("kind").get<std::string>();
      FactorKind kind;
      if (k == "chirp")
        kind = FactorKind::chirp;
      else if (k == "dilate")
        kind = FactorKind::dilate;
      else if (k == "free")
        kind = FactorKind::free;
      else if (k == "const_phase")
        kind = FactorKind::const_phase;
      else
        throw ConfigError("factorization: unknown factor " + k);
      f.factors.push_back({kind, e.at("value").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("factorization: ") + e.what());
  }
  return f;
}

}  // namespace qstomo
