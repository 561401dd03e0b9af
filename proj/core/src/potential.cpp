#include "qstomo/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qstomo/errors.hpp"

namespace qstomo {

PotentialSpec PotentialSpec::translated(const Vec2& d) const {
  PotentialSpec out = *this;
  for (auto& t : out.regular) t.center += d;
  for (auto& t : out.singular) t.center += d;
  return out;
}

PotentialSpec PotentialSpec::regular_part() const {
  PotentialSpec out;
  out.regular = regular;
  return out;
}

double eval_term(const RegularTerm& t, const Vec2& x) {
  const Vec2 d = x - t.center;
  const double r2 = d.squaredNorm();
  if (t.kind == RegularKind::gaussian) return t.amplitude * std::exp(-r2 / (2.0 * t.shape * t.shape));
  return t.amplitude * std::pow(1.0 + r2, -0.5 * t.shape);
}

Vec2 grad_term(const RegularTerm& t, const Vec2& x) {
  const Vec2 d = x - t.center;
  const double r2 = d.squaredNorm();
  if (t.kind == RegularKind::gaussian) {
    const double w2 = t.shape * t.shape;
    return (-t.amplitude / w2 * std::exp(-r2 / (2.0 * w2))) * d;
  }
  return (-t.amplitude * t.shape * std::pow(1.0 + r2, -0.5 * t.shape - 1.0)) * d;
}

double eval_term(const SingularTerm& t, const Vec2& x) {
  const Vec2 d = x - t.center;
  const double r2 = d.squaredNorm();
  const double R2 = t.cutoff_radius * t.cutoff_radius;
  if (r2 >= R2) return 0.0;
  const double s2 = r2 / R2;
  const double chi = std::exp(1.0 - 1.0 / (1.0 - s2));
  return t.amplitude * chi / std::sqrt(r2 + t.mollifier_eps * t.mollifier_eps);
}

Vec2 grad_term(const SingularTerm& t, const Vec2& x) {
  const Vec2 d = x - t.center;
  const double r2 = d.squaredNorm();
  const double R2 = t.cutoff_radius * t.cutoff_radius;
  if (r2 >= R2) return Vec2::Zero();
  const double s2 = r2 / R2;
  const double chi = std::exp(1.0 - 1.0 / (1.0 - s2));
  const double q = r2 + t.mollifier_eps * t.mollifier_eps;
  const double inv = 1.0 / std::sqrt(q);
  // d/dr of the product, divided by r so it multiplies the displacement.
  const double g = -inv / q * chi - inv * chi * 2.0 / (R2 * (1.0 - s2) * (1.0 - s2));
  return (t.amplitude * g) * d;
}

double eval_v_reg(const PotentialSpec& s, const Vec2& x) {
  double v = 0.0;
  for (const auto& t : s.regular) v += eval_term(t, x);
  return v;
}

Vec2 grad_v_reg(const PotentialSpec& s, const Vec2& x) {
  Vec2 g = Vec2::Zero();
  for (const auto& t : s.regular) g += grad_term(t, x);
  return g;
}

double eval_v_sing(const PotentialSpec& s, const Vec2& x) {
  double v = 0.0;
  for (const auto& t : s.singular) v += eval_term(t, x);
  return v;
}

double eval_v(const PotentialSpec& s, const Vec2& x) { return eval_v_reg(s, x) + eval_v_sing(s, x); }

Vec2 grad_v(const PotentialSpec& s, const Vec2& x) {
  Vec2 g = grad_v_reg(s, x);
  for (const auto& t : s.singular) g += grad_term(t, x);
  return g;
}

DecayReport check_decay(const PotentialSpec& spec, const ModelParams& params, int n_samples) {
  if (n_samples < 1) throw DomainError("check_decay: n_samples must be >= 1");
  DecayReport rep;
  const double grad_extra = params.sigma_le_2() ? 0.5 : 1.0;
  const int n_angles = 16;
  const int n_r = std::max(n_samples, 2);
  for (int i = 0; i < n_r; ++i) {
    const double r = std::pow(10.0, 3.0 * static_cast<double>(i) / (n_r - 1));
    const double br = std::sqrt(1.0 + r * r);
    double worst = 0.0;
    for (int a = 0; a < n_angles; ++a) {
      const double th = 2.0 * kPi * (a + 0.5) / n_angles;
      const Vec2 x(r * std::cos(th), r * std::sin(th));
      const double v0 = std::abs(eval_v_reg(spec, x)) * std::pow(br, params.rho);
      const double v1 = grad_v_reg(spec, x).norm() * std::pow(br, params.rho + grad_extra);
      worst = std::max({worst, v0, v1});
    }
    rep.radii.push_back(r);
    rep.ratios.push_back(worst);
    rep.worst_ratio = std::max(rep.worst_ratio, worst);
  }
  if (!std::isfinite(rep.worst_ratio)) {
    rep.passed = false;
    return rep;
  }
  // Least-squares slope of log ratio against log radius over the last two decades.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < rep.radii.size(); ++i) {
    if (rep.radii[i] < 10.0 || !(rep.ratios[i] > 1e-300)) continue;
    const double x = std::log(rep.radii[i]), y = std::log(rep.ratios[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    const double den = m * sxx - sx * sx;
    rep.growth_slope = den > 0 ? (m * sxy - sx * sy) / den : 0.0;
  }
  rep.passed = rep.growth_slope <= 0.01;
  return rep;
}

void sample_affine(const PotentialSpec& spec, const Vec2& origin, double scale, const std::vector<double>& y1,
                   const std::vector<double>& y2, std::vector<double>& out, double smoothing) {
  const size_t n1 = y1.size(), n2 = y2.size();
  out.assign(n1 * n2, 0.0);
  // 5-point Gauss-Hermite nodes and weights for the standard normal.
  static const double gh_x[5] = {-2.8569700138728056, -1.3556261799742659, 0.0, 1.3556261799742659,
                                 2.8569700138728056};
  static const double gh_w[5] = {0.011257411327720691, 0.22207592200561266, 0.5333333333333333,
                                 0.22207592200561266, 0.011257411327720691};
  auto smoothed = [&](const auto& term, const Vec2& x) {
    if (smoothing <= 0.0) return eval_term(term, x);
    double acc = 0.0;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        acc += gh_w[a] * gh_w[b] * eval_term(term, x + smoothing * Vec2(gh_x[a], gh_x[b]));
    return acc;
  };
  std::vector<double> g1(n1), g2(n2);
  for (const auto& t : spec.regular) {
    if (t.kind == RegularKind::gaussian) {
      const double w2 = t.shape * t.shape + smoothing * smoothing;
      const double amp = t.amplitude * t.shape * t.shape / w2;
      const double c = 1.0 / (2.0 * w2);
      for (size_t i = 0; i < n1; ++i) {
        const double d = origin[0] + scale * y1[i] - t.center[0];
        g1[i] = amp * std::exp(-c * d * d);
      }
      for (size_t j = 0; j < n2; ++j) {
        const double d = origin[1] + scale * y2[j] - t.center[1];
        g2[j] = std::exp(-c * d * d);
      }
      for (size_t i = 0; i < n1; ++i) {
        if (g1[i] == 0.0) continue;
        double* row = out.data() + i * n2;
        for (size_t j = 0; j < n2; ++j) row[j] += g1[i] * g2[j];
      }
    } else {
      for (size_t i = 0; i < n1; ++i)
        for (size_t j = 0; j < n2; ++j)
          out[i * n2 + j] += smoothed(t, Vec2(origin[0] + scale * y1[i], origin[1] + scale * y2[j]));
    }
  }
  for (const auto& t : spec.singular) {
    // Only points inside the cutoff disc (widened by the smoothing stencil) contribute.
    const double R = t.cutoff_radius + 2.9 * smoothing;
    for (size_t i = 0; i < n1; ++i) {
      const double x1 = origin[0] + scale * y1[i];
      if (std::abs(x1 - t.center[0]) >= R) continue;
      for (size_t j = 0; j < n2; ++j) out[i * n2 + j] += smoothed(t, Vec2(x1, origin[1] + scale * y2[j]));
    }
  }
}

namespace {

Vec2 vec_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(std::string("potential: ") + what + " must be a 2-vector");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

double positive(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw ConfigError(std::string("potential: missing ") + key);
  const double v = j[key].get<double>();
  if (!(v > 0.0)) throw ConfigError(std::string("potential: ") + key + " must be positive");
  return v;
}

}  // namespace

nlohmann::json to_json(const PotentialSpec& s) {
  nlohmann::json reg = nlohmann::json::array(), sing = nlohmann::json::array();
  for (const auto& t : s.regular) {
    nlohmann::json e{{"kind", t.kind == RegularKind::gaussian ? "gaussian" : "power_decay"},
                     {"amplitude", t.amplitude},
                     {"center", {t.center[0], t.center[1]}}};
    e[t.kind == RegularKind::gaussian ? "width" : "rho_eff"] = t.shape;
    reg.push_back(e);
  }
  for (const auto& t : s.singular)
    sing.push_back({{"amplitude", t.amplitude},
                    {"center", {t.center[0], t.center[1]}},
                    {"mollifier_eps", t.mollifier_eps},
                    {"cutoff_radius", t.cutoff_radius}});
  return {{"regular", reg}, {"singular", sing}};
}

PotentialSpec potential_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("potential: expected an object");
  PotentialSpec s;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "regular" && it.key() != "singular") throw ConfigError("potential: unknown key " + it.key());
  if (j.contains("regular")) {
    for (const auto& e : j["regular"]) {
      RegularTerm t;
      const std::string kind = e.value("kind", "");
      if (kind == "gaussian") {
        t.kind = RegularKind::gaussian;
        t.shape = positive(e, "width");
      } else if (kind == "power_decay") {
        t.kind = RegularKind::power_decay;
        t.shape = positive(e, "rho_eff");
      } else {
        throw ConfigError("potential: regular term kind must be gaussian or power_decay");
      }
      if (!e.contains("amplitude") || !e["amplitude"].is_number()) throw ConfigError("potential: missing amplitude");
      t.amplitude = e["amplitude"].get<double>();
      t.center = e.contains("center") ? vec_from_json(e["center"], "center") : Vec2::Zero();
      s.regular.push_back(t);
    }
  }
  if (j.contains("singular")) {
    for (const auto& e : j["singular"]) {
      SingularTerm t;
      if (!e.contains("amplitude") || !e["amplitude"].is_number()) throw ConfigError("potential: missing amplitude");
      t.amplitude = e["amplitude"].get<double>();
      t.center = e.contains("center") ? vec_from_json(e["center"], "center") : Vec2::Zero();
      t.mollifier_eps = positive(e, "mollifier_eps");
      t.cutoff_radius = e.contains("cutoff_radius") ? positive(e, "cutoff_radius") : 2.0;
      s.singular.push_back(t);
    }
  }
  return s;
}

}  // namespace qstomo
