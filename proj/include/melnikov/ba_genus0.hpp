#pragma once

// Genus-zero Baker-Akhiezer functions with glued double points.
//
//   psi(lambda)  = e(lambda)  (1 + sum_j a_j / (lambda - R+_j))
//   psi*(lambda) = e(lambda)^-1 (1 + sum_j b_j / (lambda - R-_j))   (d lambda stripped)
//
// with e(lambda) = exp(sum_m lambda^m t_m) and the residue conditions
//   res_{R+_k} psi  =  tau_k psi(R-_k),
//   res_{R-_k} psi* = -tau_k psi*(R+_k).

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "melnikov/error.hpp"
#include "melnikov/grid.hpp"
#include "melnikov/io.hpp"

namespace melnikov::ba {

using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline constexpr double kMinSeparation = 1e-8;
inline constexpr double kMaxCondition = 1e12;

struct SpectralDataG0 {
  std::vector<std::pair<cplx, cplx>> pairs;  // (R+, R-)
  bool kdv_symmetric = false;

  SpectralDataG0() = default;
  SpectralDataG0(std::vector<std::pair<cplx, cplx>> p, bool kdv = false) : pairs(std::move(p)), kdv_symmetric(kdv) {
    validate();
  }

  /// Pairs (-kappa_k, kappa_k).
  static SpectralDataG0 kdv(const std::vector<double>& kappas) {
    std::vector<std::pair<cplx, cplx>> p;
    for (double k : kappas) p.emplace_back(-k, k);
    return SpectralDataG0(std::move(p), true);
  }

  std::size_t size() const { return pairs.size(); }
  cplx plus(std::size_t k) const { return pairs[k].first; }
  cplx minus(std::size_t k) const { return pairs[k].second; }

  void validate() const {
    std::vector<cplx> pts;
    for (const auto& [p, m] : pairs) {
      if (!std::isfinite(std::abs(p)) || !std::isfinite(std::abs(m))) throw InvalidArgument("non-finite marked point");
      pts.push_back(p);
      pts.push_back(m);
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        if (std::abs(pts[i] - pts[j]) < kMinSeparation) {
          std::ostringstream os;
          os << "marked points " << pts[i] << " and " << pts[j] << " are not distinct";
          throw InvalidArgument(os.str());
        }
    if (kdv_symmetric) {
      for (const auto& [p, m] : pairs) {
        if (m.imag() != 0.0 || !(m.real() > 0.0) || p != -m)
          throw InvalidArgument("KdV-symmetric data need pairs (-kappa, kappa) with kappa > 0");
      }
    }
  }

  /// The same data with pair k removed.
  SpectralDataG0 without(std::size_t k) const {
    auto p = pairs;
    p.erase(p.begin() + static_cast<std::ptrdiff_t>(k));
    return SpectralDataG0(std::move(p), kdv_symmetric);
  }
};

struct TimePoint {
  std::vector<double> times;  // times[m-1] = t_m; t_1 = x, t_2 = y, t_3 = t
  std::vector<cplx> taus;

  TimePoint() = default;
  TimePoint(std::vector<double> t, std::vector<cplx> tau) : times(std::move(t)), taus(std::move(tau)) {}

  double time(int m) const { return m >= 1 && static_cast<std::size_t>(m) <= times.size() ? times[m - 1] : 0.0; }
  void set_time(int m, double v) {
    if (m < 1) throw InvalidArgument("time index starts at 1");
    if (times.size() < static_cast<std::size_t>(m)) times.resize(m, 0.0);
    times[m - 1] = v;
  }
  double x() const { return time(1); }
  TimePoint with_x(double x) const {
    TimePoint t = *this;
    t.set_time(1, x);
    return t;
  }
  TimePoint with_tau(std::size_t k, cplx v) const {
    TimePoint t = *this;
    t.taus.at(k) = v;
    return t;
  }
  TimePoint with_time(int m, double v) const {
    TimePoint t = *this;
    t.set_time(m, v);
    return t;
  }
};

/// One derivative operation: d/dt_m or d/dtau_k.
struct Direction {
  enum class Kind { time, tau } kind = Kind::time;
  int index = 1;

  static Direction t(int m) { return {Kind::time, m}; }
  static Direction x() { return t(1); }
  static Direction y() { return t(2); }
  static Direction tau(int k) { return {Kind::tau, k}; }
};

enum class Side { psi, conjugate };

struct BAEvaluation {
  std::vector<cplx> a;
  cplx chi1;
  double condition_number = 0.0;
};

struct ConjugateBAEvaluation {
  std::vector<cplx> b;
  double condition_number = 0.0;
};

/// Solves the residue system for one side and all mixed derivatives of its
/// coefficients along an ordered list of directions (at most 16).
class Engine {
 public:
  Engine(const SpectralDataG0& data, const TimePoint& tp, Side side, std::vector<Direction> dirs = {})
      : data_(data), tp_(tp), side_(side), dirs_(std::move(dirs)) {
    const std::size_t n = data_.size();
    if (tp_.taus.size() != n) throw InvalidArgument("TimePoint: one tau per double-point pair required");
    if (dirs_.size() > 16) throw InvalidArgument("too many derivative directions");
    for (const auto& d : dirs_) {
      if (d.kind == Direction::Kind::tau && (d.index < 0 || static_cast<std::size_t>(d.index) >= n))
        throw InvalidArgument("tau direction out of range");
      if (d.kind == Direction::Kind::time && d.index < 1) throw InvalidArgument("time direction index starts at 1");
    }
    sigma_ = side_ == Side::psi ? 1.0 : -1.0;
    poles_.resize(n);
    others_.resize(n);
    gamma_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      poles_[k] = side_ == Side::psi ? data_.plus(k) : data_.minus(k);
      others_[k] = side_ == Side::psi ? data_.minus(k) : data_.plus(k);
      gamma_[k] = side_ == Side::psi ? tp_.taus[k] : -tp_.taus[k];
    }
    Mat a0 = matrix(0);
    Vec r0 = rhs(0);
    scale_.resize(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const double s = a0.row(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff();
      if (!(s > 0.0) || !std::isfinite(s)) throw SingularBASystem("residue system row is zero or overflows");
      scale_(static_cast<Eigen::Index>(k)) = 1.0 / s;
    }
    if (n > 0) {
      const Mat scaled = scale_.asDiagonal() * a0;
      Eigen::JacobiSVD<Mat> svd(scaled);
      const auto sv = svd.singularValues();
      condition_ = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
      if (!(condition_ <= kMaxCondition)) {
        std::ostringstream os;
        os << "residue system condition number " << condition_ << " exceeds " << kMaxCondition;
        throw SingularBASystem(os.str());
      }
      lu_ = scaled.partialPivLu();
      coeffs_[0] = lu_.solve(scale_.asDiagonal() * r0);
    } else {
      coeffs_[0] = Vec();
    }
  }

  std::size_t size() const { return data_.size(); }
  double condition_number() const { return condition_; }
  const std::vector<Direction>& directions() const { return dirs_; }
  unsigned full_mask() const { return (1u << dirs_.size()) - 1u; }
  cplx pole(std::size_t k) const { return poles_[k]; }

  /// d_S of the coefficient vector, S given as a bitmask over directions().
  const Vec& coefficients(unsigned mask = 0) {
    if (auto it = coeffs_.find(mask); it != coeffs_.end()) return it->second;
    if (size() == 0) return coeffs_.emplace(mask, Vec()).first->second;
    Vec rhs_s = rhs(mask);
    for (unsigned sub = (mask - 1) & mask;; sub = (sub - 1) & mask) {
      rhs_s -= matrix(mask & ~sub) * coefficients(sub);
      if (sub == 0) break;
    }
    Vec sol = lu_.solve(scale_.asDiagonal() * rhs_s);
    return coeffs_.emplace(mask, std::move(sol)).first->second;
  }

  /// d_S e(lambda)^sigma.
  cplx exponential(cplx lambda, unsigned mask = 0) const {
    cplx factor = 1.0;
    for (std::size_t i = 0; i < dirs_.size(); ++i) {
      if (!(mask & (1u << i))) continue;
      if (dirs_[i].kind == Direction::Kind::tau) return 0.0;
      factor *= sigma_ * std::pow(lambda, dirs_[i].index);
    }
    return factor * base_exponential(lambda);
  }

  /// d_S of the function (dlambda stripped for the conjugate side).
  cplx value(cplx lambda, unsigned mask = 0) {
    for (std::size_t j = 0; j < size(); ++j) {
      if (std::abs(lambda - poles_[j]) < 1e-12 * std::max(1.0, std::abs(poles_[j]))) {
        std::ostringstream os;
        os << "evaluation at the marked point " << poles_[j];
        throw PoleAtMarkedPoint(os.str());
      }
    }
    cplx total = 0.0;
    for (unsigned sub = mask;; sub = (sub - 1) & mask) {
      const cplx e = exponential(lambda, mask & ~sub);
      if (e != 0.0) {
        cplx rational = sub == 0 ? 1.0 : 0.0;
        const Vec& c = coefficients(sub);
        for (std::size_t j = 0; j < size(); ++j) rational += c(static_cast<Eigen::Index>(j)) / (lambda - poles_[j]);
        total += e * rational;
      }
      if (sub == 0) break;
    }
    return total;
  }

  /// Sum of coefficients differentiated along mask.
  cplx coefficient_sum(unsigned mask = 0) { return coefficients(mask).sum(); }

 private:
  cplx base_exponential(cplx lambda) const {
    cplx phase = 0.0;
    cplx power = 1.0;
    for (std::size_t m = 0; m < tp_.times.size(); ++m) {
      power *= lambda;
      if (tp_.times[m] != 0.0) phase += power * tp_.times[m];
    }
    return std::exp(sigma_ * phase);
  }

  /// Splits mask into its tau part; returns false if the tau part kills gamma_k e(Q_k).
  bool tau_factor(unsigned mask, std::size_t k, cplx& gamma) const {
    int taus = 0;
    bool hits_k = false;
    for (std::size_t i = 0; i < dirs_.size(); ++i) {
      if (!(mask & (1u << i)) || dirs_[i].kind != Direction::Kind::tau) continue;
      ++taus;
      hits_k = static_cast<std::size_t>(dirs_[i].index) == k;
    }
    if (taus == 0) {
      gamma = gamma_[k];
      return true;
    }
    if (taus == 1 && hits_k) {
      gamma = side_ == Side::psi ? 1.0 : -1.0;
      return true;
    }
    return false;
  }

  unsigned time_part(unsigned mask) const {
    unsigned out = 0;
    for (std::size_t i = 0; i < dirs_.size(); ++i)
      if ((mask & (1u << i)) && dirs_[i].kind == Direction::Kind::time) out |= 1u << i;
    return out;
  }

  bool has_tau(unsigned mask) const { return time_part(mask) != mask; }

  Mat matrix(unsigned mask) const {
    const auto n = static_cast<Eigen::Index>(size());
    Mat a = Mat::Zero(n, n);
    const unsigned tm = time_part(mask);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      if (!has_tau(mask)) a(k, k) += exponential(poles_[ku], mask);
      cplx gamma;
      if (!tau_factor(mask, ku, gamma)) continue;
      const cplx eq = exponential(others_[ku], tm);
      for (Eigen::Index j = 0; j < n; ++j) a(k, j) -= gamma * eq / (others_[ku] - poles_[static_cast<std::size_t>(j)]);
    }
    return a;
  }

  Vec rhs(unsigned mask) const {
    const auto n = static_cast<Eigen::Index>(size());
    Vec r = Vec::Zero(n);
    const unsigned tm = time_part(mask);
    for (Eigen::Index k = 0; k < n; ++k) {
      cplx gamma;
      if (tau_factor(mask, static_cast<std::size_t>(k), gamma))
        r(k) = gamma * exponential(others_[static_cast<std::size_t>(k)], tm);
    }
    return r;
  }

  SpectralDataG0 data_;
  TimePoint tp_;
  Side side_;
  std::vector<Direction> dirs_;
  double sigma_ = 1.0;
  std::vector<cplx> poles_, others_, gamma_;
  Eigen::VectorXd scale_;
  double condition_ = 1.0;
  Eigen::PartialPivLU<Mat> lu_;
  std::map<unsigned, Vec> coeffs_;
};

namespace detail {

inline std::vector<cplx> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

/// Directions list with an extra x appended; returns the mask of the original list.
inline std::vector<Direction> with_x(std::vector<Direction> dirs) {
  dirs.push_back(Direction::x());
  return dirs;
}

}  // namespace detail

inline BAEvaluation solve_ba(const SpectralDataG0& data, const TimePoint& tp) {
  Engine e(data, tp, Side::psi);
  const Vec& a = e.coefficients();
  return {detail::to_std(a), a.sum(), e.condition_number()};
}

inline ConjugateBAEvaluation solve_ba_conjugate(const SpectralDataG0& data, const TimePoint& tp) {
  Engine e(data, tp, Side::conjugate);
  return {detail::to_std(e.coefficients()), e.condition_number()};
}

inline cplx eval_psi(const SpectralDataG0& data, const TimePoint& tp, cplx lambda) {
  Engine e(data, tp, Side::psi);
  return e.value(lambda);
}

inline cplx eval_psi_star(const SpectralDataG0& data, const TimePoint& tp, cplx lambda) {
  Engine e(data, tp, Side::conjugate);
  return e.value(lambda);
}

/// Mixed derivative of u = 2 d_x sum_j a_j along dirs.
inline cplx potential_derivative(const SpectralDataG0& data, const TimePoint& tp, std::vector<Direction> dirs) {
  Engine e(data, tp, Side::psi, detail::with_x(std::move(dirs)));
  return 2.0 * e.coefficient_sum(e.full_mask());
}

inline cplx potential_u(const SpectralDataG0& data, const TimePoint& tp) { return potential_derivative(data, tp, {}); }

/// Mixed derivative of psi(lambda) (or of psi*) along dirs.
inline cplx psi_derivative(const SpectralDataG0& data, const TimePoint& tp, cplx lambda, std::vector<Direction> dirs,
                           Side side = Side::psi) {
  Engine e(data, tp, side, std::move(dirs));
  return e.value(lambda, e.full_mask());
}

// ----------------------------------------------------------- kernel

enum class Infinity { plus, minus };

struct CBASample {
  cplx lambda;
  cplx mu;
  cplx omega_over_dmu;
  Infinity convergence_direction = Infinity::plus;
  double integration_length = 0.0;
};

struct KernelOptions {
  double decay_exponent = 36.0;  // integrate until |e^{(lambda-mu)X}| ~ e^{-36}
  double max_panel = 0.25;
  double max_exponent = 600.0;
  double plateau_tolerance = 1e-14;  // relative panel-to-panel change of the rational factor
  int plateau_panels = 4;
};

/// omega(lambda, mu) = int_x^{+-inf} psi(lambda, x') psi*(mu, x') dx', with the
/// endpoint chosen so the integral converges.  The integrand is e^{(lambda-mu)x'}
/// times a rational factor that tends to a constant; panels stop once that factor
/// is flat (or the exponential has decayed) and the rest is the exact exponential tail.
inline CBASample cba_kernel(const SpectralDataG0& data, const TimePoint& tp, cplx lambda, cplx mu,
                            const KernelOptions& opt = {}) {
  const cplx s = lambda - mu;
  const double rate = s.real();
  if (std::abs(rate) < 1e-10) {
    std::ostringstream os;
    os << "kernel integral diverges in both directions for lambda - mu = " << s;
    throw NonConvergentDirection(os.str());
  }
  CBASample out{lambda, mu, 0.0, rate < 0.0 ? Infinity::plus : Infinity::minus, 0.0};
  const double sign = rate < 0.0 ? 1.0 : -1.0;
  const double decay_length = opt.decay_exponent / std::abs(rate);
  double max_re = std::max(std::abs(lambda.real()), std::abs(mu.real()));
  for (const auto& [p, m] : data.pairs) max_re = std::max({max_re, std::abs(p.real()), std::abs(m.real())});
  const double x0 = tp.x();
  auto integrand = [&](double xp) {
    const TimePoint at = tp.with_x(xp);
    Engine ep(data, at, Side::psi);
    Engine ec(data, at, Side::conjugate);
    return ep.value(lambda) * ec.value(mu);
  };
  auto factor = [&](double xp) {
    const TimePoint at = tp.with_x(xp);
    Engine ep(data, at, Side::psi);
    Engine ec(data, at, Side::conjugate);
    return ep.value(lambda) / ep.exponential(lambda) * (ec.value(mu) / ec.exponential(mu));
  };
  const double width = std::min(opt.max_panel, 1.0 / std::max(1.0, std::abs(s.imag())));
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& nodes = Rule::abscissa();
  const auto& weights = Rule::weights();
  cplx sum = 0.0;
  double length = 0.0;
  cplx last = factor(x0);
  int flat = 0;
  while (length < decay_length && flat < opt.plateau_panels) {
    const double h = std::min(width, decay_length - length);
    if ((std::abs(x0) + length + h) * max_re > opt.max_exponent) {
      std::ostringstream os;
      os << "kernel integrand not settled before the exponentials overflow (length " << length << ")";
      throw NonConvergentDirection(os.str());
    }
    const double a = x0 + sign * length;
    const double mid = a + sign * 0.5 * h;
    cplx panel = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double off = 0.5 * h * nodes[i];
      if (nodes[i] == 0.0) {
        panel += weights[i] * integrand(mid);
      } else {
        panel += weights[i] * (integrand(mid - off) + integrand(mid + off));
      }
    }
    sum += panel * (0.5 * h);
    length += h;
    const cplx now = factor(x0 + sign * length);
    flat = std::abs(now - last) <= opt.plateau_tolerance * std::max(std::abs(now), 1e-300) ? flat + 1 : 0;
    last = now;
  }
  out.integration_length = length;
  sum *= sign;
  // Remaining tail: f(X) e^{s (x' - X)} integrated from X to the convergent infinity.
  sum += -integrand(x0 + sign * length) / s;
  out.omega_over_dmu = sum;
  return out;
}

// ----------------------------------------------------- verification

/// |d_tau_k psi(lambda) + omega(lambda, R+_k) psi(R-_k)|; the tau derivative by
/// central differences at h and h/2.
inline StepHalvingResult verify_dpsi(const SpectralDataG0& data, const TimePoint& tp, std::size_t k, cplx lambda,
                                     double h = 0.0) {
  const cplx tau = tp.taus.at(k);
  if (h <= 0.0) h = default_fd_step(std::abs(tau));
  const cplx rhs = -cba_kernel(data, tp, lambda, data.plus(k)).omega_over_dmu * eval_psi(data, tp, data.minus(k));
  auto residual = [&](double step) {
    const cplx fd = central_difference([&](double d) { return eval_psi(data, tp.with_tau(k, tau + d), lambda); }, 0.0,
                                       step);
    return std::abs(fd - rhs);
  };
  return {residual(h), residual(0.5 * h)};
}

/// |d_x omega(lambda, mu) + psi(lambda) psi*(mu)| with d_x by central differences.
inline StepHalvingResult verify_deromega(const SpectralDataG0& data, const TimePoint& tp, cplx lambda, cplx mu,
                                         double h = 1e-3) {
  const cplx rhs = -eval_psi(data, tp, lambda) * eval_psi_star(data, tp, mu);
  auto residual = [&](double step) {
    const cplx fd = central_difference(
        [&](double x) { return cba_kernel(data, tp.with_x(x), lambda, mu).omega_over_dmu; }, tp.x(), step);
    return std::abs(fd - rhs);
  };
  return {residual(h), residual(0.5 * h)};
}

/// 2 d_x [psi(R-_k) psi*(R+_k)], the source term of the tau_k flow.
inline cplx tau_source(const SpectralDataG0& data, const TimePoint& tp, std::size_t k) {
  Engine ep(data, tp, Side::psi, {Direction::x()});
  Engine ec(data, tp, Side::conjugate, {Direction::x()});
  const cplx rm = data.minus(k);
  const cplx rp = data.plus(k);
  return 2.0 * (ep.value(rm, 1) * ec.value(rp, 0) + ep.value(rm, 0) * ec.value(rp, 1));
}

/// max over xs of |FD_tau_k u - tau_source|, at h and h/2.
inline StepHalvingResult verify_tau_source(const SpectralDataG0& data, const TimePoint& tp, std::size_t k,
                                        const std::vector<double>& xs, double h = 0.0) {
  const cplx tau = tp.taus.at(k);
  if (h <= 0.0) h = default_fd_step(std::abs(tau));
  auto residual = [&](double step) {
    double worst = 0.0;
    for (double x : xs) {
      const TimePoint at = tp.with_x(x);
      const cplx fd =
          central_difference([&](double d) { return potential_u(data, at.with_tau(k, tau + d)); }, 0.0, step);
      worst = std::max(worst, std::abs(fd - tau_source(data, at, k)));
    }
    return worst;
  };
  return {residual(h), residual(0.5 * h)};
}

/// (psi_xxtau - psi_ytau - u psi_tau) / psi at one lambda, which should equal
/// d_tau_k u for every lambda.
inline cplx tau_quotient(const SpectralDataG0& data, const TimePoint& tp, std::size_t k, cplx lambda) {
  const auto tk = Direction::tau(static_cast<int>(k));
  Engine e(data, tp, Side::psi, {Direction::x(), Direction::x(), Direction::y(), tk});
  const unsigned x1 = 1u, x2 = 2u, y = 4u, t = 8u;
  const cplx u = potential_u(data, tp);
  return (e.value(lambda, x1 | x2 | t) - e.value(lambda, y | t) - u * e.value(lambda, t)) / e.value(lambda);
}

struct QuotientReport {
  std::vector<cplx> values;
  double spread = 0.0;          // max pairwise difference
  double against_source = 0.0;  // max |value - tau_source|
};

inline QuotientReport verify_tau_quotient(const SpectralDataG0& data, const TimePoint& tp, std::size_t k,
                                          const std::vector<cplx>& lambdas) {
  QuotientReport r;
  const cplx src = tau_source(data, tp, k);
  for (cplx l : lambdas) r.values.push_back(tau_quotient(data, tp, k, l));
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    r.against_source = std::max(r.against_source, std::abs(r.values[i] - src));
    for (std::size_t j = i + 1; j < r.values.size(); ++j)
      r.spread = std::max(r.spread, std::abs(r.values[i] - r.values[j]));
  }
  return r;
}

/// Path tau -> (t_m = base + c_m tau, tau_k = alpha_k + beta_k tau).
struct FlowPath {
  std::map<int, double> time_rates;  // m -> c_m
  std::vector<cplx> alphas;
  std::vector<cplx> betas;

  TimePoint at(const TimePoint& base, double tau) const {
    TimePoint tp = base;
    for (const auto& [m, c] : time_rates) tp.set_time(m, base.time(m) + c * tau);
    for (std::size_t k = 0; k < alphas.size(); ++k) tp.taus.at(k) = alphas[k] + betas[k] * tau;
    return tp;
  }

  /// tau at which alpha_k + beta_k tau = 0, when beta_k != 0.
  std::optional<cplx> ungluing_time(std::size_t k) const {
    if (betas.at(k) == 0.0) return std::nullopt;
    return -alphas[k] / betas[k];
  }
};

struct CombinedFlowReport {
  StepHalvingResult residual;
  std::vector<std::optional<cplx>> ungluing_times;
};

/// Chain-rule decomposition d u/d tau = sum c_m du/dt_m + sum beta_k du/dtau_k,
/// every derivative an independent central difference.
inline CombinedFlowReport verify_combined_flow(const SpectralDataG0& data, const TimePoint& base, const FlowPath& path,
                                               double tau, const std::vector<double>& xs, double h = 0.0) {
  if (path.alphas.size() != data.size() || path.betas.size() != data.size())
    throw InvalidArgument("FlowPath: one alpha and beta per pair");
  if (h <= 0.0) h = default_fd_step(tau);
  CombinedFlowReport out;
  for (std::size_t k = 0; k < data.size(); ++k) out.ungluing_times.push_back(path.ungluing_time(k));
  auto residual = [&](double step) {
    double worst = 0.0;
    for (double x : xs) {
      const TimePoint b = base.with_x(x);
      const TimePoint p = path.at(b, tau);
      const cplx along = central_difference([&](double s) { return potential_u(data, path.at(b, s)); }, tau, step);
      cplx parts = 0.0;
      for (const auto& [m, c] : path.time_rates) {
        if (c == 0.0) continue;
        const double tm = p.time(m);
        parts += c * central_difference([&](double v) { return potential_u(data, p.with_time(m, v)); }, tm, step);
      }
      for (std::size_t k = 0; k < data.size(); ++k) {
        if (path.betas[k] == 0.0) continue;
        const cplx t0 = p.taus[k];
        parts += path.betas[k] *
                 central_difference([&](double d) { return potential_u(data, p.with_tau(k, t0 + d)); }, 0.0, step);
      }
      worst = std::max(worst, std::abs(along - parts));
    }
    return worst;
  };
  out.residual = {residual(h), residual(0.5 * h)};
  return out;
}

/// Scale used for residuals of the auxiliary equations: |psi| (1 + |lambda|^2).
inline double auxiliary_scale(cplx psi, cplx lambda) {
  return std::max(1e-300, std::abs(psi) * (1.0 + std::norm(lambda)));
}

/// max |-psi_xx + psi_y + u psi| / scale over lambdas and the (x, y) grid.
inline double kp_residual(const SpectralDataG0& data, const TimePoint& base, const std::vector<cplx>& lambdas,
                          const std::vector<double>& xs, const std::vector<double>& ys) {
  double worst = 0.0;
  for (double x : xs)
    for (double y : ys) {
      const TimePoint tp = base.with_x(x).with_time(2, y);
      Engine e(data, tp, Side::psi, {Direction::x(), Direction::x(), Direction::y()});
      const cplx u = potential_u(data, tp);
      for (cplx l : lambdas) {
        const cplx psi = e.value(l);
        const cplx r = -e.value(l, 3u) + e.value(l, 4u) + u * psi;
        worst = std::max(worst, std::abs(r) / auxiliary_scale(psi, l));
      }
    }
  return worst;
}

/// max |-psi_xx + u psi + lambda^2 psi| / scale over lambdas and xs.
inline double kdv_residual(const SpectralDataG0& data, const TimePoint& base, const std::vector<cplx>& lambdas,
                           const std::vector<double>& xs) {
  if (!data.kdv_symmetric) throw NotKdVSymmetric("kdv_residual needs pairs (-kappa, kappa)");
  for (std::size_t m = 2; m <= base.times.size(); m += 2)
    if (base.time(static_cast<int>(m)) != 0.0) throw NotKdVSymmetric("even times must vanish for the KdV reduction");
  double worst = 0.0;
  for (double x : xs) {
    const TimePoint tp = base.with_x(x);
    Engine e(data, tp, Side::psi, {Direction::x(), Direction::x()});
    const cplx u = potential_u(data, tp);
    for (cplx l : lambdas) {
      const cplx psi = e.value(l);
      const cplx r = -e.value(l, 3u) + u * psi + l * l * psi;
      worst = std::max(worst, std::abs(r) / auxiliary_scale(psi, l));
    }
  }
  return worst;
}

// ---------------------------------------------------- serialization

inline nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::json to_json(const SpectralDataG0& d) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [p, m] : d.pairs) pairs.push_back({{"R_plus", complex_to_json(p)}, {"R_minus", complex_to_json(m)}});
  return {{"pairs", pairs}, {"kdv_symmetric", d.kdv_symmetric}};
}

inline SpectralDataG0 spectral_data_from_json(const nlohmann::json& j) {
  std::vector<std::pair<cplx, cplx>> pairs;
  for (const auto& p : j.at("pairs")) pairs.emplace_back(complex_from_json(p.at("R_plus")), complex_from_json(p.at("R_minus")));
  return SpectralDataG0(std::move(pairs), j.value("kdv_symmetric", false));
}

inline nlohmann::json to_json(const TimePoint& t) {
  nlohmann::json taus = nlohmann::json::array();
  for (cplx z : t.taus) taus.push_back(complex_to_json(z));
  return {{"times", t.times}, {"taus", taus}};
}

inline TimePoint time_point_from_json(const nlohmann::json& j) {
  TimePoint t;
  t.times = j.at("times").get<std::vector<double>>();
  for (const auto& z : j.at("taus")) t.taus.push_back(complex_from_json(z));
  return t;
}

/// u over an (x, tau_k) grid; columns x, tau, u_re, u_im.
inline io::CsvTable potential_grid(const SpectralDataG0& data, const TimePoint& base, std::size_t k,
                                   const std::vector<double>& xs, const std::vector<double>& taus) {
  io::CsvTable t({"x", "tau", "u_re", "u_im"});
  for (double tau : taus)
    for (double x : xs) {
      const cplx u = potential_u(data, base.with_x(x).with_tau(k, tau));
      t.add_row({x, tau, u.real(), u.imag()});
    }
  return t;
}

}  // namespace melnikov::ba
