#include "chicap/detail/objective.hpp"

#include "chicap/detail/optimizer.hpp"
#include "chicap/entropy.hpp"
#include "chicap/errors.hpp"
#include "chicap/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chicap {

ChiObjectiveSpec ChiObjectiveSpec::of(const KrausChannel& c) {
  ChiObjectiveSpec s;
  s.din = c.din();
  s.terms.push_back({1.0, c.map()});
  return s;
}

ChiObjectiveSpec ChiObjectiveSpec::of(const BlockChannel& c) {
  ChiObjectiveSpec s;
  s.din = c.din();
  for (const auto& comp : c.components())
    if (comp.weight > 0.0) s.terms.push_back({comp.weight, comp.channel.map()});
  return s;
}

ChiObjectiveSpec ChiObjectiveSpec::with_linear(const Matrix& l) const {
  const auto n = static_cast<Eigen::Index>(din);
  if (l.rows() != n || l.cols() != n) throw InvalidInput("with_linear: operator dimension mismatch");
  ChiObjectiveSpec s = *this;
  s.linear = linear.size() == 0 ? hermitian_part(l) : Matrix(linear + hermitian_part(l));
  return s;
}

double ChiObjectiveSpec::evaluate(const Ensemble& e) const {
  if (e.dim() != din) throw InvalidInput("objective: ensemble dimension mismatch");
  double v = 0.0;
  for (const auto& t : terms) v += t.weight * chi_of_map(t.map, e);
  if (linear.size() != 0) v += (linear * average_state(e).matrix()).trace().real();
  return v;
}

namespace detail {

namespace {

double neg_xlogx(const RealVector& values) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (values[k] > 0.0) h -= values[k] * std::log(values[k]);
  return h;
}

// Columns K_k v.
Matrix kraus_images(const CpMap& m, const Vector& v) {
  Matrix out(static_cast<Eigen::Index>(m.dout), static_cast<Eigen::Index>(m.kraus.size()));
  for (std::size_t k = 0; k < m.kraus.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.kraus[k] * v;
  return out;
}

// sum_k K_k^dagger X K_k v given the columns K_k v.
Vector adjoint_images(const CpMap& m, const Matrix& x, const Matrix& kv) {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(m.din));
  for (std::size_t k = 0; k < m.kraus.size(); ++k)
    g += m.kraus[k].adjoint() * (x * kv.col(static_cast<Eigen::Index>(k)));
  return g;
}

RealVector pack(const Matrix& z) {
  const Eigen::Index n = z.size();
  RealVector x(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x[k] = z.data()[k].real();
    x[n + k] = z.data()[k].imag();
  }
  return x;
}

Matrix unpack(const RealVector& x, Eigen::Index rows, Eigen::Index cols) {
  Matrix z(rows, cols);
  const Eigen::Index n = rows * cols;
  for (Eigen::Index k = 0; k < n; ++k) z.data()[k] = Complex(x[k], x[n + k]);
  return z;
}

// Real gradient of a real function from its conjugate Wirtinger derivative.
RealVector pack_gradient(const Matrix& g) { return 2.0 * pack(g); }

LbfgsOptions inner_options(const OptimizerConfig& cfg) {
  LbfgsOptions o;
  o.max_iterations = cfg.max_iterations;
  o.value_tol = 1e-14;
  o.stall_iterations = 10;
  o.gradient_tol = 1e-10;
  return o;
}

FactorConstraint full_factor(std::size_t dim) {
  FactorConstraint f;
  f.dim = dim;
  f.subspace = identity(dim);
  return f;
}

FactorConstraint compile_factor(const ConstraintSet& c, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  FactorConstraint f = full_factor(dim);
  const auto& v = c.variant();
  if (std::holds_alternative<ConstraintSet::Full>(v)) return f;
  if (const auto* lin = std::get_if<ConstraintSet::Linear>(&v)) {
    if (lin->effect.rows() != n) throw InvalidInput("constraint: effect dimension mismatch");
    const Spectrum s = eigh(lin->effect);
    const double a_min = s.values[0];
    const double a_max = s.values[s.values.size() - 1];
    if (lin->alpha < a_min - 1e-10)
      throw InvalidInput("constraint: infeasible linear constraint (alpha below the minimal eigenvalue)");
    if (lin->alpha >= a_max) return f;  // never active
    if (lin->alpha <= a_min + 1e-12) {
      // No Slater point: the admissible states live on the minimal eigenspace.
      std::vector<Eigen::Index> cols;
      for (Eigen::Index k = 0; k < s.values.size(); ++k)
        if (s.values[k] <= a_min + 1e-9) cols.push_back(k);
      f.subspace.resize(n, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) f.subspace.col(static_cast<Eigen::Index>(k)) = s.vectors.col(cols[k]);
      return f;
    }
    f.kind = FactorConstraint::Kind::Linear;
    f.effect = lin->effect;
    f.alpha = lin->alpha;
    f.min_vector = s.vectors.col(0);
    f.min_value = a_min;
    return f;
  }
  if (const auto* sg = std::get_if<ConstraintSet::Singleton>(&v)) {
    if (sg->rho.dim() != dim) throw InvalidInput("constraint: singleton dimension mismatch");
    f.kind = FactorConstraint::Kind::Singleton;
    f.rho = sg->rho.matrix();
    f.subspace = support_isometry(f.rho);
    return f;
  }
  throw Unsupported("constraint: nested marginal constraints are not supported");
}

// Smallest t with rho - (1 - t) m >= 0, for m supported inside supp(rho).
double singleton_mixing(const FactorConstraint& f, const Matrix& m) {
  const Matrix r = f.subspace.adjoint() * f.rho * f.subspace;
  const Matrix mr = f.subspace.adjoint() * m * f.subspace;
  const Spectrum sr = eigh(r);
  const Matrix inv_sqrt = spectral_apply(sr, [](double x) { return 1.0 / std::sqrt(x); });
  const RealVector k = eigenvalues_h(inv_sqrt * mr * inv_sqrt);
  const double kappa = k[k.size() - 1];
  return kappa <= 1.0 ? 0.0 : 1.0 - 1.0 / kappa;
}

}  // namespace

Matrix clipped_log(const Spectrum& s, double floor) {
  return spectral_apply(s, [floor](double x) { return std::log(std::max(x, floor)); });
}

ChiObjective::ChiObjective(const ChiObjectiveSpec& spec) : spec_(spec) {
  if (spec_.din == 0) throw InvalidInput("objective: zero input dimension");
  for (const auto& t : spec_.terms)
    if (t.map.din != spec_.din) throw InvalidInput("objective: term input dimension mismatch");
}

double ChiObjective::evaluate(const Matrix& psi, Matrix* grad) const {
  const Eigen::Index m = psi.cols();
  const Matrix rho = psi * psi.adjoint();
  if (grad) grad->setZero(psi.rows(), m);
  std::vector<double> pis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) pis[static_cast<std::size_t>(i)] = psi.col(i).squaredNorm();

  double nats = 0.0;
  for (const auto& term : spec_.terms) {
    const CpMap& map = term.map;
    const Spectrum sp_av = eigh(map.apply(rho));
    double value = neg_xlogx(sp_av.values);
    Matrix log_av;
    if (grad) log_av = clipped_log(sp_av);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double pi = pis[static_cast<std::size_t>(i)];
      if (!(pi > 0.0)) continue;
      const Vector v = psi.col(i);
      const Matrix kv = kraus_images(map, v);
      const Spectrum sp_i = eigh(kv * kv.adjoint());
      const double tr_i = kv.squaredNorm();
      const double log_pi = std::log(pi);
      value -= neg_xlogx(sp_i.values) + tr_i * log_pi;
      if (grad) {
        Matrix x = clipped_log(sp_i) - log_av;
        x.diagonal().array() -= log_pi;
        grad->col(i) += (term.weight / std::log(2.0)) * (adjoint_images(map, x, kv) - (tr_i / pi) * v);
      }
    }
    nats += term.weight * value;
  }
  double bits = to_bits(nats);
  if (spec_.linear.size() != 0) {
    bits += (spec_.linear * rho).trace().real();
    if (grad) *grad += spec_.linear * psi;
  }
  return bits;
}

DivergenceObjective::DivergenceObjective(const ChiObjectiveSpec& spec, const Matrix& reference_average,
                                         const Matrix& extra_linear)
    : spec_(spec) {
  const auto n = static_cast<Eigen::Index>(spec_.din);
  for (const auto& t : spec_.terms) {
    const Matrix y = t.map.apply(reference_average);
    const Spectrum s = eigh(y);
    Matrix proj = Matrix::Zero(y.rows(), y.cols());
    for (Eigen::Index k = 0; k < s.values.size(); ++k)
      if (s.values[k] > kEigenFloor) proj += s.vectors.col(k) * s.vectors.col(k).adjoint();
    data_.push_back({t.weight, &t.map, clipped_log(s), proj, y.trace().real()});
  }
  linear_ = spec_.linear.size() != 0 ? spec_.linear : Matrix(Matrix::Zero(n, n));
  if (extra_linear.size() != 0) linear_ += extra_linear;
}

double DivergenceObjective::evaluate(const Vector& psi, Vector* grad) const {
  if (grad) grad->setZero(psi.size());
  double nats = 0.0;
  for (const auto& t : data_) {
    const Matrix kv = kraus_images(*t.map, psi);
    const Spectrum sx = eigh(kv * kv.adjoint());
    const double tr_x = kv.squaredNorm();
    const double cross = (kv.adjoint() * t.log_ref * kv).trace().real();
    nats += t.weight * (-neg_xlogx(sx.values) - cross - tr_x + t.trace_ref);
    if (grad) *grad += (t.weight / std::log(2.0)) * adjoint_images(*t.map, clipped_log(sx) - t.log_ref, kv);
  }
  double bits = to_bits(nats) + psi.dot(linear_ * psi).real();
  if (grad) *grad += linear_ * psi;
  return bits;
}

Matrix DivergenceObjective::support_compatible_subspace(const Matrix& within) const {
  const Eigen::Index r = within.cols();
  Matrix gram = Matrix::Zero(r, r);
  for (const auto& t : data_) {
    const Matrix off = Matrix::Identity(t.support.rows(), t.support.cols()) - t.support;
    for (const auto& k : t.map->kraus) {
      const Matrix n = off * k * within;
      gram += n.adjoint() * n;
    }
  }
  const Spectrum s = eigh(gram);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < s.values.size(); ++k)
    if (s.values[k] <= 1e-14) cols.push_back(k);
  Matrix out(within.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = within * s.vectors.col(cols[k]);
  return out;
}

Matrix CompiledConstraint::marginal(const Matrix& rho, Side keep) const {
  return partial_trace(rho, dh, dk, keep);
}

Matrix CompiledConstraint::lift(const Matrix& x, Side keep) const {
  return keep == Side::Left ? kron(x, identity(dk)) : kron(identity(dh), x);
}

CompiledConstraint compile_constraint(const ConstraintSet& c, std::size_t din) {
  CompiledConstraint cc;
  const auto& v = c.variant();
  if (const auto* mg = std::get_if<ConstraintSet::Marginals>(&v)) {
    if (mg->dh * mg->dk != din) throw InvalidInput("constraint: marginal dimensions do not factor the input space");
    cc.dh = mg->dh;
    cc.dk = mg->dk;
    cc.left = compile_factor(*mg->left, cc.dh);
    cc.right = compile_factor(*mg->right, cc.dk);
  } else {
    cc.dh = din;
    cc.dk = 1;
    cc.left = compile_factor(c, din);
    cc.right = full_factor(1);
    if (cc.left.kind == FactorConstraint::Kind::Singleton) {
      cc.fixed_average = true;
      cc.fixed_rho = cc.left.rho;
    }
  }
  cc.subspace = kron(cc.left.subspace, cc.right.subspace);
  if (cc.fixed_average) return cc;
  for (const auto side : {Side::Left, Side::Right}) {
    const FactorConstraint& f = side == Side::Left ? cc.left : cc.right;
    if (f.kind == FactorConstraint::Kind::Linear) cc.inequalities.push_back({cc.lift(f.effect, side), f.alpha});
    if (f.kind == FactorConstraint::Kind::Singleton) cc.equalities.push_back({side, f.rho});
  }
  return cc;
}

void AugmentedLagrangian::reset(const CompiledConstraint& cc) {
  mu.assign(cc.inequalities.size(), 0.0);
  lambda.clear();
  for (const auto& e : cc.equalities) lambda.push_back(Matrix::Zero(e.target.rows(), e.target.cols()));
  penalty = 10.0;
}

double AugmentedLagrangian::evaluate(const CompiledConstraint& cc, const Matrix& rho, Matrix* grad) const {
  double p = 0.0;
  if (grad) grad->setZero(rho.rows(), rho.cols());
  for (std::size_t k = 0; k < cc.inequalities.size(); ++k) {
    const auto& f = cc.inequalities[k];
    const double c = (f.op * rho).trace().real() - f.bound;
    const double s = std::max(0.0, mu[k] + penalty * c);
    p += (s * s - mu[k] * mu[k]) / (2.0 * penalty);
    if (grad) *grad += s * f.op;
  }
  for (std::size_t k = 0; k < cc.equalities.size(); ++k) {
    const auto& e = cc.equalities[k];
    const Matrix c = cc.marginal(rho, e.keep) - e.target;
    p += (lambda[k] * c).trace().real() + 0.5 * penalty * c.squaredNorm();
    if (grad) *grad += cc.lift(lambda[k] + penalty * c, e.keep);
  }
  return p;
}

double AugmentedLagrangian::violation(const CompiledConstraint& cc, const Matrix& rho) const {
  double v = 0.0;
  for (const auto& f : cc.inequalities) v = std::max(v, (f.op * rho).trace().real() - f.bound);
  for (const auto& e : cc.equalities) v = std::max(v, max_abs(cc.marginal(rho, e.keep) - e.target));
  return v;
}

double AugmentedLagrangian::update(const CompiledConstraint& cc, const Matrix& rho) {
  const double v = violation(cc, rho);
  for (std::size_t k = 0; k < cc.inequalities.size(); ++k) {
    const auto& f = cc.inequalities[k];
    mu[k] = std::max(0.0, mu[k] + penalty * ((f.op * rho).trace().real() - f.bound));
  }
  for (std::size_t k = 0; k < cc.equalities.size(); ++k) {
    const auto& e = cc.equalities[k];
    lambda[k] = hermitian_part(lambda[k] + penalty * (cc.marginal(rho, e.keep) - e.target));
  }
  return v;
}

void prune_and_merge(std::vector<double>& weights, std::vector<Matrix>& states) {
  std::vector<double> w;
  std::vector<Matrix> s;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] >= 1e-8) {
      w.push_back(weights[i]);
      s.push_back(states[i]);
    }
  }
  if (w.empty()) {
    const auto it = std::max_element(weights.begin(), weights.end());
    w.push_back(*it);
    s.push_back(states[static_cast<std::size_t>(it - weights.begin())]);
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;

  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size();) {
      if ((s[i] * s[j]).trace().real() > 1.0 - 1e-8) {
        const double sum = w[i] + w[j];
        s[i] = (w[i] * s[i] + w[j] * s[j]) / sum;
        w[i] = sum;
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(j));
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(j));
      } else {
        ++j;
      }
    }
  }
  weights = std::move(w);
  states = std::move(s);
}

void repair_feasibility(const CompiledConstraint& cc, std::vector<double>& weights, std::vector<Matrix>& states) {
  if (!cc.has_functionals()) return;
  Matrix m = Matrix::Zero(states.front().rows(), states.front().cols());
  for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * states[i];
  const Matrix ml = cc.marginal(m, Side::Left);
  const Matrix mr = cc.marginal(m, Side::Right);

  double t = 0.0;
  for (const auto side : {Side::Left, Side::Right}) {
    const FactorConstraint& f = side == Side::Left ? cc.left : cc.right;
    const Matrix& mf = side == Side::Left ? ml : mr;
    if (f.kind == FactorConstraint::Kind::Linear) {
      const double c = (f.effect * mf).trace().real();
      if (c > f.alpha) t = std::max(t, (c - f.alpha) / (c - f.min_value));
    } else if (f.kind == FactorConstraint::Kind::Singleton) {
      t = std::max(t, singleton_mixing(f, mf));
    }
  }
  if (t <= 0.0) return;
  t = std::min(1.0, t * (1.0 + 1e-12) + 1e-15);

  const auto factor_state = [&](const FactorConstraint& f, const Matrix& mf) -> Matrix {
    switch (f.kind) {
      case FactorConstraint::Kind::Linear:
        return f.min_vector * f.min_vector.adjoint();
      case FactorConstraint::Kind::Singleton: {
        // On the PSD boundary by construction; clip the roundoff that 1/t amplifies.
        const Matrix tau =
            spectral_apply(eigh((f.rho - (1.0 - t) * mf) / t), [](double x) { return std::max(x, 0.0); });
        return tau / tau.trace().real();
      }
      case FactorConstraint::Kind::Full:
        break;
    }
    return mf / mf.trace().real();
  };
  const Matrix tau = kron(factor_state(cc.left, ml), factor_state(cc.right, mr));
  for (double& w : weights) w *= 1.0 - t;
  weights.push_back(t);
  states.push_back(tau);
}

Ensemble make_ensemble(const std::vector<double>& weights, const std::vector<Matrix>& states) {
  std::vector<DensityMatrix> dms;
  dms.reserve(states.size());
  for (const auto& s : states) {
    const Matrix h = hermitian_part(s);
    dms.emplace_back(h / h.trace().real());
  }
  return Ensemble::normalized(weights, std::move(dms));
}

namespace {

void members_from_psi(const Matrix& psi, std::vector<double>& weights, std::vector<Matrix>& states) {
  weights.clear();
  states.clear();
  for (Eigen::Index i = 0; i < psi.cols(); ++i) {
    const double p = psi.col(i).squaredNorm();
    if (!(p > 0.0)) continue;
    weights.push_back(p);
    states.push_back(psi.col(i) * psi.col(i).adjoint() / p);
  }
}

void finish(const ChiObjective& obj, EngineSolution& sol) {
  sol.value = obj.spec().evaluate(make_ensemble(sol.weights, sol.states));
}

}  // namespace

EngineSolution solve_free(const ChiObjective& obj, const CompiledConstraint& cc, const OptimizerConfig& cfg) {
  const Matrix& v = cc.subspace;
  const Eigen::Index r = v.cols();
  const std::size_t d = obj.din();
  const auto m = static_cast<Eigen::Index>(cfg.ensemble_size != 0 ? cfg.ensemble_size : d * d);
  const bool constrained = cc.has_functionals();
  const LbfgsOptions opts = inner_options(cfg);

  EngineSolution best;
  bool have = false;
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
    RealVector x = pack(random_ginibre(static_cast<std::size_t>(r), static_cast<std::size_t>(m), rng));
    x /= x.norm();
    AugmentedLagrangian al;
    al.reset(cc);

    const auto psi_of = [&](const RealVector& z) -> Matrix { return v * unpack(z / z.norm(), r, m); };
    const ObjectiveFn fn = [&](const RealVector& z, RealVector& g) {
      const double nrm = z.norm();
      const Matrix psi = psi_of(z);
      Matrix grad;
      double f = obj.evaluate(psi, &grad);
      if (constrained) {
        Matrix gp;
        f -= al.evaluate(cc, psi * psi.adjoint(), &gp);
        grad -= gp * psi;
      }
      g = pack_gradient(v.adjoint() * grad);
      const RealVector u = z / nrm;
      g = (g - u.dot(g) * u) / nrm;
      return f;
    };

    EngineSolution sol;
    double previous = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < (constrained ? 60 : 1); ++outer) {
      const LbfgsResult res = lbfgs_maximize(fn, x, opts);
      x = res.x / res.x.norm();
      sol.iterations += res.iterations;
      sol.converged = res.converged;
      if (!constrained) break;
      const Matrix psi = psi_of(x);
      const double viol = al.violation(cc, psi * psi.adjoint());
      if (viol <= 1e-9) break;
      al.update(cc, psi * psi.adjoint());
      if (viol > 0.25 * previous) al.penalty = std::min(al.penalty * 10.0, 1e6);
      previous = viol;
    }
    sol.multipliers = al;
    members_from_psi(psi_of(x), sol.weights, sol.states);
    prune_and_merge(sol.weights, sol.states);
    repair_feasibility(cc, sol.weights, sol.states);
    finish(obj, sol);
    if (!have || sol.value > best.value) {
      best = std::move(sol);
      have = true;
    }
  }
  return best;
}

EngineSolution solve_decomposition(const ChiObjective& obj, const Matrix& rho, const OptimizerConfig& cfg) {
  const Spectrum sp = eigh(rho);
  std::vector<Eigen::Index> support;
  for (Eigen::Index k = 0; k < sp.values.size(); ++k)
    if (sp.values[k] > kEigenFloor) support.push_back(k);
  const auto r = static_cast<Eigen::Index>(support.size());
  Matrix b(rho.rows(), r);
  for (Eigen::Index k = 0; k < r; ++k)
    b.col(k) = std::sqrt(sp.values[support[static_cast<std::size_t>(k)]]) * sp.vectors.col(support[static_cast<std::size_t>(k)]);
  const std::size_t d = obj.din();
  const auto m = std::max<Eigen::Index>(r, static_cast<Eigen::Index>(cfg.ensemble_size != 0 ? cfg.ensemble_size : d * d));

  // W = (Y Y^dagger)^(-1/2) Y has orthonormal rows, so B W is a decomposition of rho for every full-rank Y.
  const auto orthonormalize = [](const Matrix& y) -> Matrix {
    const Spectrum s = eigh(y * y.adjoint());
    return spectral_apply(s, [](double x) { return 1.0 / std::sqrt(x); }) * y;
  };
  const ObjectiveFn fn = [&](const RealVector& z, RealVector& g) {
    const Matrix y = unpack(z, r, m);
    const Spectrum s = eigh(y * y.adjoint());
    if (!(s.values[0] > 1e-200)) {
      g.setZero(z.size());
      return -std::numeric_limits<double>::infinity();
    }
    const Matrix& u = s.vectors;
    const RealVector inv_sqrt = s.values.cwiseSqrt().cwiseInverse();
    const Matrix t = u * inv_sqrt.cast<Complex>().asDiagonal() * u.adjoint();
    const Matrix w = t * y;
    Matrix gpsi;
    const double f = obj.evaluate(b * w, &gpsi);
    const Matrix gw = b.adjoint() * gpsi;
    // Derivative of S^(-1/2) through divided differences in the eigenbasis of S.
    Matrix l(r, r);
    for (Eigen::Index a = 0; a < r; ++a) {
      for (Eigen::Index c = 0; c < r; ++c) {
        const double da = s.values[a];
        const double dc = s.values[c];
        if (std::abs(da - dc) <= 1e-10 * std::max(da, dc))
          l(a, c) = -0.5 * std::pow(0.5 * (da + dc), -1.5);
        else
          l(a, c) = (inv_sqrt[a] - inv_sqrt[c]) / (da - dc);
      }
    }
    const Matrix kp = u.adjoint() * (y * gw.adjoint()) * u;
    const Matrix n = u * l.cwiseProduct(kp) * u.adjoint();
    g = pack_gradient(t * gw + (n + n.adjoint()) * y);
    return f;
  };

  LbfgsOptions opts = inner_options(cfg);
  opts.max_iterations = std::max(50, cfg.max_iterations / 4);

  EngineSolution best;
  bool have = false;
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
    Matrix y = random_ginibre(static_cast<std::size_t>(r), static_cast<std::size_t>(m), rng);
    EngineSolution sol;
    for (int cycle = 0; cycle < 4; ++cycle) {
      const LbfgsResult res = lbfgs_maximize(fn, pack(orthonormalize(y)), opts);
      y = unpack(res.x, r, m);
      sol.iterations += res.iterations;
      sol.converged = res.converged;
      if (res.converged && res.iterations < 5) break;
    }
    Matrix w = orthonormalize(y);
    // Drop negligible members and restore the exact average.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m; ++i)
      if ((b * w.col(i)).squaredNorm() >= 1e-8) keep.push_back(i);
    Matrix wk(r, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) wk.col(static_cast<Eigen::Index>(i)) = w.col(keep[i]);
    if (keep.size() >= static_cast<std::size_t>(r) && eigenvalues_h(wk * wk.adjoint())[0] > 1e-6) w = orthonormalize(wk);
    members_from_psi(b * w, sol.weights, sol.states);
    prune_and_merge(sol.weights, sol.states);
    finish(obj, sol);
    if (!have || sol.value > best.value) {
      best = std::move(sol);
      have = true;
    }
  }
  return best;
}

SphereSearchResult maximize_on_sphere(const DivergenceObjective& obj, const Matrix& subspace,
                                      const std::vector<Vector>& starts, int random_starts, std::uint64_t seed,
                                      int max_iterations) {
  const Eigen::Index r = subspace.cols();
  if (r == 0) throw InternalConsistencyError("sphere search: empty subspace");
  SphereSearchResult best;
  if (r == 1) {
    best.psi = subspace.col(0);
    best.value = obj.evaluate(best.psi, nullptr);
    return best;
  }
  const ObjectiveFn fn = [&](const RealVector& z, RealVector& g) {
    const double nrm = z.norm();
    const Vector y = unpack(z / nrm, r, 1);
    Vector grad;
    const double f = obj.evaluate(subspace * y, &grad);
    g = pack_gradient(subspace.adjoint() * grad);
    const RealVector u = z / nrm;
    g = (g - u.dot(g) * u) / nrm;
    return f;
  };
  std::vector<Vector> inits;
  for (const auto& s : starts) {
    const Vector y = subspace.adjoint() * s;
    if (y.norm() > 1e-8) inits.push_back(y / y.norm());
  }
  Rng rng(seed);
  for (int k = 0; k < random_starts; ++k) inits.push_back(random_unit_vector(static_cast<std::size_t>(r), rng));

  LbfgsOptions opts;
  opts.max_iterations = max_iterations;
  opts.value_tol = 1e-14;
  opts.stall_iterations = 10;
  bool have = false;
  for (const auto& y0 : inits) {
    const LbfgsResult res = lbfgs_maximize(fn, pack(y0), opts);
    if (!have || res.value > best.value) {
      const Vector y = unpack(res.x / res.x.norm(), r, 1);
      best.psi = subspace * y;
      best.value = res.value;
      have = true;
    }
  }
  return best;
}

}  // namespace detail
}  // namespace chicap
