#include "urnsa/oracle.hpp"

#include "urnsa/errors.hpp"
#include "urnsa/state.hpp"
#include "urnsa/urn.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace urnsa {

namespace {

using Rational = boost::multiprecision::cpp_rational;

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw InputError("oracle: non-finite parameter");
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  // 53-bit integer mantissa times a power of two.
  const auto m = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(m);
  if (exponent > 0) {
    r *= Rational(boost::multiprecision::cpp_int(1) << exponent);
  } else if (exponent < 0) {
    r /= Rational(boost::multiprecision::cpp_int(1) << -exponent);
  }
  return r;
}

template <typename Num>
Num from_double(double x);
template <>
Rational from_double<Rational>(double x) { return exact_rational(x); }
template <>
long double from_double<long double>(double x) { return static_cast<long double>(x); }

double to_double(const Rational& x) { return x.convert_to<double>(); }
double to_double(long double x) { return static_cast<double>(x); }

template <typename Num>
struct Node {
  std::vector<Num> Y, N, S;
  Num prob;
  std::int64_t paths = 1;
};

template <typename Num>
struct Branch {
  Eigen::Index arm;
  bool success;
  Num prob;              // P(arm, response | node)
  std::vector<Num> add;  // added column
};

// Every (arm, response) branch with positive probability out of `node`.
template <typename Num>
std::vector<Branch<Num>> branches(const Node<Num>& node, ModelKind kind,
                                  const std::vector<Num>& p) {
  const std::size_t d = node.Y.size();
  Num w = 0;
  for (const auto& y : node.Y) w += y;
  std::vector<Branch<Num>> out;
  for (std::size_t j = 0; j < d; ++j) {
    if (!(node.Y[j] > 0)) continue;
    const Num draw = node.Y[j] / w;
    Branch<Num> success{static_cast<Eigen::Index>(j), true, draw * p[j], std::vector<Num>(d, Num(0))};
    success.add[j] = 1;
    out.push_back(success);

    Branch<Num> failure{static_cast<Eigen::Index>(j), false, draw * (Num(1) - p[j]),
                        std::vector<Num>(d, Num(0))};
    if (kind == ModelKind::wei) {
      for (std::size_t i = 0; i < d; ++i) {
        if (i != j) failure.add[i] = Num(1) / Num(static_cast<int>(d - 1));
      }
    } else {
      Num denom = 0;
      for (std::size_t k = 0; k < d; ++k) {
        if (k != j) denom += node.S[k] / node.N[k];
      }
      if (!(denom > 0)) throw SingularityError("oracle: BHS failure column has zero denominator");
      for (std::size_t i = 0; i < d; ++i) {
        if (i != j) failure.add[i] = (node.S[i] / node.N[i]) / denom;
      }
    }
    out.push_back(failure);
  }
  return out;
}

template <typename Num>
Node<Num> child(const Node<Num>& node, const Branch<Num>& b) {
  Node<Num> c = node;
  const auto j = static_cast<std::size_t>(b.arm);
  for (std::size_t i = 0; i < c.Y.size(); ++i) c.Y[i] += b.add[i];
  c.N[j] += 1;
  if (b.success) c.S[j] += 1;
  c.prob = node.prob * b.prob;
  return c;
}

template <typename Num>
std::vector<Num> convert(const Vector& v) {
  std::vector<Num> out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(from_double<Num>(v(i)));
  return out;
}

template <typename Num>
Vector to_vector(const std::vector<Num>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = to_double(v[i]);
  return out;
}

template <typename Num>
std::vector<std::int64_t> node_key(const Node<Num>& n) {
  return state_key(to_vector(n.Y), to_vector(n.N), to_vector(n.S));
}

std::vector<Rational> exact_key(const Node<Rational>& n) {
  std::vector<Rational> key = n.Y;
  key.insert(key.end(), n.N.begin(), n.N.end());
  key.insert(key.end(), n.S.begin(), n.S.end());
  return key;
}

template <typename Num, typename Key, typename KeyFn>
std::vector<Node<Num>> merge(std::vector<Node<Num>>&& level, KeyFn key_of) {
  std::map<Key, std::size_t> index;
  std::vector<Node<Num>> merged;
  for (auto& node : level) {
    auto key = key_of(node);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(std::move(key), merged.size());
      merged.push_back(std::move(node));
    } else {
      merged[it->second].prob += node.prob;
      merged[it->second].paths += node.paths;
    }
  }
  return merged;
}

void check_oracle_model(const ModelSpec& model, int horizon) {
  if (model.kind() != ModelKind::wei && model.kind() != ModelKind::bhs) {
    throw InputError("oracle: only the wei and bhs designs can be enumerated");
  }
  if (model.dim() > kOracleMaxDim || horizon > kOracleMaxHorizon || horizon < 0) {
    std::ostringstream msg;
    msg << "oracle: size guard exceeded (d = " << model.dim() << ", n = " << horizon
        << "; limits d ≤ " << kOracleMaxDim << ", n ≤ " << kOracleMaxHorizon << ", up to "
        << "(2d)^n = " << std::pow(2.0 * static_cast<double>(model.dim()), horizon)
        << " paths)";
    throw OracleSizeError(msg.str());
  }
}

template <typename Num>
Node<Num> root(const ModelSpec& model) {
  const auto& init = model.initial();
  return {convert<Num>(init.y0), convert<Num>(init.n0), convert<Num>(init.s0), Num(1), 1};
}

// Breadth-first expansion with merging after every level. `visit` sees every
// node from which a step is taken.
template <typename Num, typename Key, typename KeyFn>
std::vector<Node<Num>> expand(const ModelSpec& model, int horizon, KeyFn key_of,
                              std::int64_t& raw_paths,
                              const std::function<void(const Node<Num>&)>& visit) {
  const std::vector<Num> p = convert<Num>(model.p());
  std::vector<Node<Num>> level{root<Num>(model)};
  for (int step = 0; step < horizon; ++step) {
    std::vector<Node<Num>> next;
    for (const auto& node : level) {
      if (visit) visit(node);
      for (const auto& b : branches(node, model.kind(), p)) {
        if (!(b.prob > 0)) continue;
        next.push_back(child(node, b));
      }
    }
    level = merge<Num, Key>(std::move(next), key_of);
  }
  raw_paths = 0;
  for (const auto& n : level) raw_paths += n.paths;
  return level;
}

template <typename Num>
ExactOutcome make_outcome(const Node<Num>& node) {
  ExactOutcome o;
  o.probability = to_double(node.prob);
  o.Y = to_vector(node.Y);
  o.N = to_vector(node.N);
  o.S = to_vector(node.S);
  o.Pi = o.S.cwiseQuotient(o.N);
  o.paths = node.paths;
  return o;
}

}  // namespace

std::vector<std::int64_t> state_key(const Vector& Y, const Vector& N, const Vector& S,
                                    double quantum) {
  std::vector<std::int64_t> key;
  key.reserve(static_cast<std::size_t>(Y.size() + N.size() + S.size()));
  for (const Vector* v : {&Y, &N, &S}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) {
      key.push_back(static_cast<std::int64_t>(std::llround((*v)(i) / quantum)));
    }
  }
  return key;
}

ExactLaw enumerate_exact(const ModelSpec& model, int horizon) {
  check_oracle_model(model, horizon);
  ExactLaw law;
  law.kind = model.kind();
  law.horizon = horizon;
  law.rational = model.dim() == 2 && horizon <= 6;
  if (law.rational) {
    const auto level = expand<Rational, std::vector<Rational>>(model, horizon, exact_key,
                                                               law.raw_paths, {});
    Rational mass = 0;
    for (const auto& node : level) {
      ExactOutcome o = make_outcome(node);
      o.exact_probability = node.prob.str();
      mass += node.prob;
      law.outcomes.push_back(std::move(o));
    }
    law.total_mass = to_double(mass);
    law.mass_exact = mass == 1;
  } else {
    const auto level = expand<long double, std::vector<std::int64_t>>(
        model, horizon, node_key<long double>, law.raw_paths, {});
    long double mass = 0;
    for (const auto& node : level) {
      law.outcomes.push_back(make_outcome(node));
      mass += node.prob;
    }
    law.total_mass = static_cast<double>(mass);
  }
  return law;
}

ExactMoments exact_moments(const ExactLaw& law) {
  if (law.outcomes.empty()) throw InputError("exact_moments: empty law");
  const Eigen::Index d = law.outcomes.front().Y.size();
  using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  LVector mean = LVector::Zero(3 * d);
  LMatrix second = LMatrix::Zero(3 * d, 3 * d);
  for (const auto& o : law.outcomes) {
    LVector z(3 * d);
    z << o.Y.cast<long double>(), o.N.cast<long double>(), o.S.cast<long double>();
    const long double w = o.probability;
    mean += w * z;
    second += w * z * z.transpose();
  }
  ExactMoments m;
  m.mean = mean.cast<double>();
  m.covariance = (second - mean * mean.transpose()).cast<double>();
  return m;
}

TreeIdentityReport check_tree_identities(const ModelSpec& model, int horizon) {
  check_oracle_model(model, horizon);
  TreeIdentityReport report;
  const std::vector<long double> p = convert<long double>(model.p());
  const Eigen::Index d = model.dim();
  std::int64_t raw = 0;
  std::function<void(const Node<long double>&)> visit = [&](const Node<long double>& node) {
    ++report.nodes;
    UrnState state;
    state.Y = to_vector(node.Y);
    state.N = to_vector(node.N);
    state.S = to_vector(node.S);
    state.w = state.Y.sum();
    state.n = static_cast<std::int64_t>(std::llround(state.N.sum() - model.initial().n0.sum()));

    Eigen::Matrix<long double, Eigen::Dynamic, 1> mean = decltype(mean)::Zero(d);
    Eigen::Matrix<long double, Eigen::Dynamic, 1> mart = decltype(mart)::Zero(d);
    long double w = 0;
    for (const auto& y : node.Y) w += y;
    for (const auto& b : branches(node, model.kind(), p)) {
      for (Eigen::Index i = 0; i < d; ++i) mean(i) += b.prob * b.add[static_cast<std::size_t>(i)];
      // The urn's own step at the draw value that lands in this arm's cell.
      const auto arm = static_cast<std::size_t>(b.arm);
      long double lower = 0;
      for (std::size_t k = 0; k < arm; ++k) lower += node.Y[k];
      const auto u = static_cast<double>((lower + node.Y[arm] / 2) / w);
      const StepResult r = step(state, model, u, b.success ? 1 : 0);
      if (r.record.drawn_arm != b.arm) throw NumericalError("oracle: draw cell mismatch");
      mart += b.prob * r.record.delta_M.cast<long double>();
    }
    const Vector target = model.generating_matrix(state) * state.Y / state.w;
    report.max_conditional_mean_residual =
        std::max(report.max_conditional_mean_residual,
                 (mean.cast<double>() - target).cwiseAbs().maxCoeff());
    report.max_martingale_mean =
        std::max(report.max_martingale_mean, static_cast<double>(mart.cwiseAbs().maxCoeff()));
  };
  expand<long double, std::vector<std::int64_t>>(model, horizon, node_key<long double>, raw,
                                                 visit);
  return report;
}

Matrix enumerated_increment_covariance(const ModelSpec& model, const Vector& Y, const Vector& N,
                                       const Vector& S, bool extended) {
  if (model.kind() != ModelKind::wei && model.kind() != ModelKind::bhs) {
    throw InputError("oracle: only the wei and bhs designs can be enumerated");
  }
  const Eigen::Index d = model.dim();
  if (Y.size() != d || N.size() != d || S.size() != d) {
    throw InputError("oracle: state has the wrong dimension");
  }
  const std::vector<long double> p = convert<long double>(model.p());
  const Node<long double> node{convert<long double>(Y), convert<long double>(N),
                               convert<long double>(S), 1.0L, 1};
  const Eigen::Index size = extended ? 3 * d : 2 * d;
  using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  LVector mean = LVector::Zero(size);
  LMatrix second = LMatrix::Zero(size, size);
  for (const auto& b : branches(node, model.kind(), p)) {
    LVector z = LVector::Zero(size);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = b.add[static_cast<std::size_t>(i)];
    z(d + b.arm) = 1;
    if (extended && b.success) z(2 * d + b.arm) = 1;
    mean += b.prob * z;
    second += b.prob * z * z.transpose();
  }
  return (second - mean * mean.transpose()).cast<double>();
}

}  // namespace urnsa
