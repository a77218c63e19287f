#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frbm/assembly.hpp"
#include "frbm/common.hpp"
#include "frbm/constants.hpp"
#include "frbm/mesh.hpp"
#include "frbm/quadrature.hpp"
#include "frbm/solve.hpp"

namespace frbm {

using ParameterVector = std::vector<double>;
using ThetaFn = std::function<double(const ParameterVector&)>;

struct AffineTerm {
  ThetaFn theta;
  DenseOperator matrix;
};

struct AffineLoad {
  ThetaFn theta;
  Eigen::VectorXd vector;
};

/// Parameter-separable problem a(.,.;mu) = sum theta_q(mu) a_q(.,.). The
/// parameter-independent matrices are assembled once; everything mu-dependent
/// is a scalar combination. d_of_mu / r_of_mu rebuild the actual coefficients
/// for direct assembly cross-checks and for the coercivity statistics.
struct AffineProblem {
  std::string name;
  double s = 1.5;
  Mesh mesh{2};
  std::vector<AffineTerm> diffusion;
  std::vector<AffineTerm> reaction;
  std::vector<AffineLoad> loads;
  std::vector<std::array<double, 2>> box;
  AlphaVariant variant = AlphaVariant::Alpha;
  std::function<Coefficient(const ParameterVector&)> d_of_mu;
  std::function<Coefficient(const ParameterVector&)> r_of_mu;

  std::size_t dim() const { return box.size(); }
  int n_dofs() const { return mesh.n_interior(); }
  std::size_t n_operator_terms() const { return diffusion.size() + reaction.size(); }

  bool in_box(const ParameterVector& mu) const {
    if (mu.size() != box.size()) return false;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu[i] < box[i][0] || mu[i] > box[i][1]) return false;
    return true;
  }

  void check_mu(const ParameterVector& mu) const {
    require(in_box(mu), "AffineProblem: parameter outside the declared box");
  }

  const AffineTerm& operator_term(std::size_t q) const {
    return q < diffusion.size() ? diffusion[q] : reaction[q - diffusion.size()];
  }

  DenseOperator assemble_operator(const ParameterVector& mu) const {
    check_mu(mu);
    DenseOperator A = DenseOperator::Zero(n_dofs(), n_dofs());
    for (const auto& t : diffusion) A += t.theta(mu) * t.matrix;
    for (const auto& t : reaction) A += t.theta(mu) * t.matrix;
    return A;
  }

  Eigen::VectorXd assemble_load(const ParameterVector& mu) const {
    check_mu(mu);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_dofs());
    for (const auto& l : loads) b += l.theta(mu) * l.vector;
    return b;
  }
};

inline void validate_affine_problem(const AffineProblem& p) {
  require(!p.diffusion.empty(),
          "AffineProblem: at least one diffusion component is required");
  require(!p.loads.empty(), "AffineProblem: a load component is required");
  require(!p.box.empty(), "AffineProblem: parameter box must be nonempty");
  require(static_cast<bool>(p.d_of_mu) && static_cast<bool>(p.r_of_mu),
          "AffineProblem: coefficient rebuilders required");
}

/// Coercivity lower bound at a parameter, from exact coefficient statistics.
inline double parametric_alpha(const AffineProblem& p, const ParameterVector& mu,
                               AlphaVariant variant) {
  p.check_mu(mu);
  CoefficientStats ds = coefficient_stats(p.d_of_mu(mu));
  CoefficientStats rs = coefficient_stats(p.r_of_mu(mu));
  return alpha_from_stats(p.s, ds, rs, variant);
}

inline double parametric_alpha(const AffineProblem& p, const ParameterVector& mu) {
  return parametric_alpha(p, mu, p.variant);
}

/// Quarter-piecewise diffusion with theta = (1, mu1, mu2, mu3), reaction
/// mu4 + mu5 x, fixed load x(1-x). Components use the ungated assembly since
/// indicator pieces vanish on most of the domain; the summed operator is the
/// one that must be elliptic, which the box guarantees.
inline AffineProblem build_greedy_case1(const Mesh& mesh, double s) {
  FracOrder order(s);
  AffineProblem p;
  p.name = "greedy-case-1";
  p.s = s;
  p.mesh = mesh;
  const std::vector<double> quarters{0.0, 0.25, 0.5, 0.75, 1.0};
  for (int q = 0; q < 4; ++q) {
    std::vector<double> vals(4, 0.0);
    vals[q] = 1.0;
    Coefficient ind = Coefficient::piecewise_constant(quarters, vals);
    AffineTerm t;
    t.matrix = assemble_diffusion_component(mesh, order, ind);
    t.theta = (q == 0) ? ThetaFn([](const ParameterVector&) { return 1.0; })
                       : ThetaFn([q](const ParameterVector& mu) {
                           return mu[static_cast<std::size_t>(q - 1)];
                         });
    p.diffusion.push_back(std::move(t));
  }
  {
    AffineTerm t;
    t.matrix = assemble_mass(mesh);
    t.theta = [](const ParameterVector& mu) { return mu[3]; };
    p.reaction.push_back(std::move(t));
  }
  {
    AffineTerm t;
    t.matrix = assemble_reaction(mesh, Coefficient::affine(0.0, 1.0));
    t.theta = [](const ParameterVector& mu) { return mu[4]; };
    p.reaction.push_back(std::move(t));
  }
  {
    AffineLoad l;
    l.vector = frbm::assemble_load(mesh, PowerSum{{1.0, 1.0}, {-1.0, 2.0}});
    l.theta = [](const ParameterVector&) { return 1.0; };
    p.loads.push_back(std::move(l));
  }
  p.box = {{0.7, 1.3}, {0.7, 1.3}, {0.7, 1.3}, {0.0, 1.0}, {0.0, 1.0}};
  p.d_of_mu = [quarters](const ParameterVector& mu) {
    return Coefficient::piecewise_constant(quarters, {1.0, mu[0], mu[1], mu[2]});
  };
  p.r_of_mu = [](const ParameterVector& mu) {
    return Coefficient::affine(mu[3], mu[4]);
  };
  validate_affine_problem(p);
  return p;
}

/// -D^s u + mu u = f with d = 1, mu in [0, mu_plus]; the setting of the
/// n-width bound. Load kept at x(1-x).
inline AffineProblem build_constant_diffusion(const Mesh& mesh, double s,
                                              double mu_plus = 1.0) {
  FracOrder order(s);
  require(mu_plus > 0.0, "build_constant_diffusion: mu_plus must be positive");
  AffineProblem p;
  p.name = "constant-diffusion";
  p.s = s;
  p.mesh = mesh;
  {
    AffineTerm t;
    t.matrix = assemble_diffusion(mesh, order, Coefficient::constant(1.0));
    t.theta = [](const ParameterVector&) { return 1.0; };
    p.diffusion.push_back(std::move(t));
  }
  {
    AffineTerm t;
    t.matrix = assemble_mass(mesh);
    t.theta = [](const ParameterVector& mu) { return mu[0]; };
    p.reaction.push_back(std::move(t));
  }
  {
    AffineLoad l;
    l.vector = frbm::assemble_load(mesh, PowerSum{{1.0, 1.0}, {-1.0, 2.0}});
    l.theta = [](const ParameterVector&) { return 1.0; };
    p.loads.push_back(std::move(l));
  }
  p.box = {{0.0, mu_plus}};
  p.d_of_mu = [](const ParameterVector&) { return Coefficient::constant(1.0); };
  p.r_of_mu = [](const ParameterVector& mu) {
    return Coefficient::constant(mu[0]);
  };
  validate_affine_problem(p);
  return p;
}

inline AffineProblem build_affine_problem(const std::string& name,
                                          const Mesh& mesh, double s) {
  if (name == "greedy-case-1") return build_greedy_case1(mesh, s);
  if (name == "constant-diffusion") return build_constant_diffusion(mesh, s);
  throw ValidationError("build_affine_problem: unknown problem name '" + name +
                        "'");
}

/// Tensor grid of mapped Gauss-Legendre nodes; the training set of the
/// offline stage. Last dimension varies fastest.
inline std::vector<ParameterVector> gauss_legendre_grid(
    const std::vector<std::array<double, 2>>& box, int points_per_dim,
    std::size_t cap = 1000000) {
  require(points_per_dim >= 1, "gauss_legendre_grid: need at least one point");
  require(!box.empty(), "gauss_legendre_grid: empty box");
  std::size_t total = 1;
  for (std::size_t d = 0; d < box.size(); ++d) {
    require(box[d][1] > box[d][0], "gauss_legendre_grid: degenerate box side");
    total *= static_cast<std::size_t>(points_per_dim);
    require(total <= cap, "gauss_legendre_grid: training set exceeds the cap");
  }
  QuadratureRule rule = gauss_legendre(points_per_dim);
  std::vector<std::vector<double>> axes(box.size());
  for (std::size_t d = 0; d < box.size(); ++d)
    for (double t : rule.nodes)
      axes[d].push_back(box[d][0] + (box[d][1] - box[d][0]) * t);
  std::vector<ParameterVector> grid;
  grid.reserve(total);
  std::vector<std::size_t> idx(box.size(), 0);
  for (std::size_t count = 0; count < total; ++count) {
    ParameterVector mu(box.size());
    for (std::size_t d = 0; d < box.size(); ++d) mu[d] = axes[d][idx[d]];
    grid.push_back(std::move(mu));
    for (std::size_t d = box.size(); d-- > 0;) {
      if (++idx[d] < static_cast<std::size_t>(points_per_dim)) break;
      idx[d] = 0;
    }
  }
  return grid;
}

/// Memoized truth solver. Keys are the exact parameter doubles, so repeat
/// queries return the identical vector. An optional directory persists
/// solutions across processes.
class TruthCache {
 public:
  explicit TruthCache(const AffineProblem* problem,
                      std::optional<std::string> dir = std::nullopt)
      : problem_(problem), dir_(std::move(dir)) {
    if (dir_) std::filesystem::create_directories(*dir_);
  }

  const Eigen::VectorXd& solve(const ParameterVector& mu) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(mu);
      if (it != cache_.end()) return it->second;
    }
    Eigen::VectorXd u;
    if (!dir_ || !load_disk(mu, u)) {
      u = solve_dense(problem_->assemble_operator(mu),
                      problem_->assemble_load(mu));
      if (dir_) store_disk(mu, u);
    }
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(mu, std::move(u)).first->second;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
  }

 private:
  std::string key_path(const ParameterVector& mu) const {
    std::string key;
    char buf[40];
    for (double v : mu) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      key += buf;
    }
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(key)));
    return *dir_ + "/" + buf + ".vec";
  }

  bool load_disk(const ParameterVector& mu, Eigen::VectorXd& u) const {
    std::ifstream in(key_path(mu));
    if (!in) return false;
    std::size_t n = 0;
    in >> n;
    if (!in || n != static_cast<std::size_t>(problem_->n_dofs())) return false;
    u.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) in >> u(static_cast<Eigen::Index>(i));
    return static_cast<bool>(in);
  }

  void store_disk(const ParameterVector& mu, const Eigen::VectorXd& u) const {
    std::ofstream out(key_path(mu));
    if (!out) throw IoError("TruthCache: cannot write cache file");
    out << u.size() << "\n";
    char buf[40];
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g\n", u(i));
      out << buf;
    }
  }

  const AffineProblem* problem_;
  std::optional<std::string> dir_;
  mutable std::mutex mutex_;
  std::map<ParameterVector, Eigen::VectorXd> cache_;
};

inline PiecewiseLinearFn truth_solve(const AffineProblem& p, TruthCache& cache,
                                     const ParameterVector& mu) {
  return PiecewiseLinearFn(p.mesh, cache.solve(mu));
}

}  // namespace frbm
