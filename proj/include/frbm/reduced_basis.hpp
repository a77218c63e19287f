#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "frbm/affine.hpp"
#include "frbm/assembly.hpp"
#include "frbm/common.hpp"
#include "frbm/io.hpp"
#include "frbm/solve.hpp"

namespace frbm {

enum class GreedyMode { Weak, Strong };

inline std::string greedy_mode_name(GreedyMode m) {
  return m == GreedyMode::Weak ? "weak" : "strong";
}

inline GreedyMode parse_greedy_mode(const std::string& name) {
  if (name == "weak") return GreedyMode::Weak;
  if (name == "strong") return GreedyMode::Strong;
  throw ValidationError("parse_greedy_mode: unknown mode '" + name + "'");
}

/// One greedy sweep: the worst estimator / true error over the training set
/// with the current basis, and the parameter chosen for the next snapshot.
/// max_true_error is NaN in weak mode (no truth sweep there).
struct GreedyRecord {
  int basis_size = 0;
  ParameterVector selected;
  double max_estimator = 0.0;
  double max_true_error = std::numeric_limits<double>::quiet_NaN();
};

using GreedyTrace = std::vector<GreedyRecord>;

/// Certified reduced model. The basis is G-orthonormal where G is the
/// energy (semi-norm) Gram matrix of the truth mesh; all online quantities
/// are parameter-independent blocks of size n or Q, never N.
struct ReducedModel {
  AffineProblem problem;
  Eigen::MatrixXd basis;                              // N x n
  std::vector<Eigen::MatrixXd> a_hat;                 // Qa terms, n x n
  std::vector<Eigen::VectorXd> f_hat;                 // Qf terms, n
  Eigen::MatrixXd res_ff;                             // Qf x Qf
  std::vector<std::vector<Eigen::VectorXd>> res_fa;   // [Qf][Qa], each n
  std::vector<std::vector<Eigen::MatrixXd>> res_aa;   // [Qa][Qa], each n x n
  std::vector<ParameterVector> selected;

  int n() const { return static_cast<int>(basis.cols()); }
  int n_truth() const { return static_cast<int>(basis.rows()); }

  double alpha(const ParameterVector& mu) const {
    return parametric_alpha(problem, mu, problem.variant);
  }
};

namespace detail {

inline std::vector<double> theta_operator(const AffineProblem& p,
                                          const ParameterVector& mu) {
  std::vector<double> th;
  th.reserve(p.n_operator_terms());
  for (const auto& t : p.diffusion) th.push_back(t.theta(mu));
  for (const auto& t : p.reaction) th.push_back(t.theta(mu));
  return th;
}

inline std::vector<double> theta_load(const AffineProblem& p,
                                      const ParameterVector& mu) {
  std::vector<double> th;
  th.reserve(p.loads.size());
  for (const auto& l : p.loads) th.push_back(l.theta(mu));
  return th;
}

inline double clamp_residual_sq(double q, double scale) {
  if (q >= 0.0) return q;
  if (q < -1e-8 * scale)
    throw CertificationError(
        "residual_dual_norm: quadratic form is negative beyond roundoff");
  return 0.0;
}

}  // namespace detail

/// Dual norm of the residual functional of the reduced solution with
/// coefficients y, evaluated through the precomputed Riesz blocks. Pure
/// Q- and n-sized work.
inline double residual_dual_norm(const ReducedModel& m,
                                 const ParameterVector& mu,
                                 const Eigen::VectorXd& y) {
  require(y.size() == m.basis.cols(),
          "residual_dual_norm: coefficient size mismatch");
  const std::vector<double> ta = detail::theta_operator(m.problem, mu);
  const std::vector<double> tf = detail::theta_load(m.problem, mu);
  double q = 0.0;
  double scale = 0.0;
  for (std::size_t a = 0; a < tf.size(); ++a)
    for (std::size_t b = 0; b < tf.size(); ++b) {
      double term = tf[a] * tf[b] * m.res_ff(static_cast<Eigen::Index>(a),
                                             static_cast<Eigen::Index>(b));
      q += term;
      scale += std::abs(term);
    }
  if (y.size() > 0) {
    for (std::size_t a = 0; a < tf.size(); ++a)
      for (std::size_t p = 0; p < ta.size(); ++p) {
        double term = -2.0 * tf[a] * ta[p] * m.res_fa[a][p].dot(y);
        q += term;
        scale += std::abs(term);
      }
    for (std::size_t p = 0; p < ta.size(); ++p)
      for (std::size_t r = 0; r < ta.size(); ++r) {
        double term = ta[p] * ta[r] * y.dot(m.res_aa[p][r] * y);
        q += term;
        scale += std::abs(term);
      }
  }
  return std::sqrt(detail::clamp_residual_sq(q, scale));
}

struct RbSolution {
  Eigen::VectorXd coeffs;
  double residual_dual = 0.0;
  double alpha = 0.0;
  double estimator = 0.0;  // residual_dual / alpha
};

/// Online solve: n x n system plus the certified bound. No N-sized work.
inline RbSolution rb_solve(const ReducedModel& m, const ParameterVector& mu) {
  m.problem.check_mu(mu);
  RbSolution out;
  const int n = m.n();
  if (n == 0) {
    out.coeffs = Eigen::VectorXd();
  } else {
    const std::vector<double> ta = detail::theta_operator(m.problem, mu);
    const std::vector<double> tf = detail::theta_load(m.problem, mu);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t p = 0; p < ta.size(); ++p) A += ta[p] * m.a_hat[p];
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (std::size_t q = 0; q < tf.size(); ++q) b += tf[q] * m.f_hat[q];
    out.coeffs = solve_dense(A, b);
  }
  out.residual_dual = residual_dual_norm(m, mu, out.coeffs);
  out.alpha = m.alpha(mu);
  out.estimator = out.residual_dual / out.alpha;
  return out;
}

inline PiecewiseLinearFn lift(const ReducedModel& m, const Eigen::VectorXd& y) {
  require(y.size() == m.basis.cols(), "lift: coefficient size mismatch");
  Eigen::VectorXd v = m.basis * y;
  if (v.size() == 0) v = Eigen::VectorXd::Zero(m.basis.rows());
  return PiecewiseLinearFn(m.problem.mesh, std::move(v));
}

/// Leading-m sub-model. Greedy appends basis vectors, so every reduced block
/// of the smaller model is a prefix block of the trained one; no recomputation.
inline ReducedModel truncate(const ReducedModel& m, int n_keep) {
  require(n_keep >= 0 && n_keep <= m.n(), "truncate: basis size out of range");
  ReducedModel t;
  t.problem = m.problem;
  t.basis = m.basis.leftCols(n_keep);
  for (const auto& a : m.a_hat) t.a_hat.push_back(a.topLeftCorner(n_keep, n_keep));
  for (const auto& f : m.f_hat) t.f_hat.push_back(f.head(n_keep));
  t.res_ff = m.res_ff;
  t.res_fa.resize(m.res_fa.size());
  for (std::size_t q = 0; q < m.res_fa.size(); ++q)
    for (const auto& v : m.res_fa[q]) t.res_fa[q].push_back(v.head(n_keep));
  t.res_aa.resize(m.res_aa.size());
  for (std::size_t p = 0; p < m.res_aa.size(); ++p)
    for (const auto& a : m.res_aa[p])
      t.res_aa[p].push_back(a.topLeftCorner(n_keep, n_keep));
  t.selected.assign(m.selected.begin(),
                    m.selected.begin() + static_cast<std::ptrdiff_t>(n_keep));
  return t;
}

struct GreedyResult {
  ReducedModel model;
  GreedyTrace trace;
  bool reached_tol = false;
  std::string stop_reason;  // "tol" or "n_max"
};

namespace detail {

/// Rebuild every reduced block from the current basis. Cubic in n and linear
/// in N, negligible next to the truth solves it certifies.
inline void refresh_blocks(ReducedModel& m,
                           const std::vector<const DenseOperator*>& ops,
                           const std::vector<const Eigen::VectorXd*>& fs,
                           const Eigen::LLT<Eigen::MatrixXd>& gram_llt,
                           const std::vector<Eigen::VectorXd>& riesz_f) {
  const auto& B = m.basis;
  const std::size_t qa = ops.size();
  const std::size_t qf = fs.size();
  std::vector<Eigen::MatrixXd> W(qa), C(qa);
  for (std::size_t p = 0; p < qa; ++p) {
    W[p] = (*ops[p]) * B;
    C[p] = gram_llt.solve(W[p]);
  }
  m.a_hat.assign(qa, Eigen::MatrixXd());
  for (std::size_t p = 0; p < qa; ++p) m.a_hat[p] = B.transpose() * W[p];
  m.f_hat.assign(qf, Eigen::VectorXd());
  for (std::size_t q = 0; q < qf; ++q) m.f_hat[q] = B.transpose() * (*fs[q]);
  m.res_fa.assign(qf, std::vector<Eigen::VectorXd>(qa));
  for (std::size_t q = 0; q < qf; ++q)
    for (std::size_t p = 0; p < qa; ++p)
      m.res_fa[q][p] = W[p].transpose() * riesz_f[q];
  m.res_aa.assign(qa, std::vector<Eigen::MatrixXd>(qa));
  for (std::size_t p = 0; p < qa; ++p)
    for (std::size_t r = 0; r < qa; ++r)
      m.res_aa[p][r] = W[p].transpose() * C[r];
}

}  // namespace detail

/// Greedy basis selection over a training set. Weak mode drives selection by
/// the online estimator; strong mode by the true energy error against truth
/// solves. Each sweep is recorded (including the final one), so the trace has
/// one row per basis size from 0 to n_final. On stagnation the rows written
/// so far survive in *live_trace.
inline GreedyResult greedy_train(const AffineProblem& problem,
                                 const std::vector<ParameterVector>& training,
                                 GreedyMode mode, double tol, int n_max,
                                 TruthCache* cache = nullptr,
                                 GreedyTrace* live_trace = nullptr) {
  validate_affine_problem(problem);
  require(!training.empty(), "greedy_train: empty training set");
  require(tol >= 0.0, "greedy_train: tolerance must be nonnegative");
  require(n_max >= 1 && n_max <= problem.n_dofs(),
          "greedy_train: n_max out of range");
  for (const auto& mu : training) problem.check_mu(mu);

  TruthCache local_cache(&problem);
  TruthCache& truths = cache ? *cache : local_cache;

  const FracOrder order(problem.s);
  const DenseOperator G = assemble_seminorm_gram(problem.mesh, order);
  Eigen::LLT<Eigen::MatrixXd> gram_llt(G);
  require(gram_llt.info() == Eigen::Success,
          "greedy_train: Gram factorization failed");

  std::vector<const DenseOperator*> ops;
  for (const auto& t : problem.diffusion) ops.push_back(&t.matrix);
  for (const auto& t : problem.reaction) ops.push_back(&t.matrix);
  std::vector<const Eigen::VectorXd*> fs;
  for (const auto& l : problem.loads) fs.push_back(&l.vector);

  std::vector<Eigen::VectorXd> riesz_f;
  for (const auto* f : fs) riesz_f.push_back(gram_llt.solve(*f));

  const std::size_t m_train = training.size();
  std::vector<double> alphas(m_train);
  for (std::size_t i = 0; i < m_train; ++i)
    alphas[i] = parametric_alpha(problem, training[i], problem.variant);

  // Strong mode needs every truth solution up front.
  if (mode == GreedyMode::Strong)
    for (std::size_t i = 0; i < m_train; ++i) truths.solve(training[i]);

  ReducedModel model;
  model.problem = problem;
  model.basis = Eigen::MatrixXd(problem.n_dofs(), 0);
  model.res_ff = Eigen::MatrixXd(fs.size(), fs.size());
  for (std::size_t a = 0; a < fs.size(); ++a)
    for (std::size_t b = 0; b < fs.size(); ++b)
      model.res_ff(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          fs[a]->dot(riesz_f[b]);
  detail::refresh_blocks(model, ops, fs, gram_llt, riesz_f);

  GreedyResult result;
  GreedyTrace own_trace;
  GreedyTrace& trace = live_trace ? *live_trace : own_trace;
  trace.clear();

  while (true) {
    const int n = model.n();

    double max_est = -1.0, max_err = -1.0, max_sel = -1.0;
    std::size_t arg_sel = 0;
    for (std::size_t i = 0; i < m_train; ++i) {
      RbSolution sol = rb_solve(model, training[i]);
      double err = std::numeric_limits<double>::quiet_NaN();
      if (mode == GreedyMode::Strong) {
        // Direct difference, not the expanded quadratic form: the latter
        // cancels three O(1) terms and floors near 1e-8 relative.
        Eigen::VectorXd e = truths.solve(training[i]);
        if (n > 0) e -= model.basis * sol.coeffs;
        err = std::sqrt(std::max(e.dot(G * e), 0.0));
        if (err > max_err) max_err = err;
      }
      if (sol.estimator > max_est) max_est = sol.estimator;
      const double sel = (mode == GreedyMode::Strong) ? err : sol.estimator;
      if (sel > max_sel) {
        max_sel = sel;
        arg_sel = i;
      }
    }

    GreedyRecord rec;
    rec.basis_size = n;
    rec.selected = training[arg_sel];
    rec.max_estimator = max_est;
    if (mode == GreedyMode::Strong) rec.max_true_error = max_err;
    trace.push_back(rec);

    if (max_sel <= tol) {
      result.reached_tol = true;
      result.stop_reason = "tol";
      break;
    }
    if (n >= n_max) {
      result.stop_reason = "n_max";
      break;
    }

    // Orthonormalize the snapshot in the G-inner product (modified
    // Gram-Schmidt with one re-orthogonalization pass).
    const Eigen::VectorXd& u = truths.solve(training[arg_sel]);
    const double u_norm = std::sqrt(std::max(u.dot(G * u), 0.0));
    Eigen::VectorXd v = u;
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < model.basis.cols(); ++j) {
        const Eigen::VectorXd& bj = model.basis.col(j);
        v -= bj.dot(G * v) * bj;
      }
    const double v_norm = std::sqrt(std::max(v.dot(G * v), 0.0));
    if (!(v_norm > 1e-10 * std::max(u_norm, 1e-300)))
      throw StagnationError(
          "greedy_train: snapshot is linearly dependent on the current basis");

    model.basis.conservativeResize(Eigen::NoChange, n + 1);
    model.basis.col(n) = v / v_norm;
    model.selected.push_back(training[arg_sel]);
    detail::refresh_blocks(model, ops, fs, gram_llt, riesz_f);
  }

  Eigen::MatrixXd ortho =
      model.basis.transpose() * (G * model.basis) -
      Eigen::MatrixXd::Identity(model.n(), model.n());
  if (model.n() > 0 && ortho.cwiseAbs().maxCoeff() > 1e-10)
    throw CertificationError("greedy_train: basis lost G-orthonormality");

  result.model = std::move(model);
  if (!live_trace) result.trace = std::move(trace);
  else result.trace = *live_trace;
  return result;
}

/// Random parameters, uniform over the box. Bits are drawn portably from
/// mt19937_64 so runs are reproducible across standard libraries.
inline std::vector<ParameterVector> sample_box(
    const std::vector<std::array<double, 2>>& box, int count,
    std::uint64_t seed) {
  require(count >= 0, "sample_box: negative count");
  std::mt19937_64 rng(seed);
  auto unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  std::vector<ParameterVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    ParameterVector mu(box.size());
    for (std::size_t d = 0; d < box.size(); ++d)
      mu[d] = box[d][0] + (box[d][1] - box[d][0]) * unit();
    out.push_back(std::move(mu));
  }
  return out;
}

struct CertificationRow {
  ParameterVector mu;
  int basis_size = 0;
  double true_error = 0.0;
  double estimator = 0.0;
};

/// True energy error versus certified bound for every basis size 1..n at
/// randomly sampled parameters. The caller asserts error <= estimator.
inline std::vector<CertificationRow> certify_model(const ReducedModel& model,
                                                   TruthCache& cache,
                                                   int n_samples,
                                                   std::uint64_t seed) {
  require(model.n() >= 1, "certify_model: empty model");
  const DenseOperator G =
      assemble_seminorm_gram(model.problem.mesh, FracOrder(model.problem.s));
  std::vector<ReducedModel> sub;
  for (int m = 1; m <= model.n(); ++m) sub.push_back(truncate(model, m));
  std::vector<CertificationRow> rows;
  for (const auto& mu : sample_box(model.problem.box, n_samples, seed)) {
    const Eigen::VectorXd& u = cache.solve(mu);
    for (const auto& sm : sub) {
      RbSolution sol = rb_solve(sm, mu);
      Eigen::VectorXd e = u - sm.basis * sol.coeffs;
      CertificationRow row;
      row.mu = mu;
      row.basis_size = sm.n();
      row.true_error = std::sqrt(std::max(e.dot(G * e), 0.0));
      row.estimator = sol.estimator;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Energy errors of the reduced model at its own snapshot parameters; these
/// must reproduce to roundoff since the snapshots span the basis.
inline std::vector<double> snapshot_reproduction_errors(const ReducedModel& model,
                                                        TruthCache& cache) {
  const DenseOperator G =
      assemble_seminorm_gram(model.problem.mesh, FracOrder(model.problem.s));
  std::vector<double> errs;
  for (const auto& mu : model.selected) {
    const Eigen::VectorXd& u = cache.solve(mu);
    RbSolution sol = rb_solve(model, mu);
    Eigen::VectorXd e = u - model.basis * sol.coeffs;
    errs.push_back(std::sqrt(std::max(e.dot(G * e), 0.0)));
  }
  return errs;
}

struct SpeedupReport {
  int dof_fem = 0;
  int dof_rb = 0;
  double t_assemble_solve = 0.0;  // seconds
  double t_solve_only = 0.0;
  double t_rb_online = 0.0;
  double ratio_assemble_solve = 0.0;
  double ratio_solve_only = 0.0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  require(!v.empty(), "median_of: empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace detail

/// Median wall-clock comparison of the full FEM pipeline, the FEM solve with
/// prebuilt operator, and the certified online RB solve. The RB timing is
/// batched because a single online solve sits near the clock resolution.
inline SpeedupReport speedup_bench(const ReducedModel& model, int repetitions,
                                   int n_samples, std::uint64_t seed) {
  require(repetitions >= 10, "speedup_bench: need at least 10 repetitions");
  require(n_samples >= 1, "speedup_bench: need at least one parameter");
  using clock = std::chrono::steady_clock;
  const AffineProblem& p = model.problem;
  const FracOrder order(p.s);
  const auto mus = sample_box(p.box, n_samples, seed);

  volatile double sink = 0.0;
  std::vector<double> t_full, t_solve, t_rb;
  for (int rep = 0; rep < repetitions; ++rep) {
    for (const auto& mu : mus) {
      const Coefficient d = p.d_of_mu(mu);
      const Coefficient r = p.r_of_mu(mu);
      auto t0 = clock::now();
      DenseOperator A = assemble_diffusion(p.mesh, order, d);
      A += assemble_reaction(p.mesh, r);
      Eigen::VectorXd b = p.assemble_load(mu);
      Eigen::VectorXd u = solve_dense(A, b);
      auto t1 = clock::now();
      sink = sink + u(0);
      t_full.push_back(std::chrono::duration<double>(t1 - t0).count());

      t0 = clock::now();
      Eigen::VectorXd u2 = solve_dense(A, b);
      t1 = clock::now();
      sink = sink + u2(0);
      t_solve.push_back(std::chrono::duration<double>(t1 - t0).count());

      const int batch = 50;
      t0 = clock::now();
      for (int k = 0; k < batch; ++k) {
        RbSolution sol = rb_solve(model, mu);
        sink = sink + sol.estimator;
      }
      t1 = clock::now();
      t_rb.push_back(std::chrono::duration<double>(t1 - t0).count() / batch);
    }
  }
  (void)sink;

  SpeedupReport rep;
  rep.dof_fem = p.n_dofs();
  rep.dof_rb = model.n();
  rep.t_assemble_solve = detail::median_of(t_full);
  rep.t_solve_only = detail::median_of(t_solve);
  rep.t_rb_online = detail::median_of(t_rb);
  rep.ratio_assemble_solve = rep.t_assemble_solve / rep.t_rb_online;
  rep.ratio_solve_only = rep.t_solve_only / rep.t_rb_online;
  return rep;
}

/// Directory layout: manifest.txt plus one CSV per block. 17 significant
/// digits round-trip doubles exactly, so load reproduces the trained model
/// bit for bit.
inline void save_model(const ReducedModel& model, const std::string& dir) {
  require(model.n() >= 1, "save_model: refusing to save an empty model");
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("problem", model.problem.name);
  kv.emplace_back("s", fmt17(model.problem.s));
  kv.emplace_back("n_elements", std::to_string(model.problem.mesh.n_elements()));
  kv.emplace_back("n_basis", std::to_string(model.n()));
  kv.emplace_back("variant", variant_name(model.problem.variant));
  kv.emplace_back("dim", std::to_string(model.problem.dim()));
  for (std::size_t d = 0; d < model.problem.box.size(); ++d) {
    kv.emplace_back("box_lo_" + std::to_string(d), fmt17(model.problem.box[d][0]));
    kv.emplace_back("box_hi_" + std::to_string(d), fmt17(model.problem.box[d][1]));
  }
  kv.emplace_back("q_a", std::to_string(model.a_hat.size()));
  kv.emplace_back("q_f", std::to_string(model.f_hat.size()));
  write_manifest(dir + "/manifest.txt", kv);

  write_matrix_csv(dir + "/basis.csv", model.basis);
  for (std::size_t p = 0; p < model.a_hat.size(); ++p)
    write_matrix_csv(dir + "/a_hat_" + std::to_string(p) + ".csv", model.a_hat[p]);
  for (std::size_t q = 0; q < model.f_hat.size(); ++q)
    write_vector_csv(dir + "/f_hat_" + std::to_string(q) + ".csv", model.f_hat[q]);
  write_matrix_csv(dir + "/res_ff.csv", model.res_ff);
  for (std::size_t q = 0; q < model.res_fa.size(); ++q)
    for (std::size_t p = 0; p < model.res_fa[q].size(); ++p)
      write_vector_csv(dir + "/res_fa_" + std::to_string(q) + "_" +
                           std::to_string(p) + ".csv",
                       model.res_fa[q][p]);
  for (std::size_t p = 0; p < model.res_aa.size(); ++p)
    for (std::size_t r = 0; r < model.res_aa[p].size(); ++r)
      write_matrix_csv(dir + "/res_aa_" + std::to_string(p) + "_" +
                           std::to_string(r) + ".csv",
                       model.res_aa[p][r]);
  Eigen::MatrixXd sel(static_cast<Eigen::Index>(model.selected.size()),
                      static_cast<Eigen::Index>(model.problem.dim()));
  for (std::size_t i = 0; i < model.selected.size(); ++i)
    for (std::size_t d = 0; d < model.problem.dim(); ++d)
      sel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          model.selected[i][d];
  write_matrix_csv(dir + "/selected.csv", sel);
}

inline ReducedModel load_model(const std::string& dir) {
  const auto kv = read_manifest(dir + "/manifest.txt");
  const std::string name = manifest_get(kv, "problem");
  const double s = std::strtod(manifest_get(kv, "s").c_str(), nullptr);
  const int n_elements = std::stoi(manifest_get(kv, "n_elements"));
  const int n_basis = std::stoi(manifest_get(kv, "n_basis"));
  const std::size_t dim =
      static_cast<std::size_t>(std::stoul(manifest_get(kv, "dim")));

  ReducedModel model;
  try {
    model.problem = build_affine_problem(name, build_mesh(n_elements), s);
  } catch (const ValidationError& e) {
    throw IoError(std::string("load_model: cannot rebuild problem: ") + e.what());
  }
  model.problem.variant = parse_variant(manifest_get(kv, "variant"));
  if (model.problem.dim() != dim)
    throw IoError("load_model: parameter dimension mismatch");
  for (std::size_t d = 0; d < dim; ++d) {
    const double lo =
        std::strtod(manifest_get(kv, "box_lo_" + std::to_string(d)).c_str(), nullptr);
    const double hi =
        std::strtod(manifest_get(kv, "box_hi_" + std::to_string(d)).c_str(), nullptr);
    if (lo != model.problem.box[d][0] || hi != model.problem.box[d][1])
      throw IoError("load_model: box mismatch against rebuilt problem");
  }
  const std::size_t qa = std::stoul(manifest_get(kv, "q_a"));
  const std::size_t qf = std::stoul(manifest_get(kv, "q_f"));
  if (qa != model.problem.n_operator_terms() || qf != model.problem.loads.size())
    throw IoError("load_model: affine term count mismatch");

  model.basis = read_matrix_csv(dir + "/basis.csv");
  if (model.basis.rows() != model.problem.n_dofs() ||
      model.basis.cols() != n_basis)
    throw IoError("load_model: basis dimensions disagree with manifest");
  for (std::size_t p = 0; p < qa; ++p) {
    Eigen::MatrixXd a = read_matrix_csv(dir + "/a_hat_" + std::to_string(p) + ".csv");
    if (a.rows() != n_basis || a.cols() != n_basis)
      throw IoError("load_model: reduced operator block has wrong shape");
    model.a_hat.push_back(std::move(a));
  }
  for (std::size_t q = 0; q < qf; ++q) {
    Eigen::VectorXd f = read_vector_csv(dir + "/f_hat_" + std::to_string(q) + ".csv");
    if (f.size() != n_basis)
      throw IoError("load_model: reduced load block has wrong shape");
    model.f_hat.push_back(std::move(f));
  }
  model.res_ff = read_matrix_csv(dir + "/res_ff.csv");
  if (model.res_ff.rows() != static_cast<Eigen::Index>(qf) ||
      model.res_ff.cols() != static_cast<Eigen::Index>(qf))
    throw IoError("load_model: res_ff block has wrong shape");
  model.res_fa.resize(qf);
  for (std::size_t q = 0; q < qf; ++q)
    for (std::size_t p = 0; p < qa; ++p) {
      Eigen::VectorXd v = read_vector_csv(dir + "/res_fa_" + std::to_string(q) +
                                          "_" + std::to_string(p) + ".csv");
      if (v.size() != n_basis)
        throw IoError("load_model: res_fa block has wrong shape");
      model.res_fa[q].push_back(std::move(v));
    }
  model.res_aa.resize(qa);
  for (std::size_t p = 0; p < qa; ++p)
    for (std::size_t r = 0; r < qa; ++r) {
      Eigen::MatrixXd a = read_matrix_csv(dir + "/res_aa_" + std::to_string(p) +
                                          "_" + std::to_string(r) + ".csv");
      if (a.rows() != n_basis || a.cols() != n_basis)
        throw IoError("load_model: res_aa block has wrong shape");
      model.res_aa[p].push_back(std::move(a));
    }
  Eigen::MatrixXd sel = read_matrix_csv(dir + "/selected.csv");
  if (sel.rows() != n_basis || sel.cols() != static_cast<Eigen::Index>(dim))
    throw IoError("load_model: selected parameter table has wrong shape");
  for (Eigen::Index i = 0; i < sel.rows(); ++i) {
    ParameterVector mu(dim);
    for (std::size_t d = 0; d < dim; ++d)
      mu[d] = sel(i, static_cast<Eigen::Index>(d));
    model.selected.push_back(std::move(mu));
  }

  const DenseOperator G =
      assemble_seminorm_gram(model.problem.mesh, FracOrder(model.problem.s));
  Eigen::MatrixXd ortho = model.basis.transpose() * (G * model.basis) -
                          Eigen::MatrixXd::Identity(n_basis, n_basis);
  if (ortho.cwiseAbs().maxCoeff() > 1e-10)
    throw IoError("load_model: stored basis is not G-orthonormal");
  return model;
}

}  // namespace frbm
