#include "coarse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <thread>

#include "coarse/special_functions.hpp"

namespace coarse {

namespace {

constexpr double kVarianceFloor = 1e-12;

double column_mean(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return x.mean();
}

double column_variance(const Eigen::Ref<const Eigen::VectorXd>& x, double mean) {
  const auto n = x.size();
  return (x.array() - mean).square().sum() / static_cast<double>(n - 1);
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& source, const NodeSet& nodes) {
  Eigen::MatrixXd out(source.rows(), nodes.size());
  int c = 0;
  for (int v : nodes) out.col(c++) = source.col(v - 1);
  return out;
}

}  // namespace

void validate(const EnvironmentData& data) {
  const int d = data.node_count();
  if (d < 1) throw std::invalid_argument("EnvironmentData: no columns");
  if (data.observational.rows() < 3)
    throw std::invalid_argument("EnvironmentData: observational environment needs at least 3 rows");
  for (size_t j = 0; j < data.interventional.size(); ++j) {
    if (data.interventional[j].cols() != d)
      throw std::invalid_argument("EnvironmentData: environment " + std::to_string(j + 1) +
                                  " has mismatched column count");
    if (data.interventional[j].rows() < 3)
      throw std::invalid_argument("EnvironmentData: environment " + std::to_string(j + 1) +
                                  " needs at least 3 rows");
  }
}

StandardizeInfo standardize(EnvironmentData& data) {
  const int d = data.node_count();
  Eigen::Index total_rows = data.observational.rows();
  for (const auto& env : data.interventional) total_rows += env.rows();

  StandardizeInfo info;
  info.mean = Eigen::VectorXd::Zero(d);
  info.scale = Eigen::VectorXd::Ones(d);

  Eigen::VectorXd sum = data.observational.colwise().sum();
  for (const auto& env : data.interventional) sum += env.colwise().sum().transpose();
  info.mean = sum / static_cast<double>(total_rows);

  Eigen::VectorXd ss = Eigen::VectorXd::Zero(d);
  auto accumulate = [&](const Eigen::MatrixXd& env) {
    ss += (env.rowwise() - info.mean.transpose()).array().square().colwise().sum().matrix().transpose();
  };
  accumulate(data.observational);
  for (const auto& env : data.interventional) accumulate(env);

  for (int v = 0; v < d; ++v) {
    double variance = ss(v) / static_cast<double>(total_rows - 1);
    if (variance <= kVarianceFloor) {
      info.constant_columns.push_back(v + 1);
      info.scale(v) = 1.0;
    } else {
      info.scale(v) = std::sqrt(variance);
    }
  }

  auto apply = [&](Eigen::MatrixXd& env) {
    env.rowwise() -= info.mean.transpose();
    env.array().rowwise() /= info.scale.transpose().array();
  };
  apply(data.observational);
  for (auto& env : data.interventional) apply(env);
  return info;
}

double welch_t_test(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  const auto nx = x.size();
  const auto ny = y.size();
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("welch_t_test: both samples need at least 2 observations");
  const double mx = column_mean(x);
  const double my = column_mean(y);
  const double vx = column_variance(x, mx);
  const double vy = column_variance(y, my);
  if (vx <= kVarianceFloor && vy <= kVarianceFloor)
    return mx == my ? 1.0 : 0.0;
  const double sx = vx / static_cast<double>(nx);
  const double sy = vy / static_cast<double>(ny);
  const double t = (mx - my) / std::sqrt(sx + sy);
  const double dof = (sx + sy) * (sx + sy) /
                     (sx * sx / static_cast<double>(nx - 1) +
                      sy * sy / static_cast<double>(ny - 1));
  return student_t_two_sided_p(t, dof);
}

DescendantMatrix descendant_matrix(const EnvironmentData& data, double alpha_ref,
                                   int jobs, bool family_wise) {
  validate(data);
  if (!(alpha_ref > 0.0 && alpha_ref < 1.0))
    throw std::invalid_argument("descendant_matrix: alpha_ref outside (0, 1)");
  const int d = data.node_count();
  const int e = data.interventional_count();

  DescendantMatrix m;
  m.alpha_ref = family_wise && e > 0
                    ? alpha_ref / (static_cast<double>(d) * e)
                    : alpha_ref;
  m.entries.resize(d, e);
  m.entries.setConstant(false);
  m.pvalues.resize(d, e);
  m.pvalues.setOnes();

  auto run_rows = [&](int begin, int end) {
    for (int v = begin; v < end; ++v) {
      for (int j = 0; j < e; ++j) {
        double p = welch_t_test(data.interventional[j].col(v),
                                data.observational.col(v));
        m.pvalues(v, j) = p;
        m.entries(v, j) = p < m.alpha_ref;
      }
    }
  };

  jobs = std::max(1, std::min(jobs, d));
  if (jobs == 1) {
    run_rows(0, d);
  } else {
    std::vector<std::thread> workers;
    const int chunk = (d + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
      int begin = w * chunk;
      int end = std::min(d, begin + chunk);
      if (begin < end) workers.emplace_back(run_rows, begin, end);
    }
    for (auto& worker : workers) worker.join();
  }
  return m;
}

Eigen::MatrixXd ols_residualize(const Eigen::Ref<const Eigen::MatrixXd>& block,
                                const Eigen::Ref<const Eigen::MatrixXd>& conditioners,
                                double ridge_epsilon) {
  const auto n = block.rows();
  if (conditioners.cols() > 0 && conditioners.rows() != n)
    throw std::invalid_argument("ols_residualize: row counts differ");
  Eigen::MatrixXd centered = block.rowwise() - block.colwise().mean();
  if (conditioners.cols() == 0) return centered;

  Eigen::MatrixXd z = conditioners.rowwise() - conditioners.colwise().mean();
  Eigen::MatrixXd gram = z.transpose() * z;
  Eigen::MatrixXd cross = z.transpose() * centered;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    const double scale = std::max(1.0, gram.diagonal().maxCoeff());
    gram.diagonal().array() += ridge_epsilon * scale;
    llt.compute(gram);
  }
  return centered - z * llt.solve(cross);
}

namespace {

// Shared Wilks/Bartlett core on covariance blocks.
double wilks_bartlett_p(const Eigen::MatrixXd& cuu, const Eigen::MatrixXd& cuw,
                        const Eigen::MatrixXd& cww, Eigen::Index n,
                        double ridge_epsilon) {
  const int p = static_cast<int>(cuu.rows());
  const int q = static_cast<int>(cww.rows());
  auto inverse_sqrt = [&](const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd values = eig.eigenvalues();
    const double floor =
        std::max(ridge_epsilon * std::max(values.maxCoeff(), 1.0), 1e-300);
    Eigen::VectorXd inv = values.unaryExpr([&](double lambda) {
      return 1.0 / std::sqrt(std::max(lambda, floor));
    });
    return Eigen::MatrixXd(eig.eigenvectors() * inv.asDiagonal() *
                           eig.eigenvectors().transpose());
  };

  Eigen::MatrixXd whitened = inverse_sqrt(cuu) * cuw * inverse_sqrt(cww);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(whitened);
  const Eigen::VectorXd rho = svd.singularValues();

  double log_lambda = 0.0;
  const int s = std::min(p, q);
  for (int i = 0; i < s; ++i) {
    const double r2 = std::min(rho(i) * rho(i), 1.0);
    log_lambda += std::log(std::max(1.0 - r2, 1e-300));
  }
  const double bartlett = -(static_cast<double>(n) - 1.0 - (p + q + 1) / 2.0);
  const double statistic = bartlett * log_lambda;
  return chi_squared_sf(static_cast<double>(p) * q, statistic);
}

}  // namespace

double cca_wilks_test(const Eigen::Ref<const Eigen::MatrixXd>& u_resid,
                      const Eigen::Ref<const Eigen::MatrixXd>& w_resid,
                      double ridge_epsilon) {
  const auto n = u_resid.rows();
  const int p = static_cast<int>(u_resid.cols());
  const int q = static_cast<int>(w_resid.cols());
  if (w_resid.rows() != n)
    throw std::invalid_argument("cca_wilks_test: row counts differ");
  if (p < 1 || q < 1)
    throw std::invalid_argument("cca_wilks_test: empty block");
  if (n <= p + q + 2)
    throw SampleSizeError("cca_wilks_test: need n > dim(U) + dim(W) + 2, got n = " +
                          std::to_string(n));

  Eigen::MatrixXd u = u_resid.rowwise() - u_resid.colwise().mean();
  Eigen::MatrixXd w = w_resid.rowwise() - w_resid.colwise().mean();
  const double denom = static_cast<double>(n - 1);
  Eigen::MatrixXd cuu = u.transpose() * u / denom;
  Eigen::MatrixXd cww = w.transpose() * w / denom;
  Eigen::MatrixXd cuw = u.transpose() * w / denom;
  return wilks_bartlett_p(cuu, cuw, cww, n, ridge_epsilon);
}

namespace {

// Range/overlap validation shared by both edge-test routes; returns the
// union of the conditioning parts.
NodeSet checked_conditioning(const EdgeQuery& query, int d) {
  NodeSet conditioning;
  for (const NodeSet& part : query.conditioning)
    conditioning.insert(part.begin(), part.end());
  for (int v : query.from_part) {
    if (v < 1 || v > d) throw std::out_of_range("is_edge_test: node out of range");
    if (query.to_part.count(v) || conditioning.count(v))
      throw std::invalid_argument("is_edge_test: query parts overlap");
  }
  for (int v : query.to_part) {
    if (v < 1 || v > d) throw std::out_of_range("is_edge_test: node out of range");
    if (conditioning.count(v))
      throw std::invalid_argument("is_edge_test: conditioning overlaps tested part");
  }
  return conditioning;
}

void check_sample_size(Eigen::Index n, const EdgeQuery& query,
                       const NodeSet& conditioning) {
  const auto needed = query.from_part.size() + query.to_part.size() +
                      conditioning.size() + 2;
  if (static_cast<size_t>(n) <= needed)
    throw SampleSizeError("is_edge_test: observational sample too small for " +
                          std::to_string(needed) + " dimensions");
}

}  // namespace

bool is_edge_test(const EdgeQuery& query, const EnvironmentData& data,
                  const TestConfig& config) {
  NodeSet conditioning = checked_conditioning(query, data.node_count());
  check_sample_size(data.observational.rows(), query, conditioning);

  Eigen::MatrixXd z = gather_columns(data.observational, conditioning);
  Eigen::MatrixXd u = ols_residualize(gather_columns(data.observational, query.from_part),
                                      z, config.ridge_epsilon);
  Eigen::MatrixXd w = ols_residualize(gather_columns(data.observational, query.to_part),
                                      z, config.ridge_epsilon);
  return cca_wilks_test(u, w, config.ridge_epsilon) < config.alpha_edge;
}

ObservationalMoments observational_moments(const Eigen::Ref<const Eigen::MatrixXd>& sample) {
  ObservationalMoments moments;
  moments.rows = sample.rows();
  Eigen::MatrixXd centered = sample.rowwise() - sample.colwise().mean();
  moments.covariance =
      centered.transpose() * centered / static_cast<double>(sample.rows() - 1);
  return moments;
}

double cca_wilks_test_cached(const ObservationalMoments& moments, const NodeSet& u,
                             const NodeSet& w, const NodeSet& z,
                             double ridge_epsilon) {
  auto block = [&](const NodeSet& rows, const NodeSet& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    int r = 0;
    for (int a : rows) {
      int c = 0;
      for (int b : cols) out(r, c++) = moments.covariance(a - 1, b - 1);
      ++r;
    }
    return out;
  };

  Eigen::MatrixXd cuu = block(u, u);
  Eigen::MatrixXd cww = block(w, w);
  Eigen::MatrixXd cuw = block(u, w);
  if (!z.empty()) {
    Eigen::MatrixXd czz = block(z, z);
    Eigen::MatrixXd czu = block(z, u);
    Eigen::MatrixXd czw = block(z, w);
    Eigen::LLT<Eigen::MatrixXd> llt(czz);
    if (llt.info() != Eigen::Success) {
      czz.diagonal().array() += ridge_epsilon * std::max(1.0, czz.diagonal().maxCoeff());
      llt.compute(czz);
    }
    cuu -= czu.transpose() * llt.solve(czu);
    cww -= czw.transpose() * llt.solve(czw);
    cuw -= czu.transpose() * llt.solve(czw);
  }
  return wilks_bartlett_p(cuu, cuw, cww, moments.rows, ridge_epsilon);
}

StatisticalOracles statistical_oracles(const EnvironmentData& data,
                                       const TestConfig& config, int jobs) {
  if (!(config.alpha_edge > 0.0 && config.alpha_edge < 1.0))
    throw std::invalid_argument("statistical_oracles: alpha_edge outside (0, 1)");
  validate(data);
  bool any_signal = false;
  for (int v = 0; v < data.node_count() && !any_signal; ++v) {
    double mean = data.observational.col(v).mean();
    if (column_variance(data.observational.col(v), mean) > kVarianceFloor)
      any_signal = true;
  }
  if (!any_signal)
    throw std::invalid_argument("statistical_oracles: every observational column is constant");
  StatisticalOracles oracles;
  oracles.m = descendant_matrix(data, config.alpha_ref, jobs,
                                config.correct_refinement_tests);
  oracles.refine = signature_refine_oracle(oracles.m.entries);
  oracles.between = signature_between_policy(oracles.m.entries);
  auto moments = std::make_shared<ObservationalMoments>(
      observational_moments(data.observational));
  const int d = data.node_count();
  oracles.edge = [moments, config, d](const EdgeQuery& query) {
    try {
      NodeSet conditioning = checked_conditioning(query, d);
      check_sample_size(moments->rows, query, conditioning);
      return cca_wilks_test_cached(*moments, query.from_part, query.to_part,
                                   conditioning, config.ridge_epsilon) <
             config.alpha_edge;
    } catch (const SampleSizeError&) {
      return false;  // too few samples to justify an edge
    }
  };
  return oracles;
}

RepareResult learn_coarsening(const EnvironmentData& data, const TestConfig& config,
                              int jobs) {
  StatisticalOracles oracles = statistical_oracles(data, config, jobs);
  RepareOptions options;
  options.between = oracles.between;
  return repare(data.node_count(), oracles.refine, oracles.edge, options);
}

}  // namespace coarse
