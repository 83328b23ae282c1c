#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "coarse/repare.hpp"

namespace coarse {

/// Significance thresholds for the refinement and edge tests, plus the
/// regularization floor used by the covariance-based routines.
/// With correct_refinement_tests the d-by-e grid of refinement t-tests is
/// held to a family-wise level: each test runs at alpha_ref / (d * e).
struct TestConfig {
  double alpha_ref = 0.05;
  double alpha_edge = 0.05;
  double ridge_epsilon = 1e-8;
  bool correct_refinement_tests = true;
};

/// Multi-environment sample store. Columns are fine nodes (node v maps to
/// column v-1); the observational environment is mandatory, interventional
/// environments are indexed 1..e in the order given.
struct EnvironmentData {
  Eigen::MatrixXd observational;
  std::vector<Eigen::MatrixXd> interventional;

  int node_count() const { return static_cast<int>(observational.cols()); }
  int interventional_count() const { return static_cast<int>(interventional.size()); }
};

/// Throws std::invalid_argument when the environments disagree on the column
/// count or any environment has fewer than 3 rows.
void validate(const EnvironmentData& data);

struct StandardizeInfo {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<int> constant_columns;  // 1-based node ids left unscaled
};

/// Standardizes every environment in place with pooled per-column statistics
/// (zero pooled mean, unit pooled variance). Constant columns are centered
/// only and reported.
StandardizeInfo standardize(EnvironmentData& data);

/// Two-sided Welch t-test with Satterthwaite degrees of freedom. Requires at
/// least two observations per sample. Two constant samples give p = 1 when
/// their values agree and p = 0 otherwise.
double welch_t_test(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y);

/// Node-by-intervention response matrix: entries(v-1, j) says whether column
/// v differs between interventional environment j and the observational one;
/// pvalues stores the underlying Welch p-values. alpha_ref records the
/// per-test threshold actually applied, so entries == (pvalues < alpha_ref).
struct DescendantMatrix {
  SignatureMatrix entries;
  Eigen::MatrixXd pvalues;
  double alpha_ref = 0.05;
};

/// Runs the d-by-e grid of Welch tests. With family_wise the grid is held to
/// a family-wise level (each test at alpha_ref / (d * e)); otherwise every
/// test runs at alpha_ref. `jobs` > 1 distributes node rows across threads;
/// every schedule produces identical output.
DescendantMatrix descendant_matrix(const EnvironmentData& data, double alpha_ref,
                                   int jobs = 1, bool family_wise = true);

/// Least-squares residuals of each block column on the conditioners plus an
/// intercept. Empty conditioners reduce to column centering. A rank-deficient
/// Gram matrix falls back to a ridge of ridge_epsilon times its scale.
Eigen::MatrixXd ols_residualize(const Eigen::Ref<const Eigen::MatrixXd>& block,
                                const Eigen::Ref<const Eigen::MatrixXd>& conditioners,
                                double ridge_epsilon = 1e-8);

/// Thrown when a test is asked for more dimensions than its sample can carry.
class SampleSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wilks' Lambda test for independence of two residual blocks via canonical
/// correlations, with Bartlett's chi-squared approximation:
///   Lambda = prod(1 - rho_i^2),
///   -(n - 1 - (p+q+1)/2) ln Lambda  ~  chi^2(p q).
/// ridge_epsilon acts as a relative eigenvalue floor when whitening, so
/// well-conditioned inputs are evaluated exactly.
double cca_wilks_test(const Eigen::Ref<const Eigen::MatrixXd>& u_resid,
                      const Eigen::Ref<const Eigen::MatrixXd>& w_resid,
                      double ridge_epsilon = 1e-8);

/// Edge decision on observational data only: residualize the two parts on the
/// union of the conditioning parts, then Wilks-test the residuals at
/// alpha_edge. Throws SampleSizeError when n <= dim(U)+dim(W)+|Z|+2.
bool is_edge_test(const EdgeQuery& query, const EnvironmentData& data,
                  const TestConfig& config);

/// Centered second moments of one sample matrix, cached once per learning run
/// so that each edge query costs O(cols^3) instead of O(n cols^2).
struct ObservationalMoments {
  Eigen::MatrixXd covariance;  // 1/(n-1) normalization
  Eigen::Index rows = 0;
};

ObservationalMoments observational_moments(const Eigen::Ref<const Eigen::MatrixXd>& sample);

/// The conditional Wilks p-value computed from cached moments via Schur
/// complements. Agrees with the residualize-then-test route to roundoff
/// (the least-squares residual cross-moments ARE the Schur complements).
double cca_wilks_test_cached(const ObservationalMoments& moments, const NodeSet& u,
                             const NodeSet& w, const NodeSet& z,
                             double ridge_epsilon = 1e-8);

/// The statistical realizations of the refine/edge oracles plus the
/// between-split direction policy, all driven by the descendant matrix.
/// The oracles keep a pointer to `data`; it must outlive them.
struct StatisticalOracles {
  DescendantMatrix m;
  RefineOracle refine;
  EdgeOracle edge;
  BetweenPolicy between;
};

StatisticalOracles statistical_oracles(const EnvironmentData& data,
                                       const TestConfig& config, int jobs = 1);

/// Full estimator: descendant matrix, signature refinement, Wilks edge tests,
/// lattice descent. Data is expected to be standardized already.
RepareResult learn_coarsening(const EnvironmentData& data, const TestConfig& config,
                              int jobs = 1);

}  // namespace coarse
