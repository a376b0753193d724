#pragma once

#include "linbai/linalg.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace linbai {

enum class ProblemKind { kBAI, kBoundedBAI, kTransductiveBAI, kThreshold, kTransductiveThreshold };

std::string_view to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(std::string_view name);

bool is_bai_kind(ProblemKind kind);
bool is_threshold_kind(ProblemKind kind);
bool is_transductive(ProblemKind kind);

/// Identifier of an answer. BAI kinds store the index of the best candidate;
/// threshold kinds store the above-threshold set as a bitset over candidates.
struct Answer {
  std::uint64_t code = 0;
  auto operator<=>(const Answer&) const = default;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kBAI;
  ArmSet arms;
  std::optional<double> M;
  double iota = 0.0;
  std::vector<Vector> targets;  // transductive kinds only

  static ProblemSpec bai(ArmSet arms, std::optional<double> M = std::nullopt);
  static ProblemSpec bounded_bai(ArmSet arms, double M);
  static ProblemSpec transductive_bai(ArmSet arms, std::vector<Vector> targets,
                                      std::optional<double> M = std::nullopt);
  static ProblemSpec threshold(ArmSet arms, double iota, std::optional<double> M = std::nullopt);
  static ProblemSpec transductive_threshold(ArmSet arms, std::vector<Vector> targets, double iota,
                                            std::optional<double> M = std::nullopt);

  /// Throws PreconditionError when the kind's parameters are missing or invalid.
  void validate() const;

  /// Vectors whose means define the answer: the arms, or the transductive set.
  const std::vector<Vector>& candidates() const;
  std::size_t num_candidates() const { return candidates().size(); }
  std::size_t dim() const { return arms.dim(); }
};

/// Halfspace {lambda : <lambda, y> >= x}.
struct Halfspace {
  Vector y;
  double x = 0.0;
};

struct BestResponse {
  double value = 0.0;
  Vector lambda;
  std::size_t active_constraint = 0;
  std::optional<double> gamma;  // bounded-BAI dual multiplier
  bool attained = true;         // false when the infimum is approached but not reached
};

/// Exact correct answer; DegenerateParameterError on ties or threshold hits.
Answer correct_answer(const ProblemSpec& spec, const Vector& theta);

/// Answer with lowest-index tie breaking, never throws on degeneracy.
struct CandidateAnswer {
  Answer answer;
  bool degenerate = false;
};
CandidateAnswer candidate_answer(const ProblemSpec& spec, const Vector& theta);

/// Halfspaces whose union is the alternative set of `answer`.
std::vector<Halfspace> alternative_halfspaces(const ProblemSpec& spec, Answer answer);

/// inf over {<lambda,y> >= x} of 1/2 ||theta - lambda||^2_V.
BestResponse halfspace_projection(const Vector& theta, const Vector& y, double x,
                                  const DesignMatrix& v);

/// Nature's best response against weights w (unnormalized allowed). Bounded
/// BAI uses the norm-constrained dual per competitor.
BestResponse best_response(const ProblemSpec& spec, const Vector& theta, Answer answer,
                           std::span<const double> w);

/// inf over {<lambda,y> <= 0, ||lambda|| <= M} of 1/2 ||theta - lambda||^2_{V_w}
/// with y = a* - a. Requires ||theta|| <= M.
BestResponse bounded_best_response(const Vector& theta, const Vector& y, std::span<const double> w,
                                   double M, const ArmSet& arms);

/// Smallest gap <theta, a* - a> over competitors (BAI kinds).
double min_gap(const ProblemSpec& spec, const Vector& theta);

namespace detail {

/// Eigen-decomposed design matrix; evaluates the bounded dual in O(d) per gamma.
class BoundedDual {
 public:
  BoundedDual(const DesignMatrix& v, const Vector& theta, double M);
  /// Maximizes the dual for the halfspace <lambda, y> <= 0.
  BestResponse solve(const Vector& y) const;
  double objective(const Vector& y_eig, double gamma) const;

 private:
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Vector theta_;
  Vector theta_eig_;
  double M_;
};

}  // namespace detail

}  // namespace linbai
