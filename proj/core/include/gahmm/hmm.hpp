#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gahmm/event_model.hpp"
#include "gahmm/ontology_catalog.hpp"

namespace gahmm {

// Dense row-major matrix of probabilities.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Discrete HMM (A, B, pi) with N hidden states over M symbols.
struct HmmModel {
  Matrix transition;  // N x N, row-stochastic
  Matrix emission;    // N x M, row-stochastic
  std::vector<double> initial;
  std::vector<std::string> state_labels;

  std::size_t states() const noexcept { return initial.size(); }
  std::size_t symbols() const noexcept { return emission.cols(); }

  // Throws ValidationError unless shapes agree, N >= 1, M >= 2, entries are
  // non-negative and every distribution sums to 1 within `tol`.
  void validate(double tol = 1e-9) const;

  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

// log P(codes) summed over all state paths, via per-step scaling. Returns
// -inf when the sequence has probability zero.
double forward_log_likelihood(const HmmModel& model, std::span<const Code> codes);

struct ViterbiResult {
  std::vector<std::size_t> path;
  double log_score = 0.0;
};

// Most likely state path; ties go to the lower state index.
ViterbiResult viterbi(const HmmModel& model, std::span<const Code> codes);

// Highest joint log-probability any length-`length` observation sequence can reach.
double best_possible_log_likelihood(const HmmModel& model, std::size_t length);

// Log-likelihood of `length` symbols under uniform emissions over `symbols` codes.
double uniform_log_likelihood(std::size_t symbols, std::size_t length);

struct BaumWelchResult {
  HmmModel model;
  // Total log-likelihood of the data before each re-estimation step, then after the last.
  std::vector<double> log_likelihoods;
  int iterations = 0;
};

// Multi-sequence EM re-estimation. Rows whose expected counts vanish are kept
// as they were. Stops after `max_iter` steps or once the gain drops below `tol`.
BaumWelchResult baum_welch(HmmModel model, const std::vector<std::vector<Code>>& sequences, int max_iter,
                           double tol);

/// Models trained from one catalog.
///  per_class: one left-to-right model per label, stage i emitting pattern[i];
///  label_state: one model whose hidden states are the labels themselves.
struct ModelBank {
  std::map<std::string, HmmModel> per_class;
  HmmModel label_state;
  double smoothing = 0.1;
  double self_loop = 0.6;
};

inline constexpr double kDefaultSmoothing = 0.1;
inline constexpr double kDefaultSelfLoop = 0.6;

// Count-based construction with add-alpha smoothing: emission (c + a) / (C + a*M).
ModelBank build_model_bank(const Catalog& catalog, double smoothing = kDefaultSmoothing,
                           double self_loop = kDefaultSelfLoop);

struct LabelScore {
  std::string label;
  double log_likelihood = 0.0;
};

// Forward score of `codes` under every per-class model, in label order.
std::vector<LabelScore> score_all(const ModelBank& bank, std::span<const Code> codes);

}  // namespace gahmm
