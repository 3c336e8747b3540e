#include "gahmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gahmm/errors.hpp"

namespace gahmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

void check_codes(const HmmModel& model, std::span<const Code> codes) {
  if (codes.empty()) throw DomainError("observation sequence is empty");
  for (auto c : codes) {
    if (c >= model.symbols()) {
      throw DomainError("observation code " + std::to_string(c) + " out of range (M = " +
                        std::to_string(model.symbols()) + ")");
    }
  }
}

// Scaled forward pass. Returns false when some prefix has probability zero.
bool forward_scaled(const HmmModel& m, std::span<const Code> codes, std::vector<double>& alpha,
                    std::vector<double>& scale) {
  const auto n = m.states();
  const auto len = codes.size();
  alpha.assign(len * n, 0.0);
  scale.assign(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    double* cur = alpha.data() + t * n;
    const auto o = codes[t];
    if (t == 0) {
      for (std::size_t i = 0; i < n; ++i) cur[i] = m.initial[i] * m.emission(i, o);
    } else {
      const double* prev = alpha.data() + (t - 1) * n;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += prev[i] * m.transition(i, j);
        cur[j] = s * m.emission(j, o);
      }
    }
    const double c = std::accumulate(cur, cur + n, 0.0);
    if (!(c > 0.0)) return false;
    for (std::size_t i = 0; i < n; ++i) cur[i] /= c;
    scale[t] = c;
  }
  return true;
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void HmmModel::validate(double tol) const {
  const auto n = states();
  if (n < 1) throw ValidationError("HMM needs at least one state");
  if (symbols() < 2) throw ValidationError("HMM needs at least two symbols");
  if (transition.rows() != n || transition.cols() != n) throw ValidationError("transition matrix must be N x N");
  if (emission.rows() != n) throw ValidationError("emission matrix must have N rows");
  if (!state_labels.empty() && state_labels.size() != n) throw ValidationError("state label count must equal N");

  auto check = [tol](std::span<const double> dist, const std::string& what) {
    double s = 0.0;
    for (double p : dist) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError(what + " has a negative or non-finite entry");
      s += p;
    }
    if (std::abs(s - 1.0) > tol) throw ValidationError(what + " sums to " + std::to_string(s));
  };
  check(initial, "initial distribution");
  for (std::size_t i = 0; i < n; ++i) {
    check(transition.row(i), "transition row " + std::to_string(i));
    check(emission.row(i), "emission row " + std::to_string(i));
  }
}

double forward_log_likelihood(const HmmModel& model, std::span<const Code> codes) {
  check_codes(model, codes);
  std::vector<double> alpha, scale;
  if (!forward_scaled(model, codes, alpha, scale)) return kNegInf;
  double ll = 0.0;
  for (double c : scale) ll += std::log(c);
  return ll;
}

ViterbiResult viterbi(const HmmModel& model, std::span<const Code> codes) {
  check_codes(model, codes);
  const auto n = model.states();
  const auto len = codes.size();
  std::vector<double> delta(n), next(n);
  std::vector<std::size_t> back(len * n, 0);

  for (std::size_t i = 0; i < n; ++i) delta[i] = safe_log(model.initial[i]) + safe_log(model.emission(i, codes[0]));
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = delta[i] + safe_log(model.transition(i, j));
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      next[j] = best + safe_log(model.emission(j, codes[t]));
      back[t * n + j] = arg;
    }
    delta.swap(next);
  }

  ViterbiResult out;
  out.log_score = kNegInf;
  std::size_t last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (delta[i] > out.log_score) {
      out.log_score = delta[i];
      last = i;
    }
  }
  out.path.assign(len, 0);
  out.path[len - 1] = last;
  for (std::size_t t = len - 1; t > 0; --t) out.path[t - 1] = back[t * n + out.path[t]];
  return out;
}

double best_possible_log_likelihood(const HmmModel& model, std::size_t length) {
  if (length == 0) return 0.0;
  const auto n = model.states();
  std::vector<double> peak(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = model.emission.row(i);
    peak[i] = safe_log(*std::max_element(r.begin(), r.end()));
  }
  std::vector<double> delta(n), next(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = safe_log(model.initial[i]) + peak[i];
  for (std::size_t t = 1; t < length; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      for (std::size_t i = 0; i < n; ++i) best = std::max(best, delta[i] + safe_log(model.transition(i, j)));
      next[j] = best + peak[j];
    }
    delta.swap(next);
  }
  return *std::max_element(delta.begin(), delta.end());
}

double uniform_log_likelihood(std::size_t symbols, std::size_t length) {
  if (symbols == 0) throw DomainError("uniform model needs at least one symbol");
  return -static_cast<double>(length) * std::log(static_cast<double>(symbols));
}

namespace {

struct Expectations {
  double log_likelihood = 0.0;
  std::vector<double> initial;
  Matrix transition;
  Matrix emission;
};

Expectations expectation_step(const HmmModel& m, const std::vector<std::vector<Code>>& sequences) {
  const auto n = m.states();
  Expectations ex{0.0, std::vector<double>(n, 0.0), Matrix(n, n), Matrix(n, m.symbols())};
  std::vector<double> alpha, scale, beta;
  for (const auto& seq : sequences) {
    if (!forward_scaled(m, seq, alpha, scale)) {
      throw DomainError("training sequence has zero probability under the current model");
    }
    const auto len = seq.size();
    for (double c : scale) ex.log_likelihood += std::log(c);

    beta.assign(len * n, 0.0);
    std::fill(beta.begin() + static_cast<std::ptrdiff_t>((len - 1) * n), beta.end(), 1.0);
    for (std::size_t t = len - 1; t > 0; --t) {
      const double* nb = beta.data() + t * n;
      double* cb = beta.data() + (t - 1) * n;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += m.transition(i, j) * m.emission(j, seq[t]) * nb[j];
        cb[i] = s / scale[t];
      }
    }

    for (std::size_t t = 0; t < len; ++t) {
      const double* a = alpha.data() + t * n;
      const double* b = beta.data() + t * n;
      for (std::size_t i = 0; i < n; ++i) {
        const double gamma = a[i] * b[i];
        if (t == 0) ex.initial[i] += gamma;
        ex.emission(i, seq[t]) += gamma;
      }
      if (t + 1 < len) {
        const double* nb = beta.data() + (t + 1) * n;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            ex.transition(i, j) += a[i] * m.transition(i, j) * m.emission(j, seq[t + 1]) * nb[j] / scale[t + 1];
          }
        }
      }
    }
  }
  return ex;
}

void renormalize_rows(Matrix& target, const Matrix& counts) {
  for (std::size_t i = 0; i < counts.rows(); ++i) {
    const auto r = counts.row(i);
    const double s = std::accumulate(r.begin(), r.end(), 0.0);
    if (!(s > 0.0)) continue;
    auto out = target.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] = r[j] / s;
  }
}

void maximization_step(HmmModel& m, const Expectations& ex) {
  const double s = std::accumulate(ex.initial.begin(), ex.initial.end(), 0.0);
  if (s > 0.0) {
    for (std::size_t i = 0; i < m.states(); ++i) m.initial[i] = ex.initial[i] / s;
  }
  renormalize_rows(m.transition, ex.transition);
  renormalize_rows(m.emission, ex.emission);
}

}  // namespace

BaumWelchResult baum_welch(HmmModel model, const std::vector<std::vector<Code>>& sequences, int max_iter,
                           double tol) {
  if (sequences.empty()) throw DomainError("Baum-Welch needs at least one sequence");
  if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  for (const auto& seq : sequences) check_codes(model, seq);

  BaumWelchResult out;
  auto ex = expectation_step(model, sequences);
  out.log_likelihoods.push_back(ex.log_likelihood);
  while (out.iterations < max_iter) {
    maximization_step(model, ex);
    ++out.iterations;
    ex = expectation_step(model, sequences);
    const double gain = ex.log_likelihood - out.log_likelihoods.back();
    out.log_likelihoods.push_back(ex.log_likelihood);
    if (gain < tol) break;
  }
  out.model = std::move(model);
  return out;
}

ModelBank build_model_bank(const Catalog& catalog, double smoothing, double self_loop) {
  if (catalog.empty()) throw DomainError("empty catalog");
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) throw DomainError("smoothing must be positive");
  if (!(self_loop >= 0.0 && self_loop <= 1.0)) throw DomainError("self-loop bias must lie in [0,1]");

  const auto symbols = catalog.vocab().size();
  const auto stages = catalog.window();
  const double alpha_mass = smoothing * static_cast<double>(symbols);

  ModelBank bank;
  bank.smoothing = smoothing;
  bank.self_loop = self_loop;

  const auto labels = catalog.labels();
  const auto n_labels = labels.size();
  HmmModel& ls = bank.label_state;
  ls.transition = Matrix(n_labels, n_labels);
  ls.emission = Matrix(n_labels, symbols);
  ls.initial.assign(n_labels, 1.0 / static_cast<double>(n_labels));
  ls.state_labels = labels;

  for (std::size_t li = 0; li < n_labels; ++li) {
    const auto& label = labels[li];
    Matrix stage_counts(stages, symbols);
    Matrix pooled(1, symbols);
    double patterns = 0.0;
    for (const auto& e : catalog.entries()) {
      if (e.label != label) continue;
      patterns += 1.0;
      const auto codes = catalog.encode_pattern(e);
      for (std::size_t i = 0; i < stages; ++i) {
        stage_counts(i, codes[i]) += 1.0;
        pooled(0, codes[i]) += 1.0;
      }
    }

    HmmModel m;
    m.transition = Matrix(stages, stages);
    m.emission = Matrix(stages, symbols);
    m.initial.assign(stages, 0.0);
    m.initial[0] = 1.0;
    for (std::size_t i = 0; i < stages; ++i) {
      m.transition(i, i + 1 < stages ? i + 1 : i) = 1.0;
      for (std::size_t k = 0; k < symbols; ++k) {
        m.emission(i, k) = (stage_counts(i, k) + smoothing) / (patterns + alpha_mass);
      }
      m.state_labels.push_back("stage-" + std::to_string(i));
    }
    bank.per_class.emplace(label, std::move(m));

    const double pooled_total = patterns * static_cast<double>(stages);
    for (std::size_t k = 0; k < symbols; ++k) ls.emission(li, k) = (pooled(0, k) + smoothing) / (pooled_total + alpha_mass);
    for (std::size_t lj = 0; lj < n_labels; ++lj) {
      if (n_labels == 1) ls.transition(li, lj) = 1.0;
      else ls.transition(li, lj) = li == lj ? self_loop : (1.0 - self_loop) / static_cast<double>(n_labels - 1);
    }
  }
  return bank;
}

std::vector<LabelScore> score_all(const ModelBank& bank, std::span<const Code> codes) {
  if (codes.empty()) throw DomainError("observation sequence is empty");
  std::vector<LabelScore> out;
  out.reserve(bank.per_class.size());
  for (const auto& [label, model] : bank.per_class) out.push_back({label, forward_log_likelihood(model, codes)});
  return out;
}

}  // namespace gahmm
