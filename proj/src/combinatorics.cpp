#include "qcert/combinatorics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "qcert/error.hpp"

namespace qcert {

namespace {

void require_nm(int n, int m) {
  if (n > BitString::kMaxLength || m < 1 || m >= n) {
    throw Error(Errc::invalid_parameters,
                "need n > m >= 1 (got n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }
}

std::uint64_t low_bits(int count) {
  return count >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << count) - 1);
}

// Dense bitset over at most a few thousand vertices.
class Bitset {
 public:
  explicit Bitset(std::size_t bits = 0) : words_((bits + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool any() const {
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  Bitset intersect(const Bitset& other) const {
    Bitset out;
    out.words_.resize(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = words_[i] & other.words_[i];
    return out;
  }
  void subtract(const Bitset& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  }
  // Lowest set index, or npos.
  std::size_t first() const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] != 0) return i * 64 + static_cast<std::size_t>(std::countr_zero(words_[i]));
    }
    return npos;
  }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::uint64_t> words_;
};

// Branch and bound with greedy colouring bounds (MCQ style). Vertices are
// expected in non-increasing degree order.
class CliqueSearch {
 public:
  explicit CliqueSearch(std::vector<Bitset> adjacency) : adj_(std::move(adjacency)) {}

  std::vector<std::size_t> run() {
    Bitset all(adj_.size());
    for (std::size_t v = 0; v < adj_.size(); ++v) all.set(v);
    std::vector<std::size_t> current;
    expand(current, all);
    return best_;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  void colour(Bitset pending, std::vector<std::size_t>& order, std::vector<std::size_t>& bound) const {
    std::size_t colour_index = 0;
    while (pending.any()) {
      ++colour_index;
      Bitset available = pending;
      while (available.any()) {
        const std::size_t v = available.first();
        available.reset(v);
        available.subtract(adj_[v]);
        pending.reset(v);
        order.push_back(v);
        bound.push_back(colour_index);
      }
    }
  }

  void expand(std::vector<std::size_t>& current, Bitset candidates) {
    ++nodes_;
    std::vector<std::size_t> order;
    std::vector<std::size_t> bound;
    colour(candidates, order, bound);
    for (std::size_t i = order.size(); i-- > 0;) {
      if (current.size() + bound[i] <= best_.size()) return;
      const std::size_t v = order[i];
      current.push_back(v);
      Bitset next = candidates.intersect(adj_[v]);
      if (next.any()) {
        expand(current, next);
      } else if (current.size() > best_.size()) {
        best_ = current;
      }
      current.pop_back();
      candidates.reset(v);
    }
  }

  std::vector<Bitset> adj_;
  std::vector<std::size_t> best_;
  std::uint64_t nodes_ = 0;
};

}  // namespace

void ConfigurationSpec::validate() const {
  if (!(n > m && m >= s && s >= 0) || n > BitString::kMaxLength) {
    throw Error(Errc::invalid_parameters, "need n > m >= s >= 0 (got n=" + std::to_string(n) +
                                              ", m=" + std::to_string(m) + ", s=" + std::to_string(s) + ")");
  }
}

void StateGroup::validate() const {
  spec.validate();
  if (members.empty()) throw Error(Errc::invalid_parameters, "empty state group");
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& a = members[i];
    if (a.length() != spec.n || a.weight() != spec.m) {
      throw Error(Errc::invalid_parameters, "member " + a.str() + " does not match (n, m)");
    }
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      if (members[j] == a) throw Error(Errc::invalid_parameters, "duplicate member " + a.str());
      if (coincidence(a, members[j]) != spec.s) {
        throw Error(Errc::invalid_parameters,
                    "members " + a.str() + " and " + members[j].str() + " do not coincide in s bins");
      }
    }
  }
}

void GramMatrix::validate(double psd_tolerance) const {
  const Eigen::Index dim = entries.rows();
  if (dim == 0 || entries.cols() != dim) throw Error(Errc::not_psd, "Gram matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (entries(i, i) != 1.0) throw Error(Errc::not_psd, "Gram diagonal must be exactly 1");
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double v = entries(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 || v != entries(j, i)) {
        throw Error(Errc::not_psd, "Gram entries must be symmetric and lie in [0, 1]");
      }
    }
  }
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(entries, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (min_eig < -psd_tolerance) {
    throw Error(Errc::not_psd, "Gram matrix has eigenvalue " + std::to_string(min_eig));
  }
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return result;
}

std::vector<Codeword> enumerate_states(int n, int m) {
  require_nm(n, m);
  // Walk combinations of pulse positions in lexicographic order.
  std::vector<int> positions(static_cast<std::size_t>(m));
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<Codeword> out;
  out.reserve(binomial(n, m));
  while (true) {
    std::uint64_t mask = 0;
    for (int p : positions) mask |= std::uint64_t{1} << p;
    out.emplace_back(mask, n);
    int i = m - 1;
    while (i >= 0 && positions[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) break;
    ++positions[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) {
      positions[static_cast<std::size_t>(j)] = positions[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

int coincidence(const BitString& a, const BitString& b) {
  if (a.length() != b.length()) {
    throw Error(Errc::length_mismatch, a.str() + " vs " + b.str());
  }
  return std::popcount(a.mask() & b.mask());
}

int hamming_from_s(int m, int s) {
  if (s < 0 || s > m) throw Error(Errc::invalid_parameters, "need m >= s >= 0");
  return 2 * (m - s);
}

int subset_count(int n, int m) {
  require_nm(n, m);
  return 2 * m - n <= 0 ? m : n - m;
}

std::int64_t lower_bound_code_size(int n, int m, int s) {
  ConfigurationSpec{n, m, s}.validate();
  if (m == s) throw Error(Errc::degenerate_group, "m = s leaves a single state");
  if (n + s - 2 * m < 0) return 1;
  if (2 * m <= n) return (n - s) / (m - s);
  return (2 * m - s) / (m - s);
}

StateGroup construct_lower_bound_code(int n, int m, int s) {
  const std::int64_t size = lower_bound_code_size(n, m, s);
  StateGroup group{{n, m, s}, {}};
  const int block = m - s;
  if (size == 1) {
    group.members.emplace_back(low_bits(m), n);
  } else if (2 * m <= n) {
    const std::uint64_t shared = low_bits(s);
    for (std::int64_t j = 0; j < size; ++j) {
      const int offset = s + static_cast<int>(j) * block;
      group.members.emplace_back(shared | (low_bits(block) << offset), n);
    }
  } else {
    // Shared vacuum occupies the last n + s - 2m bins; each state punches its
    // own block of m - s vacuum bins into the leading 2m - s bins.
    const int live = 2 * m - s;
    for (std::int64_t j = 0; j < size; ++j) {
      const int offset = static_cast<int>(j) * block;
      group.members.emplace_back(low_bits(live) & ~(low_bits(block) << offset), n);
    }
  }
  return group;
}

MaxGroupResult max_constant_s_group(int n, int m, int s, int search_limit) {
  ConfigurationSpec{n, m, s}.validate();
  if (n > search_limit) {
    throw Error(Errc::search_limit_exceeded,
                "n=" + std::to_string(n) + " exceeds the exact search limit " + std::to_string(search_limit));
  }
  const auto words = enumerate_states(n, m);

  // The compatibility graph is vertex-transitive under bin permutations, so
  // some maximum clique contains words[0]; search its neighbourhood only.
  std::vector<std::size_t> local;
  for (std::size_t v = 1; v < words.size(); ++v) {
    if (coincidence(words[0], words[v]) == s) local.push_back(v);
  }
  const std::size_t k = local.size();
  std::vector<std::vector<std::size_t>> neighbours(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (coincidence(words[local[i]], words[local[j]]) == s) {
        neighbours[i].push_back(j);
        neighbours[j].push_back(i);
      }
    }
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return neighbours[a].size() > neighbours[b].size(); });
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) rank[order[r]] = r;
  std::vector<Bitset> adjacency(k, Bitset(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (auto j : neighbours[i]) adjacency[rank[i]].set(rank[j]);
  }

  CliqueSearch search(std::move(adjacency));
  const auto clique = search.run();

  MaxGroupResult result;
  result.nodes = search.nodes();
  result.witness.spec = {n, m, s};
  result.witness.members.push_back(words[0]);
  for (auto r : clique) result.witness.members.push_back(words[local[order[r]]]);
  std::sort(result.witness.members.begin(), result.witness.members.end(),
            [](const Codeword& a, const Codeword& b) { return a > b; });
  result.size = static_cast<std::int64_t>(result.witness.members.size());
  return result;
}

std::vector<ClickPattern> ideal_outcome_set(std::span<const Codeword> members) {
  if (members.empty()) return {};
  const int n = members.front().length();
  std::set<std::uint64_t> masks;
  for (const auto& state : members) {
    if (state.length() != n) throw Error(Errc::length_mismatch, "group members differ in length");
    // Enumerate every submask of the pulse positions.
    const std::uint64_t support = state.mask();
    std::uint64_t sub = support;
    while (true) {
      masks.insert(sub);
      if (sub == 0) break;
      sub = (sub - 1) & support;
    }
  }
  std::vector<ClickPattern> out;
  out.reserve(masks.size());
  for (auto mask : masks) out.emplace_back(mask, n);
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t shared_prefix_outcome_count(std::int64_t members, int m, int s) {
  return members * ((std::int64_t{1} << m) - (std::int64_t{1} << s)) + (std::int64_t{1} << s);
}

std::int64_t closed_form_outcome_count(std::int64_t members, int m, int s) {
  return members * ((std::int64_t{1} << m) - 1) - (std::int64_t{1} << (m - s)) + 1;
}

double overlap_delta(double mu, int m, int s) {
  if (s < 0 || s > m) throw Error(Errc::invalid_parameters, "need m >= s >= 0");
  if (!(mu >= 0.0)) throw Error(Errc::invalid_parameters, "mean photon number must be >= 0");
  // <0|alpha> = exp(-mu / 2), raised to the Hamming distance 2(m - s).
  return std::exp(-mu * static_cast<double>(m - s));
}

GramMatrix gram_matrix(std::span<const Codeword> members, double mu) {
  if (members.empty()) throw Error(Errc::invalid_parameters, "empty state list");
  const auto dim = static_cast<Eigen::Index>(members.size());
  const int m = members.front().weight();
  GramMatrix gram{Eigen::MatrixXd::Identity(dim, dim)};
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto& a = members[static_cast<std::size_t>(i)];
    if (a.weight() != m) throw Error(Errc::invalid_parameters, "members must share the same weight");
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      const double v = overlap_delta(mu, m, coincidence(a, members[static_cast<std::size_t>(j)]));
      gram.entries(i, j) = v;
      gram.entries(j, i) = v;
    }
  }
  gram.validate();
  return gram;
}

GramMatrix constant_overlap_gram(int inputs, double delta) {
  if (inputs < 1) throw Error(Errc::invalid_parameters, "need at least one input");
  if (!(delta >= 0.0 && delta <= 1.0)) throw Error(Errc::invalid_parameters, "overlap must lie in [0, 1]");
  GramMatrix gram{Eigen::MatrixXd::Constant(inputs, inputs, delta)};
  gram.entries.diagonal().setOnes();
  gram.validate();
  return gram;
}

}  // namespace qcert
