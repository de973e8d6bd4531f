#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpcsde/errors.hpp"

namespace rpcsde {

// A d-dimensional multi-index: tuple of non-negative integer exponents.
using MultiIndex = std::vector<int>;

int total_order(const MultiIndex& a);

// Componentwise sum / difference.  Subtraction requires b <= a componentwise.
MultiIndex mi_add(const MultiIndex& a, const MultiIndex& b);
MultiIndex mi_sub(const MultiIndex& a, const MultiIndex& b);
bool mi_leq(const MultiIndex& a, const MultiIndex& b);  // a <= b componentwise

// Text form "a_b_c" used in CSV column headers.
std::string mi_text(const MultiIndex& a);
MultiIndex mi_parse(const std::string& text);

// All multi-indices of dimension d with |a| <= L, ordered by total order,
// ties broken lexicographically ascending on the exponent tuple.
// Position 0 is always the zero index.
class GradedBasis {
  public:
    GradedBasis(int dimension, int max_order);

    int dimension() const { return d_; }
    int max_order() const { return order_; }
    std::size_t size() const { return indices_.size(); }
    const MultiIndex& at(std::size_t pos) const { return indices_[pos]; }
    const std::vector<MultiIndex>& indices() const { return indices_; }

    // Ordinal of a multi-index; throws std::out_of_range when |a| > max_order.
    std::size_t position(const MultiIndex& a) const;
    bool contains(const MultiIndex& a) const;

    int order_of(std::size_t pos) const { return orders_[pos]; }
    // Number of indices with total order <= g (prefix length of grade g).
    std::size_t count_up_to(int g) const;

  private:
    int d_;
    int order_;
    std::vector<MultiIndex> indices_;
    std::vector<int> orders_;
    std::vector<std::size_t> grade_offsets_;  // grade_offsets_[g] = count with |a| <= g
    std::unordered_map<std::string, std::size_t> lookup_;
};

GradedBasis enumerate_basis(int dimension, int max_order);

std::size_t binomial_size(int dimension, int max_order);  // binom(d + L, L)

// gamma! / prod(parts_j!) computed exactly in integer arithmetic.
// Throws std::invalid_argument when the parts do not sum to gamma, and
// std::overflow_error when the result exceeds 64 bits.
std::uint64_t multinomial(const MultiIndex& gamma, const std::vector<MultiIndex>& parts);

}  // namespace rpcsde
