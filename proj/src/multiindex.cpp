#include "rpcsde/multiindex.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace rpcsde {

int total_order(const MultiIndex& a) {
    return std::accumulate(a.begin(), a.end(), 0);
}

MultiIndex mi_add(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) throw dimension_error("multi-index dimension mismatch in addition");
    MultiIndex r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

MultiIndex mi_sub(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) throw dimension_error("multi-index dimension mismatch in subtraction");
    MultiIndex r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (b[i] > a[i]) throw std::invalid_argument("multi-index subtraction requires b <= a componentwise");
        r[i] = a[i] - b[i];
    }
    return r;
}

bool mi_leq(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

std::string mi_text(const MultiIndex& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += '_';
        s += std::to_string(a[i]);
    }
    return s;
}

MultiIndex mi_parse(const std::string& text) {
    MultiIndex a;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, '_')) {
        if (tok.empty()) throw std::invalid_argument("bad multi-index text: " + text);
        a.push_back(std::stoi(tok));
    }
    if (a.empty()) throw std::invalid_argument("bad multi-index text: " + text);
    return a;
}

namespace {

// Emit all exponent tuples of dimension d summing to exactly `order`,
// in lexicographic ascending order.
void emit_grade(int d, int order, MultiIndex& scratch, int coord, std::vector<MultiIndex>& out) {
    if (coord == d - 1) {
        scratch[coord] = order;
        out.push_back(scratch);
        return;
    }
    for (int e = 0; e <= order; ++e) {
        scratch[coord] = e;
        emit_grade(d, order - e, scratch, coord + 1, out);
    }
}

}  // namespace

GradedBasis::GradedBasis(int dimension, int max_order) : d_(dimension), order_(max_order) {
    if (dimension < 1) throw config_error("basis dimension must be >= 1");
    if (max_order < 0) throw config_error("basis max order must be >= 0");
    MultiIndex scratch(dimension, 0);
    grade_offsets_.assign(static_cast<std::size_t>(max_order) + 1, 0);
    for (int g = 0; g <= max_order; ++g) {
        emit_grade(dimension, g, scratch, 0, indices_);
        grade_offsets_[g] = indices_.size();
    }
    orders_.reserve(indices_.size());
    lookup_.reserve(indices_.size());
    for (std::size_t p = 0; p < indices_.size(); ++p) {
        orders_.push_back(total_order(indices_[p]));
        lookup_.emplace(mi_text(indices_[p]), p);
    }
}

std::size_t GradedBasis::position(const MultiIndex& a) const {
    if (static_cast<int>(a.size()) != d_)
        throw dimension_error("multi-index dimension does not match basis");
    auto it = lookup_.find(mi_text(a));
    if (it == lookup_.end())
        throw std::out_of_range("multi-index order " + std::to_string(total_order(a)) +
                                " exceeds basis order " + std::to_string(order_));
    return it->second;
}

bool GradedBasis::contains(const MultiIndex& a) const {
    return static_cast<int>(a.size()) == d_ && total_order(a) <= order_;
}

std::size_t GradedBasis::count_up_to(int g) const {
    if (g < 0) return 0;
    if (g >= order_) return indices_.size();
    return grade_offsets_[g];
}

GradedBasis enumerate_basis(int dimension, int max_order) {
    return GradedBasis(dimension, max_order);
}

std::size_t binomial_size(int dimension, int max_order) {
    // binom(d + L, L) without overflow for the sizes used here
    unsigned long long r = 1;
    for (int k = 1; k <= dimension; ++k)
        r = r * static_cast<unsigned long long>(max_order + k) / static_cast<unsigned long long>(k);
    return static_cast<std::size_t>(r);
}

std::uint64_t multinomial(const MultiIndex& gamma, const std::vector<MultiIndex>& parts) {
    MultiIndex sum(gamma.size(), 0);
    for (const auto& p : parts) {
        if (p.size() != gamma.size())
            throw dimension_error("multinomial part dimension mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] < 0) throw std::invalid_argument("negative exponent in multinomial part");
            sum[i] += p[i];
        }
    }
    if (sum != gamma) throw std::invalid_argument("multinomial parts do not sum to gamma");

    // Coordinatewise product of iterated binomials: gamma_i! / prod_j parts[j]_i!
    // computed as prod C(n_running, k).  Guarded in 128-bit.
    unsigned __int128 acc = 1;
    const unsigned __int128 limit = static_cast<unsigned __int128>(UINT64_MAX);
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        int n = 0;
        for (const auto& p : parts) {
            int k = p[i];
            n += k;
            // C(n, k)
            unsigned __int128 c = 1;
            for (int t = 1; t <= k; ++t) {
                c = c * static_cast<unsigned>(n - k + t);
                c /= static_cast<unsigned>(t);
            }
            acc *= c;
            if (acc > limit) throw std::overflow_error("multinomial coefficient exceeds 64 bits");
        }
    }
    return static_cast<std::uint64_t>(acc);
}

}  // namespace rpcsde
