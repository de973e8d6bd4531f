#include "rpcsde/pce.hpp"

#include <cmath>
#include <string>

namespace rpcsde {

int support_degree(const std::vector<double>& c, const GradedBasis& gb, double eps) {
    int deg = -1;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (std::abs(c[i]) > eps) deg = gb.order_of(i);
    return deg;
}

PceCoeffs pce_expand_poly(const OrthonormalBasis& basis, const MvPoly& p) {
    PceCoeffs w;
    w.c = basis.expand(p);
    w.bound = std::max(0, p.degree());
    return w;
}

double pce_expectation(const PceCoeffs& w1, const PceCoeffs& w2) {
    const std::size_t n = std::min(w1.c.size(), w2.c.size());
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a) s += w1.c[a] * w2.c[a];
    return s;
}

double pce_expectation(const TripleTensor& t, const PceCoeffs& w1, const PceCoeffs& w2,
                       const PceCoeffs& w3) {
    const GradedBasis& gb = t.graded();
    const int d1 = support_degree(w1.c, gb);
    const int d2 = support_degree(w2.c, gb);
    const int d3 = support_degree(w3.c, gb);
    if (d1 + d2 + d3 > t.total_cap())
        throw closure_error("triple expectation of degrees " + std::to_string(d1) + "+" +
                            std::to_string(d2) + "+" + std::to_string(d3) +
                            " exceeds the restricted set cap " + std::to_string(t.total_cap()));
    const std::size_t n = t.side();
    double s = 0.0;
    for (std::size_t a = 0; a < n && gb.order_of(a) <= d1; ++a) {
        if (w1.c[a] == 0.0) continue;
        const double* sl = t.slice(a);
        const std::size_t b_max = gb.count_up_to(d2);
        for (std::size_t b = 0; b < b_max; ++b) {
            if (w2.c[b] == 0.0) continue;
            const double w12 = w1.c[a] * w2.c[b];
            const std::size_t c_max = gb.count_up_to(t.total_cap() - gb.order_of(a) - gb.order_of(b));
            const double* row = sl + b * n;
            double acc = 0.0;
            for (std::size_t c = 0; c < c_max && c < n; ++c) acc += w3.c[c] * row[c];
            s += w12 * acc;
        }
    }
    return s;
}

PceCoeffs pce_project_product(const TripleTensor& t, const PceCoeffs& w1, const PceCoeffs& w2) {
    const GradedBasis& gb = t.graded();
    const int d1 = support_degree(w1.c, gb);
    if (d1 > t.interaction() && t.total_cap() < 3 * t.degree())
        throw closure_error("projection factor degree " + std::to_string(d1) +
                            " exceeds the interaction degree " + std::to_string(t.interaction()));
    const std::size_t n = t.side();
    PceCoeffs out;
    out.c.assign(n, 0.0);
    out.bound = t.degree();
    // out_eta = sum_{a,b} w1_a w2_b Gamma_{a b eta}; all touched entries satisfy
    // |a| + |b| + |eta| <= S + L + L = cap.
    for (std::size_t a = 0; a < n && gb.order_of(a) <= d1; ++a) {
        if (w1.c[a] == 0.0) continue;
        const double* sl = t.slice(a);
        for (std::size_t b = 0; b < n; ++b) {
            const double w12 = w1.c[a] * w2.c[b];
            if (w12 == 0.0) continue;
            const std::size_t eta_max =
                gb.count_up_to(t.total_cap() - gb.order_of(a) - gb.order_of(b));
            const double* row = sl + b * n;
            for (std::size_t eta = 0; eta < eta_max; ++eta) out.c[eta] += w12 * row[eta];
        }
    }
    return out;
}

PceEngine::PceEngine(const OrthonormalBasis& basis, const TripleTensor& tensor,
                     const MomentTable* table)
    : basis_(basis),
      tensor_(tensor),
      table_(table),
      chunk_(std::min(tensor.interaction(), tensor.degree())),
      domain_(basis.dimension(),
              (table ? table->max_order() : tensor.total_cap()) + tensor.interaction()) {
    repr_cache_.resize(domain_.size());
    expect_cache_.resize(domain_.size());
}

namespace {

// Greedy left-to-right split: fill coordinates up to total `budget`.
MultiIndex greedy_head(const MultiIndex& gamma, int budget) {
    MultiIndex head(gamma.size(), 0);
    int left = budget;
    for (std::size_t i = 0; i < gamma.size() && left > 0; ++i) {
        head[i] = std::min(gamma[i], left);
        left -= head[i];
    }
    return head;
}

}  // namespace

const std::vector<double>& PceEngine::repr(const MultiIndex& mu) const {
    const std::size_t pos = domain_.position(mu);
    if (repr_cache_[pos]) return *repr_cache_[pos];
    const int o = total_order(mu);
    const int L = basis_.degree();
    if (o <= L) {
        repr_cache_[pos] = monomial_in_basis(basis_, mu);
        return *repr_cache_[pos];
    }
    // with a moment table the projection is available exactly while
    // |mu| + L stays within the table: c_eta = E[x^mu T_eta]
    if (table_ && o + L <= table_->max_order()) {
        const std::size_t n = basis_.size();
        std::vector<double> c(n, 0.0);
        for (std::size_t eta = 0; eta < n; ++eta) {
            double s = 0.0;
            for (std::size_t b = 0; b <= eta; ++b) {
                const double w = basis_.b(eta, b);
                if (w != 0.0) s += w * table_->get(mi_add(mu, basis_.graded().at(b)));
            }
            c[eta] = s;
        }
        repr_cache_[pos] = std::move(c);
        return *repr_cache_[pos];
    }
    if (chunk_ <= 0)
        throw degree_error("cannot represent monomial of order " + std::to_string(o) +
                           " with interaction degree 0");
    // peel the smallest chunk that brings the remainder into the exact range
    int chunk = chunk_;
    if (table_) {
        const int needed = o - (table_->max_order() - L);
        chunk = std::min(chunk_, std::max(1, needed));
    }
    const MultiIndex head = greedy_head(mu, chunk);
    const MultiIndex rest = mi_sub(mu, head);
    PceCoeffs ws{monomial_in_basis(basis_, head), chunk};
    PceCoeffs wr{repr(rest), basis_.degree()};
    repr_cache_[pos] = pce_project_product(tensor_, ws, wr).c;
    return *repr_cache_[pos];
}

double PceEngine::eval(const MultiIndex& gamma, bool use_table) const {
    const int o = total_order(gamma);
    if (o > domain_.max_order())
        throw degree_error("monomial expectation of order " + std::to_string(o) +
                           " exceeds the evaluation domain " + std::to_string(domain_.max_order()));
    if (use_table && table_ && o <= table_->max_order()) return table_->get(gamma);
    const int L = basis_.degree();
    // beyond the table both halves of a balanced split admit exact
    // projections, which loses far less than one short head against a long
    // chained remainder; below the table order the short head keeps the
    // evaluation exact (the projection remainder is orthogonal to it)
    const bool balanced = table_ && o > table_->max_order();
    const MultiIndex head = greedy_head(gamma, balanced ? (o + 1) / 2 : L);
    const std::vector<double>& wa = repr(head);
    const std::vector<double>& wb = repr(mi_sub(gamma, head));
    double s = 0.0;
    for (std::size_t a = 0; a < wa.size(); ++a) s += wa[a] * wb[a];
    return s;
}

double PceEngine::expect_monomial(const MultiIndex& gamma) const {
    if (total_order(gamma) > domain_.max_order())
        throw degree_error("monomial expectation of order " + std::to_string(total_order(gamma)) +
                           " exceeds the evaluation domain " + std::to_string(domain_.max_order()));
    const std::size_t pos = domain_.position(gamma);
    if (expect_cache_[pos]) return *expect_cache_[pos];
    expect_cache_[pos] = eval(gamma, true);
    return *expect_cache_[pos];
}

double PceEngine::expect_monomial_recursive(const MultiIndex& gamma) const {
    return eval(gamma, false);
}

double PceEngine::expect_poly(const MvPoly& q) const {
    double s = 0.0;
    for (const auto& [gamma, c] : q.terms()) s += c * expect_monomial(gamma);
    return s;
}

}  // namespace rpcsde
