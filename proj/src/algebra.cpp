#include "qmm/algebra.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qmm {

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<int> cyclic_orders)
    : cyclic_orders_(std::move(cyclic_orders)) {
    order_ = 1;
    for (int n : cyclic_orders_) {
        if (n < 1) throw std::invalid_argument("cyclic order must be >= 1");
        if (order_ > 1'000'000 / n)
            throw std::invalid_argument("group order too large");
        order_ *= n;
    }
}

FiniteAbelianGroup FiniteAbelianGroup::parse(std::string_view literal) {
    std::vector<int> orders;
    size_t pos = 0;
    auto fail = [&]() -> std::invalid_argument {
        return std::invalid_argument("bad group literal: " + std::string(literal));
    };
    while (pos < literal.size()) {
        char c = literal[pos];
        if (c != 'Z' && c != 'z') throw fail();
        ++pos;
        size_t start = pos;
        while (pos < literal.size() && std::isdigit(static_cast<unsigned char>(literal[pos])))
            ++pos;
        if (pos == start) throw fail();
        int n = 0;
        for (size_t t = start; t < pos; ++t) {
            n = n * 10 + (literal[t] - '0');
            if (n > 1'000'000) throw fail();
        }
        if (n < 1) throw fail();
        orders.push_back(n);
        if (pos < literal.size()) {
            char sep = literal[pos];
            if (sep != 'x' && sep != 'X') throw fail();
            ++pos;
            if (pos == literal.size()) throw fail();
        }
    }
    if (orders.empty()) throw fail();
    return FiniteAbelianGroup(std::move(orders));
}

std::string FiniteAbelianGroup::literal() const {
    std::string out;
    for (size_t t = 0; t < cyclic_orders_.size(); ++t) {
        if (t) out += 'x';
        out += 'Z';
        out += std::to_string(cyclic_orders_[t]);
    }
    return out;
}

namespace {

void check_arity(const FiniteAbelianGroup& group, const GroupIndex& a) {
    if (int(a.components.size()) != group.factor_count())
        throw std::invalid_argument("group index arity mismatch");
}

int mod_reduce(int value, int n) {
    int r = value % n;
    return r < 0 ? r + n : r;
}

}  // namespace

GroupIndex index_zero(const FiniteAbelianGroup& group) {
    return GroupIndex{std::vector<int>(group.factor_count(), 0)};
}

GroupIndex index_reduce(const FiniteAbelianGroup& group, std::vector<int> raw) {
    if (int(raw.size()) != group.factor_count())
        throw std::invalid_argument("group index arity mismatch");
    for (int t = 0; t < group.factor_count(); ++t)
        raw[t] = mod_reduce(raw[t], group.cyclic_orders()[t]);
    return GroupIndex{std::move(raw)};
}

GroupIndex index_add(const FiniteAbelianGroup& group, const GroupIndex& a, const GroupIndex& b) {
    check_arity(group, a);
    check_arity(group, b);
    GroupIndex out = a;
    for (int t = 0; t < group.factor_count(); ++t)
        out.components[t] = mod_reduce(a.components[t] + b.components[t],
                                       group.cyclic_orders()[t]);
    return out;
}

GroupIndex index_neg(const FiniteAbelianGroup& group, const GroupIndex& a) {
    check_arity(group, a);
    GroupIndex out = a;
    for (int t = 0; t < group.factor_count(); ++t)
        out.components[t] = mod_reduce(-a.components[t], group.cyclic_orders()[t]);
    return out;
}

GroupIndex index_sub(const FiniteAbelianGroup& group, const GroupIndex& a, const GroupIndex& b) {
    check_arity(group, a);
    check_arity(group, b);
    GroupIndex out = a;
    for (int t = 0; t < group.factor_count(); ++t)
        out.components[t] = mod_reduce(a.components[t] - b.components[t],
                                       group.cyclic_orders()[t]);
    return out;
}

bool index_is_zero(const GroupIndex& a) noexcept {
    for (int c : a.components)
        if (c != 0) return false;
    return true;
}

int flat_index(const FiniteAbelianGroup& group, const GroupIndex& a) {
    check_arity(group, a);
    int flat = 0;
    for (int t = 0; t < group.factor_count(); ++t) {
        int c = a.components[t];
        if (c < 0 || c >= group.cyclic_orders()[t])
            throw std::invalid_argument("group index component out of range");
        flat = flat * group.cyclic_orders()[t] + c;
    }
    return flat;
}

GroupIndex unflatten_index(const FiniteAbelianGroup& group, int flat) {
    if (flat < 0 || flat >= group.order())
        throw std::invalid_argument("flat index out of range");
    GroupIndex out = index_zero(group);
    for (int t = group.factor_count() - 1; t >= 0; --t) {
        int n = group.cyclic_orders()[t];
        out.components[t] = flat % n;
        flat /= n;
    }
    return out;
}

std::complex<double> coupling(const FiniteAbelianGroup& group, const GroupIndex& i,
                              const GroupIndex& b) {
    check_arity(group, i);
    check_arity(group, b);
    // Accumulate the phase as a rational multiple of 2 pi before taking
    // the exponential, so conjugate couplings cancel exactly.
    double turns = 0.0;
    for (int t = 0; t < group.factor_count(); ++t) {
        int n = group.cyclic_orders()[t];
        int prod = mod_reduce(i.components[t] * b.components[t], n);
        turns += double(prod) / double(n);
    }
    turns -= std::floor(turns);
    // phases landing on a quarter turn come out exactly +-1 or +-sqrt(-1)
    double quarters = 4.0 * turns;
    if (quarters == std::nearbyint(quarters)) {
        switch (int(quarters) & 3) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    double angle = 2.0 * std::numbers::pi * turns;
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace qmm
