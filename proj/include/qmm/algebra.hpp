#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace qmm {

/// Finite abelian group presented as a product of cyclic groups
/// Z_{n_1} x ... x Z_{n_k}. The empty product is the trivial group.
/// The group is identified with its dual through this presentation,
/// so elements and dual elements share the same index type.
class FiniteAbelianGroup {
public:
    FiniteAbelianGroup() = default;
    explicit FiniteAbelianGroup(std::vector<int> cyclic_orders);

    /// Parses literals like "Z2", "Z3", "Z2xZ2" (case-insensitive).
    static FiniteAbelianGroup parse(std::string_view literal);

    int order() const noexcept { return order_; }
    int factor_count() const noexcept { return int(cyclic_orders_.size()); }
    const std::vector<int>& cyclic_orders() const noexcept { return cyclic_orders_; }
    std::string literal() const;

    bool operator==(const FiniteAbelianGroup& other) const noexcept {
        return cyclic_orders_ == other.cyclic_orders_;
    }

private:
    std::vector<int> cyclic_orders_;
    int order_ = 1;
};

/// Element of a FiniteAbelianGroup (or its dual), componentwise mod n_t.
/// Always stored reduced, so equality is structural.
struct GroupIndex {
    std::vector<int> components;
    bool operator==(const GroupIndex&) const = default;
};

GroupIndex index_zero(const FiniteAbelianGroup& group);
GroupIndex index_reduce(const FiniteAbelianGroup& group, std::vector<int> raw);
GroupIndex index_add(const FiniteAbelianGroup& group, const GroupIndex& a, const GroupIndex& b);
GroupIndex index_neg(const FiniteAbelianGroup& group, const GroupIndex& a);
GroupIndex index_sub(const FiniteAbelianGroup& group, const GroupIndex& a, const GroupIndex& b);
bool index_is_zero(const GroupIndex& a) noexcept;

/// Mixed-radix flattening, first component most significant.
int flat_index(const FiniteAbelianGroup& group, const GroupIndex& a);
GroupIndex unflatten_index(const FiniteAbelianGroup& group, int flat);

/// Fourier coupling <i,b> = prod_t exp(2 pi sqrt(-1) i_t b_t / n_t), a
/// bicharacter with values on the unit circle.
std::complex<double> coupling(const FiniteAbelianGroup& group, const GroupIndex& i,
                              const GroupIndex& b);

}  // namespace qmm
