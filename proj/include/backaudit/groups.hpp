#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace backaudit {

class AuditTable;

/// Context value of one row: one categorical code per context column.
/// Ordered lexicographically.
struct GroupKey {
    std::vector<std::uint32_t> codes;

    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
    friend bool operator==(const GroupKey&, const GroupKey&) = default;
};

/// Per-row dense group index over a shared, sorted key set. Row subsets made
/// with take() keep the full key set so ids stay comparable across splits.
class ContextColumn {
public:
    static ContextColumn from_table(const AuditTable& table,
                                    std::span<const std::string> context_cols);
    static ContextColumn from_keys(std::span<const GroupKey> row_keys);
    /// Single context column given directly as codes.
    static ContextColumn from_codes(std::span<const std::uint32_t> codes);

    std::size_t size() const { return ids_.size(); }
    std::size_t n_groups() const { return keys_->size(); }
    std::span<const std::uint32_t> ids() const { return ids_; }
    const std::vector<GroupKey>& keys() const { return *keys_; }
    const std::vector<std::string>& labels() const { return *labels_; }
    const GroupKey& key_of_row(std::size_t row) const { return (*keys_)[ids_[row]]; }

    ContextColumn take(std::span<const std::size_t> rows) const;

private:
    std::vector<std::uint32_t> ids_;
    std::shared_ptr<const std::vector<GroupKey>> keys_;
    std::shared_ptr<const std::vector<std::string>> labels_;
};

/// Gathers `values` at `rows`.
std::vector<double> take_values(std::span<const double> values, std::span<const std::size_t> rows);

}  // namespace backaudit
