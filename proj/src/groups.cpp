#include "backaudit/groups.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "backaudit/error.hpp"
#include "backaudit/table.hpp"

namespace backaudit {

namespace {

std::string default_label(const GroupKey& key) {
    std::string out;
    for (std::size_t i = 0; i < key.codes.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(key.codes[i]);
    }
    return out;
}

}  // namespace

ContextColumn ContextColumn::from_table(const AuditTable& table,
                                        std::span<const std::string> context_cols) {
    if (context_cols.empty()) throw ConfigError("at least one context column is required");
    std::vector<const Column*> cols;
    for (const auto& name : context_cols) {
        const Column& c = table.column(name);
        if (!c.is_categorical()) {
            throw DataError(fmt::format("context column '{}' is not categorical", name));
        }
        cols.push_back(&c);
    }

    // Mixed-radix packing, first column most significant, preserves the
    // lexicographic key order.
    std::uint64_t radix_product = 1;
    for (const auto* c : cols) {
        const std::uint64_t r = std::max<std::size_t>(c->cardinality(), 1);
        if (radix_product > std::numeric_limits<std::uint64_t>::max() / r) {
            throw ConfigError("too many context combinations to index");
        }
        radix_product *= r;
    }
    const std::size_t n = table.n_rows();
    std::vector<std::uint64_t> packed(n, 0);
    for (const auto* c : cols) {
        const std::uint64_t r = std::max<std::size_t>(c->cardinality(), 1);
        for (std::size_t i = 0; i < n; ++i) packed[i] = packed[i] * r + c->codes[i];
    }
    std::vector<std::uint64_t> distinct(packed);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    ContextColumn out;
    out.ids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.ids_[i] = static_cast<std::uint32_t>(
            std::lower_bound(distinct.begin(), distinct.end(), packed[i]) - distinct.begin());
    }
    auto keys = std::make_shared<std::vector<GroupKey>>();
    auto labels = std::make_shared<std::vector<std::string>>();
    std::vector<std::size_t> first_row(distinct.size(), n);
    for (std::size_t i = 0; i < n; ++i) first_row[out.ids_[i]] = std::min(first_row[out.ids_[i]], i);
    for (std::size_t g = 0; g < distinct.size(); ++g) {
        GroupKey key;
        std::string label;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::uint32_t code = cols[c]->codes[first_row[g]];
            key.codes.push_back(code);
            if (c) label += '|';
            label += cols[c]->dictionary[code];
        }
        keys->push_back(std::move(key));
        labels->push_back(std::move(label));
    }
    out.keys_ = std::move(keys);
    out.labels_ = std::move(labels);
    return out;
}

ContextColumn ContextColumn::from_keys(std::span<const GroupKey> row_keys) {
    std::map<GroupKey, std::uint32_t> index;
    for (const auto& k : row_keys) index.emplace(k, 0);
    auto keys = std::make_shared<std::vector<GroupKey>>();
    auto labels = std::make_shared<std::vector<std::string>>();
    for (auto& [k, id] : index) {
        id = static_cast<std::uint32_t>(keys->size());
        keys->push_back(k);
        labels->push_back(default_label(k));
    }
    ContextColumn out;
    out.ids_.reserve(row_keys.size());
    for (const auto& k : row_keys) out.ids_.push_back(index.at(k));
    out.keys_ = std::move(keys);
    out.labels_ = std::move(labels);
    return out;
}

ContextColumn ContextColumn::from_codes(std::span<const std::uint32_t> codes) {
    std::vector<GroupKey> row_keys;
    row_keys.reserve(codes.size());
    for (auto c : codes) row_keys.push_back(GroupKey{{c}});
    return from_keys(row_keys);
}

ContextColumn ContextColumn::take(std::span<const std::size_t> rows) const {
    ContextColumn out;
    out.ids_.reserve(rows.size());
    for (auto r : rows) out.ids_.push_back(ids_.at(r));
    out.keys_ = keys_;
    out.labels_ = labels_;
    return out;
}

std::vector<double> take_values(std::span<const double> values, std::span<const std::size_t> rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(values[r]);
    return out;
}

}  // namespace backaudit
