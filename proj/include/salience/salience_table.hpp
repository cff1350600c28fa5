#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "salience/corpus.hpp"

namespace salience {

enum class Method { Keyword, Cluster };

std::string_view method_name(Method m);

struct SalienceCell {
    std::size_t issue = 0;  // index into SalienceTable::issues
    DayIndex day = 0;
    Channel channel;

    auto operator<=>(const SalienceCell&) const = default;
};

/// Counts per (issue, day, channel). Only nonzero cells are stored.
struct SalienceTable {
    Method method = Method::Keyword;
    std::vector<std::string> issues;
    std::map<SalienceCell, std::uint64_t> counts;

    void add(const SalienceCell& cell, std::uint64_t n);
    /// Cell-wise sum; throws IssueSetMismatch when the issue lists differ.
    SalienceTable& operator+=(const SalienceTable& other);

    std::vector<std::uint64_t> issue_totals() const;
    /// Totals per issue for each channel present in the table.
    std::map<Channel, std::vector<std::uint64_t>> totals_by_channel() const;
    /// Totals per issue for each day present in the table.
    std::map<DayIndex, std::vector<std::uint64_t>> totals_by_day() const;

    bool operator==(const SalienceTable&) const = default;
};

}  // namespace salience
