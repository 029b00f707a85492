#pragma once

#include <cstdint>
#include <vector>

namespace relaysim {

// Codebook geometry: M_S source messages partitioned into M_R contiguous
// bins of M_D messages each, so M_S = M_R * M_D.
struct CodebookParams {
    std::uint64_t M_S = 1;
    std::uint64_t M_R = 1;
    std::uint64_t M_D = 1;

    static CodebookParams make(std::uint64_t m_r, std::uint64_t m_d);
    void validate() const;
};

// Message index with its bin decomposition: m = m1 * M_D + m2,
// 0 <= m1 < M_R, 0 <= m2 < M_D. All indices are zero-based.
struct Message {
    std::uint64_t m = 0;
    std::uint64_t m1 = 0;
    std::uint64_t m2 = 0;
};

// Euclidean division of a message index into (bin, within-bin) parts.
Message split(std::uint64_t m, const CodebookParams& cb);

// Inverse of split.
std::uint64_t join(std::uint64_t m1, std::uint64_t m2, const CodebookParams& cb);

// The M_D message indices {m1*M_D, ..., m1*M_D + M_D - 1} of bin m1.
std::vector<std::uint64_t> bin_members(std::uint64_t m1, const CodebookParams& cb);

}  // namespace relaysim
