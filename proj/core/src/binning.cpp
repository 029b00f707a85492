#include "relaysim/binning.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace relaysim {

CodebookParams CodebookParams::make(std::uint64_t m_r, std::uint64_t m_d) {
    if (m_r < 1 || m_d < 1) {
        throw std::invalid_argument("CodebookParams: M_R and M_D must be >= 1");
    }
    if (m_r > std::numeric_limits<std::uint64_t>::max() / m_d) {
        throw std::invalid_argument("CodebookParams: M_R * M_D overflows");
    }
    CodebookParams cb;
    cb.M_R = m_r;
    cb.M_D = m_d;
    cb.M_S = m_r * m_d;
    return cb;
}

void CodebookParams::validate() const {
    if (M_R < 1 || M_D < 1) {
        throw std::invalid_argument("CodebookParams: M_R and M_D must be >= 1");
    }
    if (M_S != M_R * M_D) {
        throw std::invalid_argument("CodebookParams: M_S != M_R * M_D");
    }
}

Message split(std::uint64_t m, const CodebookParams& cb) {
    cb.validate();
    if (m >= cb.M_S) {
        throw std::out_of_range("split: message index " + std::to_string(m) +
                                " not in [0, " + std::to_string(cb.M_S) + ")");
    }
    return Message{m, m / cb.M_D, m % cb.M_D};
}

std::uint64_t join(std::uint64_t m1, std::uint64_t m2, const CodebookParams& cb) {
    cb.validate();
    if (m1 >= cb.M_R) {
        throw std::out_of_range("join: bin index " + std::to_string(m1) +
                                " not in [0, " + std::to_string(cb.M_R) + ")");
    }
    if (m2 >= cb.M_D) {
        throw std::out_of_range("join: within-bin index " + std::to_string(m2) +
                                " not in [0, " + std::to_string(cb.M_D) + ")");
    }
    return m1 * cb.M_D + m2;
}

std::vector<std::uint64_t> bin_members(std::uint64_t m1, const CodebookParams& cb) {
    cb.validate();
    if (m1 >= cb.M_R) {
        throw std::out_of_range("bin_members: bin index " + std::to_string(m1) +
                                " not in [0, " + std::to_string(cb.M_R) + ")");
    }
    std::vector<std::uint64_t> members(cb.M_D);
    for (std::uint64_t i = 0; i < cb.M_D; ++i) {
        members[i] = m1 * cb.M_D + i;
    }
    return members;
}

}  // namespace relaysim
