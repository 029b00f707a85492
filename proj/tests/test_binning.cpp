#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <stdexcept>

#include "relaysim/binning.hpp"

using namespace relaysim;

TEST_CASE("split performs Euclidean division of the message index") {
    const CodebookParams cb = CodebookParams::make(3, 3);
    const Message msg = split(7, cb);
    CHECK(msg.m == 7);
    CHECK(msg.m1 == 2);
    CHECK(msg.m2 == 1);
}

TEST_CASE("split of zero is the zero pair") {
    for (std::uint64_t m_d : {1, 2, 5}) {
        const Message msg = split(0, CodebookParams::make(3, m_d));
        CHECK(msg.m1 == 0);
        CHECK(msg.m2 == 0);
    }
}

TEST_CASE("split with a single bin leaves the whole index within-bin") {
    const Message msg = split(5, CodebookParams::make(1, 6));
    CHECK(msg.m1 == 0);
    CHECK(msg.m2 == 5);
}

TEST_CASE("join reconstructs the message index") {
    const CodebookParams cb = CodebookParams::make(3, 3);
    CHECK(join(2, 1, cb) == 7);
    CHECK(join(0, 0, cb) == 0);
    CHECK(join(cb.M_R - 1, cb.M_D - 1, cb) == cb.M_S - 1);
}

TEST_CASE("join inverts split over the whole codebook") {
    const CodebookParams cb = CodebookParams::make(5, 7);
    for (std::uint64_t m = 0; m < cb.M_S; ++m) {
        const Message msg = split(m, cb);
        CHECK(join(msg.m1, msg.m2, cb) == m);
        CHECK(msg.m2 < cb.M_D);
    }
}

TEST_CASE("bin_members lists the contiguous index range of a bin") {
    CHECK(bin_members(2, CodebookParams::make(3, 3)) ==
          std::vector<std::uint64_t>{6, 7, 8});
    CHECK(bin_members(0, CodebookParams::make(2, 1)) == std::vector<std::uint64_t>{0});
    CHECK(bin_members(1, CodebookParams::make(2, 4)) ==
          std::vector<std::uint64_t>{4, 5, 6, 7});
}

TEST_CASE("bins partition the message set") {
    const CodebookParams cb = CodebookParams::make(4, 6);
    std::set<std::uint64_t> seen;
    for (std::uint64_t m1 = 0; m1 < cb.M_R; ++m1) {
        for (std::uint64_t m : bin_members(m1, cb)) {
            CHECK(seen.insert(m).second);
            CHECK(split(m, cb).m1 == m1);
        }
    }
    CHECK(seen.size() == cb.M_S);
    CHECK(*seen.rbegin() == cb.M_S - 1);
}

TEST_CASE("out-of-range indices are rejected") {
    const CodebookParams cb = CodebookParams::make(2, 3);
    CHECK_THROWS_AS(split(6, cb), std::out_of_range);
    CHECK_THROWS_AS(join(2, 0, cb), std::out_of_range);
    CHECK_THROWS_AS(join(0, 3, cb), std::out_of_range);
    CHECK_THROWS_AS(bin_members(2, cb), std::out_of_range);
}

TEST_CASE("codebook parameters are validated") {
    CHECK_THROWS_AS(CodebookParams::make(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(CodebookParams::make(3, 0), std::invalid_argument);
    CHECK_THROWS_AS(CodebookParams::make(std::uint64_t(1) << 40, std::uint64_t(1) << 40),
                    std::invalid_argument);

    CodebookParams broken = CodebookParams::make(2, 3);
    broken.M_S = 7;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}
