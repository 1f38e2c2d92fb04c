#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdetest/errors.hpp"

namespace sdetest {

enum class TestId {
    Noncentered1D,
    CenteredKnown1D,
    CenteredEstimated1D,
    StateDependent1D,
    Known2D,
    Estimated2D,
    MultipleKnown,
    MultipleEstimated,
};

inline constexpr TestId kAllTests[] = {
    TestId::Noncentered1D, TestId::CenteredKnown1D, TestId::CenteredEstimated1D, TestId::StateDependent1D,
    TestId::Known2D,       TestId::Estimated2D,     TestId::MultipleKnown,       TestId::MultipleEstimated,
};

inline std::string_view to_string(TestId id) {
    switch (id) {
        case TestId::Noncentered1D: return "1d-noncentered";
        case TestId::CenteredKnown1D: return "1d-centered-known";
        case TestId::CenteredEstimated1D: return "1d-centered-estimated";
        case TestId::StateDependent1D: return "1d-state-dependent";
        case TestId::Known2D: return "2d-known";
        case TestId::Estimated2D: return "2d-estimated";
        case TestId::MultipleKnown: return "multi-known";
        case TestId::MultipleEstimated: return "multi-estimated";
    }
    return "?";
}

inline TestId parse_test_id(std::string_view text) {
    for (TestId id : kAllTests)
        if (to_string(id) == text) return id;
    throw ConfigError("unknown test identifier '" + std::string(text) + "'");
}

/// Path dimension a test operates on (multiple tests accept any d >= 2).
inline std::size_t test_dimension(TestId id) {
    switch (id) {
        case TestId::Noncentered1D:
        case TestId::CenteredKnown1D:
        case TestId::CenteredEstimated1D:
        case TestId::StateDependent1D: return 1;
        default: return 2;
    }
}

enum class PValueKind { None, Exact, UpperBound };

struct TestOutcome {
    TestId test_id = TestId::CenteredKnown1D;
    double statistic = 0.0;
    double critical_value = 0.0;
    bool reject = false;
    std::optional<double> p_value;
    PValueKind p_value_kind = PValueKind::None;
    std::size_t n_used = 0;
    std::optional<double> min_detectable;
    std::vector<std::string> warnings;
};

/// Reject on statistic >= critical.
inline TestOutcome make_outcome(TestId id, double statistic, double critical, std::size_t n_used) {
    TestOutcome out;
    out.test_id = id;
    out.statistic = statistic;
    out.critical_value = critical;
    out.reject = statistic >= critical;
    out.n_used = n_used;
    return out;
}

}  // namespace sdetest
