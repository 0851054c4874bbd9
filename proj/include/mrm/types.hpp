#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mrm {

// Dense integer identities; names live in side tables on the owning model.
using StateId = int;
using ActionId = int;
using NodeId = int;
using SymbolId = int;
using Reward = double;

// Rewards are table-driven exact decimals; compared with this tolerance.
inline constexpr double kRewardTolerance = 1e-9;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Sparse transition row: (target, probability), targets sorted ascending.
using SparseRow = std::vector<std::pair<StateId, double>>;

// A word over the observation alphabet (no null entries).
using Word = std::vector<SymbolId>;
using ObservationTrace = Word;
using RewardTrace = std::vector<Reward>;

/// Either a symbol of Z or the null placeholder for intermediate states.
struct Observation {
    SymbolId symbol = -1;

    static Observation null() { return Observation{-1}; }
    static Observation of(SymbolId z) { return Observation{z}; }
    bool is_null() const { return symbol < 0; }

    bool operator==(const Observation&) const = default;
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};

struct AlphabetMismatch : Error {
    using Error::Error;
};

/// The cached answer for a word conflicts with a new answer; the teacher
/// is not a function, which is fatal for L*.
struct TeacherContradiction : Error {
    using Error::Error;
};

struct NotACounterexample : Error {
    using Error::Error;
};

struct NotStronglyConnected : Error {
    using Error::Error;
};

/// The requested observation word cannot be realized in the MDP at all.
struct UnrealizableQuery : Error {
    using Error::Error;
};

struct BudgetExhausted : Error {
    long steps;
    explicit BudgetExhausted(long n)
        : Error("step budget exhausted after " + std::to_string(n) + " steps"), steps(n) {}
};

inline bool rewards_equal(Reward a, Reward b) {
    return std::abs(a - b) <= kRewardTolerance;
}

}  // namespace mrm
