#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "mrm/reward_machine.hpp"
#include "mrm/types.hpp"

namespace mrm {

/// L* observation table for Mealy machines. Rows are prefixes (S and its
/// one-symbol boundary), columns are nonempty suffixes, and cells hold the
/// reward word produced for the suffix after running the prefix. Queries
/// are answered externally through resolve_query.
class ObservationTable {
public:
    struct Certificate {
        enum class Kind { Complete, Unclosed, Inconsistent };
        Kind kind = Kind::Complete;
        Word unclosed_row;   // boundary word to promote into S
        Word p1, p2;         // witnesses of an inconsistency
        Word new_suffix;     // z . e column that separates them
        bool complete() const { return kind == Kind::Complete; }
    };

    ObservationTable(std::vector<std::string> alphabet, double default_reward)
        : alphabet_(std::move(alphabet)), default_reward_(default_reward) {
        prefixes_.push_back({});  // epsilon
        for (SymbolId z = 0; z < alphabet_size(); ++z) suffixes_.push_back({z});
        cache_[{}] = {};
    }

    int alphabet_size() const { return static_cast<int>(alphabet_.size()); }
    const std::vector<Word>& prefixes() const { return prefixes_; }
    const std::vector<Word>& suffixes() const { return suffixes_; }
    int hypothesis_count() const { return hypothesis_count_; }
    const std::optional<MealyRewardMachine>& last_hypothesis() const { return last_hypothesis_; }

    /// Unanswered words needed to fill all cells, shortest first.
    std::vector<Word> pending_queries() const {
        std::set<Word> needed;
        for_each_row_word([&](const Word& p) {
            for (const Word& e : suffixes_) {
                Word w = concat(p, e);
                if (!cache_.contains(w)) needed.insert(w);
            }
        });
        std::vector<Word> out(needed.begin(), needed.end());
        std::stable_sort(out.begin(), out.end(), [](const Word& a, const Word& b) {
            if (a.size() != b.size()) return a.size() < b.size();
            return a < b;
        });
        return out;
    }

    /// Records a membership-query answer. All prefixes of the word become
    /// answered as well. A contradiction with the cache is fatal: the
    /// teacher is expected to be a function.
    void resolve_query(const Word& word, const RewardTrace& rewards) {
        if (word.size() != rewards.size())
            throw Error("resolve_query: word and reward trace differ in length");
        for (size_t len = 1; len <= word.size(); ++len) {
            Word prefix(word.begin(), word.begin() + len);
            RewardTrace answer(rewards.begin(), rewards.begin() + len);
            auto it = cache_.find(prefix);
            if (it == cache_.end()) {
                cache_.emplace(std::move(prefix), std::move(answer));
            } else {
                for (size_t i = 0; i < len; ++i)
                    if (!rewards_equal(it->second[i], answer[i]))
                        throw TeacherContradiction(
                            "resolve_query: conflicting answers for the same word");
            }
        }
    }

    /// Closedness and consistency check; requires all cells filled. The
    /// returned certificate is applied with fix().
    Certificate completeness() const {
        require_filled();
        // closedness: every boundary row must equal some S row
        std::vector<std::vector<Reward>> s_rows;
        s_rows.reserve(prefixes_.size());
        for (const Word& p : prefixes_) s_rows.push_back(row(p));
        for (const Word& p : prefixes_) {
            for (SymbolId z = 0; z < alphabet_size(); ++z) {
                Word b = concat(p, {z});
                if (contains_word(prefixes_, b)) continue;
                std::vector<Reward> br = row(b);
                bool matched = false;
                for (const auto& sr : s_rows)
                    if (rows_equal(br, sr)) matched = true;
                if (!matched) {
                    Certificate c;
                    c.kind = Certificate::Kind::Unclosed;
                    c.unclosed_row = b;
                    return c;
                }
            }
        }
        // consistency: equal S rows must stay equal after any one-symbol extension
        for (size_t i = 0; i < prefixes_.size(); ++i) {
            for (size_t j = i + 1; j < prefixes_.size(); ++j) {
                if (!rows_equal(s_rows[i], s_rows[j])) continue;
                for (SymbolId z = 0; z < alphabet_size(); ++z) {
                    Word wi = concat(prefixes_[i], {z});
                    Word wj = concat(prefixes_[j], {z});
                    for (size_t e = 0; e < suffixes_.size(); ++e) {
                        RewardTrace ci = cell(wi, suffixes_[e]);
                        RewardTrace cj = cell(wj, suffixes_[e]);
                        for (size_t t = 0; t < ci.size(); ++t) {
                            if (rewards_equal(ci[t], cj[t])) continue;
                            Certificate c;
                            c.kind = Certificate::Kind::Inconsistent;
                            c.p1 = prefixes_[i];
                            c.p2 = prefixes_[j];
                            c.new_suffix = concat({z}, suffixes_[e]);
                            return c;
                        }
                    }
                }
            }
        }
        return {};
    }

    void fix(const Certificate& c) {
        switch (c.kind) {
            case Certificate::Kind::Complete:
                break;
            case Certificate::Kind::Unclosed:
                if (!contains_word(prefixes_, c.unclosed_row))
                    prefixes_.push_back(c.unclosed_row);
                break;
            case Certificate::Kind::Inconsistent:
                if (!contains_word(suffixes_, c.new_suffix))
                    suffixes_.push_back(c.new_suffix);
                break;
        }
    }

    /// Builds the machine whose nodes are the distinct S-row classes.
    MealyRewardMachine build_hypothesis() {
        Certificate c = completeness();
        if (!c.complete()) throw Error("build_hypothesis: table is not complete");

        std::vector<std::vector<Reward>> reps;  // one row per class
        std::vector<int> class_of(prefixes_.size(), -1);
        std::vector<size_t> rep_prefix;  // index into prefixes_ per class
        for (size_t i = 0; i < prefixes_.size(); ++i) {
            std::vector<Reward> r = row(prefixes_[i]);
            for (size_t cl = 0; cl < reps.size(); ++cl)
                if (rows_equal(r, reps[cl])) class_of[i] = static_cast<int>(cl);
            if (class_of[i] < 0) {
                class_of[i] = static_cast<int>(reps.size());
                reps.push_back(std::move(r));
                rep_prefix.push_back(i);
            }
        }

        auto class_of_row = [&](const std::vector<Reward>& r) {
            for (size_t cl = 0; cl < reps.size(); ++cl)
                if (rows_equal(r, reps[cl])) return static_cast<int>(cl);
            throw Error("build_hypothesis: boundary row matches no class (table unclosed?)");
        };

        auto h = MealyRewardMachine::self_loops(static_cast<int>(reps.size()), alphabet_,
                                                default_reward_);
        h.start = class_of[0];  // class of epsilon
        for (size_t cl = 0; cl < reps.size(); ++cl) {
            const Word& p = prefixes_[rep_prefix[cl]];
            for (SymbolId z = 0; z < alphabet_size(); ++z) {
                Word pz = concat(p, {z});
                NodeId target = class_of_row(row(pz));
                Reward r = cell(p, {z}).at(0);
                h.set_edge(static_cast<NodeId>(cl), z, target, r);
            }
        }
        ++hypothesis_count_;
        last_hypothesis_ = h;
        return h;
    }

    /// Feeds a counterexample: all its prefixes join S and the observed
    /// answer enters the cache.
    void add_counterexample(const Word& word, const RewardTrace& rewards) {
        if (!last_hypothesis_)
            throw Error("add_counterexample: no hypothesis has been built yet");
        RewardTrace predicted = run_observations(*last_hypothesis_, word);
        bool differs = predicted.size() != rewards.size();
        for (size_t i = 0; !differs && i < predicted.size(); ++i)
            if (!rewards_equal(predicted[i], rewards[i])) differs = true;
        if (!differs)
            throw NotACounterexample("add_counterexample: hypothesis agrees with this trace");

        resolve_query(word, rewards);
        for (size_t len = 1; len <= word.size(); ++len) {
            Word prefix(word.begin(), word.begin() + len);
            if (!contains_word(prefixes_, prefix)) prefixes_.push_back(prefix);
        }
    }

    /// Diagnostic text rendering of the table.
    std::string dump() const {
        std::ostringstream os;
        os << "suffixes:";
        for (const Word& e : suffixes_) os << " " << word_text(e);
        os << "\n";
        for_each_row_word([&](const Word& p) {
            os << (contains_word(prefixes_, p) ? "S " : "  ") << word_text(p) << " |";
            for (const Word& e : suffixes_) {
                Word w = concat(p, e);
                auto it = cache_.find(w);
                if (it == cache_.end()) {
                    os << " ?";
                } else {
                    os << " [";
                    for (size_t i = p.size(); i < w.size(); ++i)
                        os << (i == p.size() ? "" : ",") << it->second[i];
                    os << "]";
                }
            }
            os << "\n";
        });
        return os.str();
    }

    std::string word_text(const Word& w) const {
        if (w.empty()) return "<e>";
        std::string out;
        for (size_t i = 0; i < w.size(); ++i) {
            if (i) out += ".";
            out += alphabet_.at(w[i]);
        }
        return out;
    }

private:
    static Word concat(const Word& a, const Word& b) {
        Word w = a;
        w.insert(w.end(), b.begin(), b.end());
        return w;
    }

    static bool contains_word(const std::vector<Word>& list, const Word& w) {
        return std::find(list.begin(), list.end(), w) != list.end();
    }

    static bool rows_equal(const std::vector<Reward>& a, const std::vector<Reward>& b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (!rewards_equal(a[i], b[i])) return false;
        return true;
    }

    template <typename F>
    void for_each_row_word(F&& f) const {
        for (const Word& p : prefixes_) f(p);
        for (const Word& p : prefixes_) {
            for (SymbolId z = 0; z < alphabet_size(); ++z) {
                Word b = concat(p, {z});
                if (!contains_word(prefixes_, b)) f(b);
            }
        }
    }

    RewardTrace cell(const Word& p, const Word& e) const {
        Word w = concat(p, e);
        auto it = cache_.find(w);
        if (it == cache_.end()) throw Error("observation table cell is unfilled: " + word_text(w));
        return RewardTrace(it->second.begin() + static_cast<long>(p.size()), it->second.end());
    }

    std::vector<Reward> row(const Word& p) const {
        std::vector<Reward> r;
        for (const Word& e : suffixes_) {
            RewardTrace c = cell(p, e);
            r.insert(r.end(), c.begin(), c.end());
        }
        return r;
    }

    void require_filled() const {
        if (!pending_queries().empty())
            throw Error("observation table has unfilled cells");
    }

    std::vector<std::string> alphabet_;
    double default_reward_;
    std::vector<Word> prefixes_;  // S, prefix-closed, epsilon first
    std::vector<Word> suffixes_;  // E, single symbols first
    std::map<Word, RewardTrace> cache_;
    int hypothesis_count_ = 0;
    std::optional<MealyRewardMachine> last_hypothesis_;
};

}  // namespace mrm
