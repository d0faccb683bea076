#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "threshcal/core.hpp"
#include "threshcal/report.hpp"

namespace threshcal {

struct ScoredTriple {
    std::string head;
    RelationId relation;
    std::string tail;
    double score = 0.0;
    std::optional<bool> oracle_label;

    friend bool operator==(const ScoredTriple&, const ScoredTriple&) = default;
};

/// Triples in file order plus the set of relations they mention.
class Dataset {
public:
    Dataset() = default;

    /// Throws InputError on a non-finite score, an empty relation or a
    /// duplicate (head, relation, tail).
    explicit Dataset(std::vector<ScoredTriple> triples);

    const std::vector<ScoredTriple>& triples() const noexcept { return triples_; }
    const std::set<RelationId>& relations() const noexcept { return relations_; }
    std::size_t size() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }
    const ScoredTriple& operator[](std::size_t i) const { return triples_[i]; }

    std::vector<double> scores() const;

    /// True when every triple carries an oracle label.
    bool fully_labeled() const noexcept;

    friend bool operator==(const Dataset& a, const Dataset& b) { return a.triples_ == b.triples_; }

private:
    std::vector<ScoredTriple> triples_;
    std::set<RelationId> relations_;
};

/// Parses `head\trelation\ttail\tscore\tlabel` lines, label in {0,1,?}.
/// Lines starting with '#' and blank lines are skipped. `source` names the
/// input in error messages.
Dataset parse_scored_triples(std::istream& in, const std::string& source = "<stream>");
Dataset load_scored_triples(const std::filesystem::path& path);

/// Writes the same TSV format. Scores use the shortest round-trip decimal form.
void write_scored_triples(std::ostream& out, const Dataset& dataset);
void save_scored_triples(const std::filesystem::path& path, const Dataset& dataset);

/// Logistic sigmoid, numerically stable for large |x|.
double sigmoid(double x) noexcept;
double logit(double p) noexcept;

/// Elementwise sigmoid of the raw scores, in dataset order.
std::vector<double> sigmoid_view(const Dataset& dataset);

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

struct RelationSpec {
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    double mu_pos = 1.0;
    double mu_neg = -1.0;
    double sigma = 1.0;
};

struct SyntheticSpec {
    std::vector<RelationSpec> per_relation;  // one entry per relation
    std::uint64_t seed = 0;
};

struct BayesInfo {
    std::vector<RelationId> relations;
    std::vector<double> thresholds;  // (mu_pos + mu_neg) / 2
    std::vector<double> accuracies;  // Phi(|mu_pos - mu_neg| / (2 sigma))
};

struct SyntheticData {
    Dataset dataset;
    BayesInfo bayes;
};

/// Name of the i-th synthetic relation ("rel_000", "rel_001", ...).
std::string synthetic_relation_name(std::size_t index);

/// Draws, per relation, n_pos positives from N(mu_pos, sigma) followed by n_neg
/// negatives from N(mu_neg, sigma), from one Rng(seed) stream.
/// Throws InputError on an invalid spec.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// CSV with header strategy,budget,repeats,acc_mean,acc_sem,f1_mean,f1_sem
/// followed by the diagnostic columns n,degraded,fallbacks. Rows are sorted
/// by (strategy, budget, n); reals have six decimals; absent sems are empty.
void write_report_csv(std::ostream& out, const SweepReport& report);
void write_report_csv(const SweepReport& report, const std::filesystem::path& path);

/// Threshold file: `#default\t<real>` header, then `relation\t<real|inf|-inf>`
/// lines sorted by relation byte order.
void write_threshold_file(std::ostream& out, const ThresholdMap& thresholds);
void save_threshold_file(const std::filesystem::path& path, const ThresholdMap& thresholds);

/// Accepts the format above; the `#default` line is optional (default 0) and
/// relations may come in any order. Throws ParseError on malformed lines or
/// duplicate relations.
ThresholdMap parse_threshold_file(std::istream& in, const std::string& source = "<stream>");
ThresholdMap load_threshold_file(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double; "inf"/"-inf"
/// for infinities.
std::string format_real(double value);

/// Parses a finite real or "inf"/"-inf". Returns nullopt on anything else,
/// including trailing garbage.
std::optional<double> parse_real(std::string_view text, bool allow_infinite);

}  // namespace threshcal
