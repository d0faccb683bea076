#include "threshcal/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "threshcal/error.hpp"
#include "threshcal/rng.hpp"

namespace threshcal {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::string triple_key(const ScoredTriple& t) {
    std::string key;
    key.reserve(t.head.size() + t.relation.size() + t.tail.size() + 2);
    key.append(t.head).push_back('\t');
    key.append(t.relation).push_back('\t');
    key.append(t.tail);
    return key;
}

}  // namespace

Dataset::Dataset(std::vector<ScoredTriple> triples) : triples_(std::move(triples)) {
    std::unordered_set<std::string> seen;
    seen.reserve(triples_.size());
    for (const auto& t : triples_) {
        if (t.relation.empty()) {
            throw InputError("dataset: empty relation for triple (" + t.head + ", " + t.tail + ")");
        }
        if (!std::isfinite(t.score)) {
            throw InputError("dataset: non-finite score for " + triple_key(t));
        }
        if (!seen.insert(triple_key(t)).second) {
            throw InputError("dataset: duplicate triple " + triple_key(t));
        }
        relations_.insert(t.relation);
    }
}

std::vector<double> Dataset::scores() const {
    std::vector<double> out;
    out.reserve(triples_.size());
    for (const auto& t : triples_) {
        out.push_back(t.score);
    }
    return out;
}

bool Dataset::fully_labeled() const noexcept {
    return std::all_of(triples_.begin(), triples_.end(),
                       [](const ScoredTriple& t) { return t.oracle_label.has_value(); });
}

std::optional<double> parse_real(std::string_view text, bool allow_infinite) {
    if (text == "inf" || text == "+inf") {
        return allow_infinite ? std::optional<double>(kInf) : std::nullopt;
    }
    if (text == "-inf") {
        return allow_infinite ? std::optional<double>(-kInf) : std::nullopt;
    }
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    if (!std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::string format_real(double value) {
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

Dataset parse_scored_triples(std::istream& in, const std::string& source) {
    std::vector<ScoredTriple> triples;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 5) {
            throw ParseError(source, line_no,
                             "expected 5 tab-separated columns, found " + std::to_string(fields.size()));
        }
        if (fields[1].empty()) {
            throw ParseError(source, line_no, "empty relation");
        }
        const auto score = parse_real(fields[3], false);
        if (!score) {
            throw ParseError(source, line_no, "score '" + std::string(fields[3]) + "' is not a finite real");
        }
        ScoredTriple t{std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), *score,
                       std::nullopt};
        if (fields[4] == "1") {
            t.oracle_label = true;
        } else if (fields[4] == "0") {
            t.oracle_label = false;
        } else if (fields[4] != "?") {
            throw ParseError(source, line_no, "label '" + std::string(fields[4]) + "' is not one of 0, 1, ?");
        }
        if (!seen.insert(triple_key(t)).second) {
            throw ParseError(source, line_no, "duplicate triple (" + t.head + ", " + t.relation + ", " + t.tail + ")");
        }
        triples.push_back(std::move(t));
    }
    return Dataset(std::move(triples));
}

Dataset load_scored_triples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return parse_scored_triples(in, path.string());
}

void write_scored_triples(std::ostream& out, const Dataset& dataset) {
    for (const auto& t : dataset.triples()) {
        out << t.head << '\t' << t.relation << '\t' << t.tail << '\t' << format_real(t.score) << '\t';
        if (t.oracle_label) {
            out << (*t.oracle_label ? '1' : '0');
        } else {
            out << '?';
        }
        out << '\n';
    }
}

void save_scored_triples(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    write_scored_triples(out, dataset);
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void write_threshold_file(std::ostream& out, const ThresholdMap& thresholds) {
    out << "#default\t" << format_real(thresholds.default_threshold) << '\n';
    for (const auto& [rel, thr] : thresholds.per_relation) {
        out << rel << '\t' << format_real(thr) << '\n';
    }
}

void save_threshold_file(const std::filesystem::path& path, const ThresholdMap& thresholds) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    write_threshold_file(out, thresholds);
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

ThresholdMap parse_threshold_file(std::istream& in, const std::string& source) {
    ThresholdMap map;
    std::string line;
    std::size_t line_no = 0;
    bool seen_default = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 2) {
            throw ParseError(source, line_no, "expected 'relation<TAB>threshold'");
        }
        const auto value = parse_real(fields[1], true);
        if (!value) {
            throw ParseError(source, line_no, "threshold '" + std::string(fields[1]) + "' is not a real");
        }
        if (fields[0] == "#default") {
            if (seen_default || !map.per_relation.empty()) {
                throw ParseError(source, line_no, "#default must be the first line and appear once");
            }
            seen_default = true;
            map.default_threshold = *value;
            continue;
        }
        if (fields[0].empty() || fields[0].front() == '#') {
            throw ParseError(source, line_no, "bad relation name '" + std::string(fields[0]) + "'");
        }
        if (!map.per_relation.emplace(std::string(fields[0]), *value).second) {
            throw ParseError(source, line_no, "duplicate relation '" + std::string(fields[0]) + "'");
        }
    }
    return map;
}

ThresholdMap load_threshold_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return parse_threshold_file(in, path.string());
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) noexcept {
    if (p <= 0.0) return -kInf;
    if (p >= 1.0) return kInf;
    return std::log(p / (1.0 - p));
}

std::vector<double> sigmoid_view(const Dataset& dataset) {
    std::vector<double> out;
    out.reserve(dataset.size());
    for (const auto& t : dataset.triples()) {
        out.push_back(sigmoid(t.score));
    }
    return out;
}

double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

std::string synthetic_relation_name(std::size_t index) {
    std::ostringstream os;
    os << "rel_" << std::setw(3) << std::setfill('0') << index;
    return os.str();
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.per_relation.empty()) {
        throw InputError("synthetic spec: at least one relation is required");
    }
    for (const auto& r : spec.per_relation) {
        if (!(r.sigma > 0.0) || !std::isfinite(r.sigma) || !std::isfinite(r.mu_pos) ||
            !std::isfinite(r.mu_neg)) {
            throw InputError("synthetic spec: sigma must be positive and means finite");
        }
    }
    Rng rng(spec.seed);
    std::vector<ScoredTriple> triples;
    BayesInfo bayes;
    for (std::size_t r = 0; r < spec.per_relation.size(); ++r) {
        const auto& rs = spec.per_relation[r];
        const std::string rel = synthetic_relation_name(r);
        for (std::size_t i = 0; i < rs.n_pos; ++i) {
            triples.push_back({"p" + std::to_string(i), rel, "e" + std::to_string(r),
                               rs.mu_pos + rs.sigma * rng.normal(), true});
        }
        for (std::size_t i = 0; i < rs.n_neg; ++i) {
            triples.push_back({"n" + std::to_string(i), rel, "e" + std::to_string(r),
                               rs.mu_neg + rs.sigma * rng.normal(), false});
        }
        bayes.relations.push_back(rel);
        bayes.thresholds.push_back(0.5 * (rs.mu_pos + rs.mu_neg));
        bayes.accuracies.push_back(normal_cdf(std::abs(rs.mu_pos - rs.mu_neg) / (2.0 * rs.sigma)));
    }
    return {Dataset(std::move(triples)), std::move(bayes)};
}

MeanSem mean_and_sem(std::span<const double> values) {
    MeanSem out;
    if (values.empty()) {
        return out;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    const double count = static_cast<double>(values.size());
    out.mean = sum / count;
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sem = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
    }
    return out;
}

void write_report_csv(std::ostream& out, const SweepReport& report) {
    if (report.cells.empty()) {
        throw InputError("write_report_csv: empty report");
    }
    std::vector<const ReportCell*> rows;
    rows.reserve(report.cells.size());
    for (const auto& c : report.cells) rows.push_back(&c);
    std::stable_sort(rows.begin(), rows.end(), [](const ReportCell* a, const ReportCell* b) {
        return std::tie(a->method, a->budget, a->n) < std::tie(b->method, b->budget, b->n);
    });

    const auto fixed6 = [](double v) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(6) << v;
        return os.str();
    };
    const auto opt6 = [&](const std::optional<double>& v) { return v ? fixed6(*v) : std::string(); };

    out << "strategy,budget,repeats,acc_mean,acc_sem,f1_mean,f1_sem,n,degraded,fallbacks\n";
    for (const ReportCell* c : rows) {
        out << c->method << ',' << c->budget << ',' << c->repeats << ',' << fixed6(c->acc_mean) << ','
            << opt6(c->acc_sem) << ',' << fixed6(c->f1_mean) << ',' << opt6(c->f1_sem) << ',' << c->n << ','
            << c->degraded << ',' << c->fallbacks << '\n';
    }
}

void write_report_csv(const SweepReport& report, const std::filesystem::path& path) {
    if (report.cells.empty()) {
        throw InputError("write_report_csv: empty report");
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    write_report_csv(out, report);
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

}  // namespace threshcal
