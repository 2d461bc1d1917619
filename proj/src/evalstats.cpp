#include "callsum/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "callsum/error.hpp"

namespace callsum {

QcResult qc_filter(const std::vector<LikertResponse>& likert, const std::vector<PreferenceResponse>& prefs,
                   const std::vector<ParticipantRecord>& participants)
{
    std::map<std::string, int> qc;
    for (const auto& p : participants) {
        if (p.qc_correct < 0 || p.qc_correct > kQcQuestions) {
            throw ConfigError("participant " + p.participant_id + " has qc_correct out of range");
        }
        qc[p.participant_id] = p.qc_correct;
    }
    auto passes = [&](const std::string& id) {
        auto it = qc.find(id);
        if (it == qc.end()) throw ConfigError("response from unknown participant " + id);
        return it->second == kQcQuestions;
    };

    QcResult out;
    std::set<std::string> removed;
    std::set<std::string> retained;
    for (const auto& r : likert) {
        if (passes(r.participant_id)) {
            out.likert.push_back(r);
            retained.insert(r.participant_id);
        } else {
            ++out.likert_removed;
            removed.insert(r.participant_id);
        }
    }
    for (const auto& r : prefs) {
        if (passes(r.participant_id)) {
            out.prefs.push_back(r);
            retained.insert(r.participant_id);
        } else {
            ++out.prefs_removed;
            removed.insert(r.participant_id);
        }
    }
    out.removed_participants.assign(removed.begin(), removed.end());
    out.retained_participants = retained.size();
    return out;
}

namespace {

// Twice the midrank of every pooled observation, so ties stay integral.
std::vector<std::int64_t> doubled_midranks(const std::vector<double>& pooled)
{
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
    std::vector<std::int64_t> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        // positions i..j (0-based) share rank ((i+1)+(j+1))/2
        const auto twice = static_cast<std::int64_t>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = twice;
        i = j + 1;
    }
    return ranks;
}

double tie_term(const std::vector<double>& pooled)
{
    std::map<double, std::size_t> counts;
    for (double v : pooled) ++counts[v];
    double sum = 0;
    for (const auto& [v, t] : counts) {
        const double td = static_cast<double>(t);
        sum += td * td * td - td;
    }
    return sum;
}

// Walks all size-k subsets of `ranks` and counts those whose doubled rank sum
// is at least as far from the null mean as `observed`.
void enumerate(const std::vector<std::int64_t>& ranks, std::size_t start, std::size_t k, std::int64_t partial,
               std::int64_t center, std::int64_t observed_dev, std::uint64_t& extreme, std::uint64_t& total)
{
    if (k == 0) {
        ++total;
        if (std::llabs(partial - center) >= observed_dev) ++extreme;
        return;
    }
    for (std::size_t i = start; i + k <= ranks.size(); ++i) {
        enumerate(ranks, i + 1, k - 1, partial + ranks[i], center, observed_dev, extreme, total);
    }
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) throw ConfigError("Mann-Whitney U needs two non-empty samples");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t n = n1 + n2;

    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = doubled_midranks(pooled);

    std::int64_t rank_sum_a = 0;
    for (std::size_t i = 0; i < n1; ++i) rank_sum_a += ranks[i];
    // 2U = 2R - n1(n1+1); the null mean of 2R is n1(n+1).
    const auto n1i = static_cast<std::int64_t>(n1);
    const std::int64_t twice_u = rank_sum_a - n1i * (n1i + 1);

    MannWhitneyResult r;
    r.u = static_cast<double>(twice_u) / 2.0;

    if (n <= kExactLimit) {
        const std::int64_t center = n1i * static_cast<std::int64_t>(n + 1);
        const std::int64_t observed_dev = std::llabs(rank_sum_a - center);
        std::uint64_t extreme = 0;
        std::uint64_t total = 0;
        enumerate(ranks, 0, n1, 0, center, observed_dev, extreme, total);
        r.method = MwMethod::exact;
        r.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
        return r;
    }

    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    const double mean = dn1 * dn2 / 2.0;
    const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term(pooled) / (dn * (dn - 1.0)));
    r.method = MwMethod::normal_approx;
    if (var <= 0) {
        r.p_two_sided = 1.0;
        return r;
    }
    const double z = std::max(0.0, std::fabs(r.u - mean) - 0.5) / std::sqrt(var);
    r.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

ExperimentReport analyze_experiment(const std::vector<LikertResponse>& likert,
                                    const std::vector<PreferenceResponse>& prefs, double alpha)
{
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
    ExperimentReport rep;
    rep.alpha = alpha;
    std::set<std::string> experiments;
    std::set<std::string> labels;
    for (const auto& r : likert) {
        if (r.rating < 1 || r.rating > 4) {
            throw ConfigError("rating out of range 1..4 for participant " + r.participant_id);
        }
        experiments.insert(r.experiment_id);
        labels.insert(r.source_label);
    }
    for (const auto& p : prefs) {
        if (p.chosen_source == p.alternative_source) {
            throw ConfigError("preference with identical chosen and alternative source " + p.chosen_source);
        }
        experiments.insert(p.experiment_id);
        labels.insert(p.chosen_source);
        labels.insert(p.alternative_source);
    }
    if (experiments.size() > 1) throw ConfigError("responses span more than one experiment");
    if (labels.size() != 2) {
        throw ConfigError("an experiment compares exactly two sources; found " + std::to_string(labels.size()));
    }
    rep.experiment_id = experiments.empty() ? std::string{} : *experiments.begin();

    std::vector<double> samples[2];
    for (const auto& label : labels) rep.sources.push_back(SourceSummary{label, 0, 0, 0});
    auto slot = [&](const std::string& label) { return label == rep.sources[0].label ? 0 : 1; };
    for (const auto& r : likert) samples[slot(r.source_label)].push_back(r.rating);
    for (int s = 0; s < 2; ++s) {
        auto& src = rep.sources[static_cast<std::size_t>(s)];
        src.likert_n = samples[s].size();
        if (src.likert_n > 0) {
            src.likert_mean = std::accumulate(samples[s].begin(), samples[s].end(), 0.0) / static_cast<double>(src.likert_n);
        }
    }
    if (!samples[0].empty() && !samples[1].empty()) {
        rep.test = mann_whitney_u(samples[0], samples[1]);
        rep.significant = rep.test->p_two_sided < alpha;
    }

    for (const auto& p : prefs) ++rep.sources[static_cast<std::size_t>(slot(p.chosen_source))].preference_count;
    rep.total_preferences = prefs.size();
    const auto c0 = rep.sources[0].preference_count;
    const auto c1 = rep.sources[1].preference_count;
    rep.winner = c0 > c1 ? rep.sources[0].label : c1 > c0 ? rep.sources[1].label : kTie;
    return rep;
}

std::vector<ExperimentReport> analyze_all(const std::vector<LikertResponse>& likert,
                                          const std::vector<PreferenceResponse>& prefs, double alpha)
{
    std::map<std::string, std::pair<std::vector<LikertResponse>, std::vector<PreferenceResponse>>> groups;
    for (const auto& r : likert) groups[r.experiment_id].first.push_back(r);
    for (const auto& p : prefs) groups[p.experiment_id].second.push_back(p);
    std::vector<ExperimentReport> out;
    for (const auto& [id, g] : groups) out.push_back(analyze_experiment(g.first, g.second, alpha));
    return out;
}

std::string tournament_report(const std::vector<ExperimentReport>& reports, const std::vector<Pairing>& pairings)
{
    std::map<std::string, const ExperimentReport*> by_id;
    for (const auto& r : reports) by_id[r.experiment_id] = &r;
    std::map<std::string, std::string> winners;

    constexpr std::string_view kBestOf = "best-of-";
    auto resolve = [&](const std::string& entrant) {
        if (!entrant.starts_with(kBestOf)) return entrant;
        const std::string ref = entrant.substr(kBestOf.size());
        auto it = winners.find(ref);
        if (it == winners.end()) throw ConfigError("pairing refers to an unplayed experiment: " + entrant);
        if (it->second == kTie) throw ConfigError("pairing refers to a tied experiment: " + entrant);
        return it->second;
    };
    auto show = [](const std::string& entrant, const std::string& resolved) {
        return entrant == resolved ? entrant : entrant + " (" + resolved + ")";
    };

    std::string out;
    for (const auto& p : pairings) {
        auto it = by_id.find(p.experiment_id);
        if (it == by_id.end()) throw ConfigError("no report for experiment " + p.experiment_id);
        const ExperimentReport& rep = *it->second;
        const std::string left = resolve(p.left);
        const std::string right = resolve(p.right);
        const std::set<std::string> expected{left, right};
        std::set<std::string> actual;
        for (const auto& s : rep.sources) actual.insert(s.label);
        if (expected != actual) {
            throw ConfigError("experiment " + p.experiment_id + " compared sources that do not match the bracket (" +
                              left + " vs. " + right + ")");
        }
        winners[p.experiment_id] = rep.winner;
        out += p.experiment_id + ": " + show(p.left, left) + " vs. " + show(p.right, right) + " -> " + rep.winner + "\n";
    }
    return out;
}

nlohmann::ordered_json to_json(const ExperimentReport& r)
{
    nlohmann::ordered_json j;
    j["experiment_id"] = r.experiment_id;
    auto sources = nlohmann::ordered_json::array();
    for (const auto& s : r.sources) {
        sources.push_back({{"label", s.label},
                           {"likert_mean", s.likert_mean},
                           {"likert_n", s.likert_n},
                           {"preference_count", s.preference_count}});
    }
    j["sources"] = std::move(sources);
    if (r.test) {
        j["U"] = r.test->u;
        j["p_two_sided"] = r.test->p_two_sided;
        j["method"] = r.test->method == MwMethod::exact ? "exact" : "normal_approx";
    } else {
        j["U"] = nullptr;
        j["p_two_sided"] = nullptr;
        j["method"] = nullptr;
    }
    j["alpha"] = r.alpha;
    j["significant"] = r.significant;
    j["total_preferences"] = r.total_preferences;
    j["winner"] = r.winner;
    return j;
}

nlohmann::ordered_json to_json(const QcResult& r)
{
    nlohmann::ordered_json j;
    j["removed_participants"] = r.removed_participants;
    j["retained_participants"] = r.retained_participants;
    j["likert_retained"] = r.likert.size();
    j["likert_removed"] = r.likert_removed;
    j["prefs_retained"] = r.prefs.size();
    j["prefs_removed"] = r.prefs_removed;
    return j;
}

namespace {

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn fn)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            fn(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::string id_text(const nlohmann::json& v)
{
    return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::vector<LikertResponse> load_likert(const std::filesystem::path& path)
{
    std::vector<LikertResponse> out;
    for_each_jsonl(path, [&](const nlohmann::json& j) {
        out.push_back(LikertResponse{id_text(j.at("participant_id")), id_text(j.at("experiment_id")),
                                     id_text(j.at("method_id")), j.at("source_label").get<std::string>(),
                                     j.at("rating").get<int>()});
    });
    return out;
}

std::vector<PreferenceResponse> load_preferences(const std::filesystem::path& path)
{
    std::vector<PreferenceResponse> out;
    for_each_jsonl(path, [&](const nlohmann::json& j) {
        out.push_back(PreferenceResponse{id_text(j.at("participant_id")), id_text(j.at("experiment_id")),
                                         id_text(j.at("method_id")), j.at("chosen_source").get<std::string>(),
                                         j.at("alternative_source").get<std::string>()});
    });
    return out;
}

std::vector<ParticipantRecord> load_participants(const std::filesystem::path& path)
{
    std::vector<ParticipantRecord> out;
    for_each_jsonl(path, [&](const nlohmann::json& j) {
        out.push_back(ParticipantRecord{id_text(j.at("participant_id")), j.at("qc_correct").get<int>()});
    });
    return out;
}

std::vector<Pairing> load_pairings(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        std::vector<Pairing> out;
        for (const auto& p : j) {
            const auto& s = p.at("sources");
            out.push_back(Pairing{id_text(p.at("experiment_id")), s.at(0).get<std::string>(), s.at(1).get<std::string>()});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace callsum
