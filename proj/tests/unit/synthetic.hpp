#pragma once

#include <string>
#include <vector>

#include "callsum/evalstats.hpp"

namespace testsupport {

struct StudyData {
    std::vector<callsum::LikertResponse> likert;
    std::vector<callsum::PreferenceResponse> prefs;
    std::vector<callsum::ParticipantRecord> participants;
};

// `n` participants rating 40 methods in one experiment; the participants
// listed in `failing` answered `failing_score` QC questions correctly.
inline StudyData make_study(int n, const std::vector<int>& failing, int failing_score = 2)
{
    StudyData d;
    for (int p = 0; p < n; ++p) {
        const std::string pid = "p" + std::to_string(p);
        const bool fails = std::find(failing.begin(), failing.end(), p) != failing.end();
        d.participants.push_back({pid, fails ? failing_score : callsum::kQcQuestions});
        for (int m = 0; m < 40; ++m) {
            const std::string mid = "m" + std::to_string(m);
            d.likert.push_back({pid, "exp1", mid, "X", 1 + (p + m) % 4});
            d.likert.push_back({pid, "exp1", mid, "Y", 1 + (p * m) % 4});
            d.prefs.push_back({pid, "exp1", mid, (p + m) % 3 ? "X" : "Y", (p + m) % 3 ? "Y" : "X"});
        }
    }
    return d;
}

// One experiment: `left_wins` preferences for `left`, the rest for `right`,
// with constant Likert ratings per source.
inline void add_experiment(StudyData& d, const std::string& exp, const std::string& left, const std::string& right,
                           int left_wins, int total = 400, int left_rating = 3, int right_rating = 2)
{
    for (int i = 0; i < total; ++i) {
        const std::string pid = exp + "-p" + std::to_string(i % 10);
        const std::string mid = "m" + std::to_string(i / 10);
        d.likert.push_back({pid, exp, mid, left, left_rating});
        d.likert.push_back({pid, exp, mid, right, right_rating});
        const bool l = i < left_wins;
        d.prefs.push_back({pid, exp, mid, l ? left : right, l ? right : left});
    }
}

}  // namespace testsupport
