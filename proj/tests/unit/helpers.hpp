#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogdep/ingest.hpp"

namespace cogdep::fixture {

struct Step {
    std::string question;
    Track track = Track::math;
    std::int64_t duration = 10;
    Outcome outcome = Outcome::correct;
    std::int64_t gap = 5;  // ignored for the last step
};

inline Timeline make_timeline(const std::string& user, const std::vector<Step>& steps,
                              std::int64_t break_seconds = kDefaultBreakSeconds, std::int64_t start = 1000) {
    Timeline t;
    t.user_id = user;
    std::int64_t clock = start;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        Attempt a;
        a.user_id = user;
        a.question_id = steps[i].question;
        a.track = steps[i].track;
        a.start = clock;
        a.duration = steps[i].duration;
        a.end = clock + a.duration;
        a.outcome = steps[i].outcome;
        if (i + 1 < steps.size()) a.gap_after = steps[i].gap;
        clock = a.end + steps[i].gap;
        t.attempts.push_back(a);
    }
    return segment_sessions(std::move(t), break_seconds);
}

}  // namespace cogdep::fixture
