#include "bbauth/softdtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bbauth/error.hpp"
#include "bbauth/simd.hpp"
#include "bbauth/touch.hpp"

namespace bbauth::softdtw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const Sequence& x, const Sequence& y) {
    if (x.empty() || y.empty()) throw Error(ErrorCode::EmptySequence, "alignment needs non-empty sequences");
    const std::size_t dim = x.front().size();
    for (const auto& v : x) {
        if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged sequence");
    }
    for (const auto& v : y) {
        if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "vector dimensions differ");
    }
}

/// Row-by-row DP over a (m+1) x (n+1) table holding two rows at a time.
template <typename Combine>
double accumulate(const Sequence& x, const Sequence& y, Combine combine) {
    const std::size_t n = y.size();
    const auto& kern = simd::active();
    std::vector<double> prev(n + 1, kInf);
    std::vector<double> cur(n + 1, kInf);
    prev[0] = 0.0;
    for (const auto& xi : x) {
        cur[0] = kInf;
        for (std::size_t j = 1; j <= n; ++j) {
            const double cost = kern.squared_distance(xi.data(), y[j - 1].data(), xi.size());
            cur[j] = cost + combine(prev[j], cur[j - 1], prev[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

}  // namespace

double softmin(double a, double b, double c, double gamma) {
    const double m = std::min({a, b, c});
    if (m == kInf) return kInf;
    const double s = std::exp(-(a - m) / gamma) + std::exp(-(b - m) / gamma) + std::exp(-(c - m) / gamma);
    return m - gamma * std::log(s);
}

double soft_dtw(const Sequence& x, const Sequence& y, double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
    check_inputs(x, y);
    return accumulate(x, y, [gamma](double up, double left, double diag) { return softmin(up, left, diag, gamma); });
}

double dtw(const Sequence& x, const Sequence& y) {
    check_inputs(x, y);
    return accumulate(x, y, [](double up, double left, double diag) { return std::min({up, left, diag}); });
}

FeatureScaler FeatureScaler::fit(std::span<const Sequence> sequences) {
    FeatureScaler s;
    for (const auto& seq : sequences) {
        for (const auto& v : seq) {
            if (s.lo.empty()) {
                s.lo = v;
                s.hi = v;
                continue;
            }
            for (std::size_t k = 0; k < v.size() && k < s.lo.size(); ++k) {
                s.lo[k] = std::min(s.lo[k], v[k]);
                s.hi[k] = std::max(s.hi[k], v[k]);
            }
        }
    }
    return s;
}

Sequence FeatureScaler::apply(const Sequence& seq) const {
    Sequence out = seq;
    for (auto& v : out) {
        for (std::size_t k = 0; k < v.size() && k < lo.size(); ++k) {
            const double range = hi[k] - lo[k];
            v[k] = range > 0.0 ? (v[k] - lo[k]) / range : 0.0;
        }
    }
    return out;
}

double min_distance(std::span<const Sequence> enroll, const Sequence& verify, double gamma) {
    if (enroll.empty()) throw Error(ErrorCode::EmptySequence, "no enrollment sequences");
    double best = kInf;
    for (const auto& e : enroll) best = std::min(best, soft_dtw(e, verify, gamma));
    return std::max(0.0, best);
}

double score_from_distance(double d, double tau) {
    return std::exp(-std::max(0.0, d) / tau);
}

SoftDtwModel calibrate(const DatasetSplit& train, TaskKind task, double gamma) {
    SoftDtwModel model;
    model.task = task;
    model.gamma = gamma;

    std::map<std::string, std::vector<Sequence>> by_subject;
    std::vector<Sequence> all;
    for (const auto& s : train.sessions) {
        if (s.task != task) continue;
        Sequence seq;
        try {
            seq = touch::build_dtw_sequence(s, task);
        } catch (const Error&) {
            continue;
        }
        if (seq.empty()) continue;
        all.push_back(seq);
        by_subject[s.subject_id.value_or(s.device_id)].push_back(std::move(seq));
    }
    model.scaler = FeatureScaler::fit(all);

    std::vector<double> genuine;
    for (auto& [subject, seqs] : by_subject) {
        if (seqs.size() < 3) continue;
        std::vector<Sequence> enroll = {model.scaler.apply(seqs[0]), model.scaler.apply(seqs[1])};
        for (std::size_t i = 2; i < seqs.size(); ++i) {
            genuine.push_back(min_distance(enroll, model.scaler.apply(seqs[i]), gamma));
        }
    }
    if (!genuine.empty()) {
        std::sort(genuine.begin(), genuine.end());
        const std::size_t n = genuine.size();
        const double median = n % 2 == 1 ? genuine[n / 2] : 0.5 * (genuine[n / 2 - 1] + genuine[n / 2]);
        model.tau = std::max(median, 1e-9);
    }
    return model;
}

double softdtw_score(std::span<const Session* const> enroll, const Session& verify, const SoftDtwModel& model) {
    std::vector<Sequence> e;
    for (const Session* s : enroll) e.push_back(model.scaler.apply(touch::build_dtw_sequence(*s, model.task)));
    const Sequence v = model.scaler.apply(touch::build_dtw_sequence(verify, model.task));
    if (v.empty()) throw Error(ErrorCode::EmptySequence, "session " + verify.session_id + " has no gestures");
    std::erase_if(e, [](const Sequence& s) { return s.empty(); });
    return score_from_distance(min_distance(e, v, model.gamma), model.tau);
}

}  // namespace bbauth::softdtw
