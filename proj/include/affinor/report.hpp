#pragma once

#include <algorithm>
#include <atomic>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "affinor/expr.hpp"
#include "affinor/linalg.hpp"

namespace affinor {

enum class Status { pass, fail, indeterminate, inapplicable, rank_ambiguous, mismatch };

inline std::string_view status_name(Status s) {
    switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::indeterminate: return "indeterminate";
    case Status::inapplicable: return "inapplicable";
    case Status::rank_ambiguous: return "rank-ambiguous";
    case Status::mismatch: return "MISMATCH";
    }
    return "?";
}

inline std::optional<Status> parse_status(std::string_view s) {
    for (Status st : {Status::pass, Status::fail, Status::indeterminate, Status::inapplicable, Status::rank_ambiguous,
                      Status::mismatch})
        if (status_name(st) == s) return st;
    return std::nullopt;
}

/// Outcome of one named check.
struct CheckReport {
    std::string check_id;
    Status status = Status::pass;
    double max_residual = 0.0;
    double threshold = 0.0;
    std::optional<Vec> witness;
    std::string detail;
};

inline CheckReport inapplicable(std::string id, std::string hypothesis) {
    CheckReport r;
    r.check_id = std::move(id);
    r.status = Status::inapplicable;
    r.detail = std::move(hypothesis) + " failed";
    return r;
}

/// Errors in the structure of an input (degenerate metric, rank deficient
/// embedding, malformed spec values).
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::string format_point(const Vec& x) {
    std::string out = "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) out += ", ";
        out += format_real(x[i]);
    }
    return out + ")";
}

/// Running maximum with the point where it was attained.
struct MaxTracker {
    double value = 0.0;
    std::optional<Vec> where;

    void update(double v, const Vec& at) {
        if (!where || v > value) {
            value = v;
            where = at;
        }
    }
    void merge(const MaxTracker& o) {
        if (o.where) update(o.value, *o.where);
    }
};

/// Multiplier applied to every pass threshold (rank decisions are not
/// affected). Set once before running checks; read by worker threads.
inline std::atomic<double> g_tolerance_scale{1.0};

inline double scaled(double threshold) { return threshold * g_tolerance_scale.load(std::memory_order_relaxed); }

class ScopedToleranceScale {
public:
    explicit ScopedToleranceScale(double s) : previous_(g_tolerance_scale.exchange(s)) {}
    ~ScopedToleranceScale() { g_tolerance_scale.store(previous_); }
    ScopedToleranceScale(const ScopedToleranceScale&) = delete;
    ScopedToleranceScale& operator=(const ScopedToleranceScale&) = delete;

private:
    double previous_;
};

/// Report passing iff the residual is at or below the (scaled) threshold.
inline CheckReport threshold_report(std::string id, const MaxTracker& m, double threshold, std::string detail = {}) {
    threshold = scaled(threshold);
    CheckReport r;
    r.check_id = std::move(id);
    r.max_residual = m.value;
    r.threshold = threshold;
    r.witness = m.where;
    r.status = m.value <= threshold ? Status::pass : Status::fail;
    r.detail = std::move(detail);
    return r;
}

}  // namespace affinor
